#include "common.hpp"

#include <algorithm>
#include <bit>
#include <exception>
#include <memory>
#include <thread>

namespace widx_cli {

namespace {

struct Prefix {
    Bytes p;
    unsigned len;
};

using IndexPtr = std::unique_ptr<widx_index, decltype(&widx_index_free)>;
using BetaPtr = std::unique_ptr<widx_beta, decltype(&widx_beta_free)>;
using GammaPtr = std::unique_ptr<widx_gamma, decltype(&widx_gamma_free)>;

struct Shard {
    CountStats counts;
    std::uint64_t checked = 0, mismatches = 0, fallbacks = 0, violations = 0, iterations_sum = 0, iterations_max = 0;
    std::optional<std::size_t> first_bad;
    Json counterexample;
};

void merge(Shard& into, const Shard& s) {
    into.counts.merge(s.counts);
    into.checked += s.checked;
    into.mismatches += s.mismatches;
    into.fallbacks += s.fallbacks;
    into.violations += s.violations;
    into.iterations_sum += s.iterations_sum;
    into.iterations_max = std::max(into.iterations_max, s.iterations_max);
    if (s.first_bad && (!into.first_bad || *s.first_bad < *into.first_bad)) {
        into.first_bad = s.first_bad;
        into.counterexample = s.counterexample;
    }
}

// Splits [0, total) across jobs threads; each thread has its own counters.
template <class F>
Shard run_sharded(std::size_t total, unsigned jobs, F&& body) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, total))));
    std::vector<Shard> shards(jobs);
    std::vector<std::exception_ptr> errors(jobs);
    auto work = [&](unsigned j) {
        const std::size_t from = total * j / jobs, to = total * (j + 1) / jobs;
        try {
            for (std::size_t i = from; i < to; ++i) body(i, shards[j]);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(work, j);
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    Shard all;
    for (const auto& s : shards) merge(all, s);
    return all;
}

void record(Shard& s, std::size_t i, Json example) {
    ++s.mismatches;
    if (!s.first_bad || i < *s.first_bad) {
        s.first_bad = i;
        s.counterexample = std::move(example);
    }
}

Json rank_json(int found, unsigned rank) { return found ? Json(rank) : Json(nullptr); }

} // namespace

Outcome run_verify(const KeySet& keys, const VerifyOptions& opt) {
    const unsigned w = keys.width;
    const std::size_t n = keys.size();
    const unsigned chunk = widx_chunk_size(w);
    Random rng(opt.seed);

    Outcome out;
    Json& r = out.report;
    r["command"] = "verify";
    r["config"] = {{"width", w},         {"keys", n},
                   {"queries", opt.queries}, {"seed", opt.seed},
                   {"structure", opt.structure}, {"inject_fault", opt.inject_fault},
                   {"jobs", opt.jobs}};

    const auto queries = make_queries(keys, rng, opt.queries, chunk, true);
    Shard result;
    Json info;

    if (opt.structure == "index") {
        widx_index* raw = nullptr;
        check(widx_index_new(w, keys.data.data(), n, &raw), "building index");
        IndexPtr idx(raw, widx_index_free);
        info["index_bits"] = widx_index_bits(idx.get());
        info["chunks"] = widx_index_chunk_count(idx.get());
        info["bits_per_key_log_w"] = double(widx_index_bits(idx.get())) / (double(n) * std::bit_width(w - 1));
        if (opt.inject_fault) {
            unsigned c = 0;
            while (c + 1 < widx_index_chunk_count(idx.get()) && std::min<std::size_t>(chunk, n - c * chunk) < 3) ++c;
            Bytes mask(w / 8);
            check(widx_index_plan_word(idx.get(), c, 1, mask.data()), "reading plan word");
            check(widx_index_corrupt_plan_word(idx.get(), c, 1, mask.data()), "injecting fault");
            r["fault"] = {{"chunk", c}, {"plan_word", 1}, {"effect", "selection mask cleared"}};
        }

        std::vector<Prefix> prefixes;
        for (std::size_t q = 0; q < std::max<std::size_t>(1, opt.queries / 10); ++q)
            prefixes.push_back({keys.word(rng.below(n)), static_cast<unsigned>(rng.below(w + 1))});

        result = run_sharded(queries.size(), opt.jobs, [&](std::size_t i, Shard& s) {
            const Query& q = queries[i];
            const std::size_t want = lower_bound(keys, 0, n, q.x.data());
            int found = 0;
            unsigned rank = 0;
            const widx_counts c = measure([&] {
                check(widx_index_successor(idx.get(), q.x.data(), &found, &rank, nullptr), "index query");
            });
            s.counts.add(c);
            ++s.checked;
            if (c.multiplications) ++s.violations;
            const bool ok = want == n ? !found : found && rank == want + 1;
            if (!ok)
                record(s, i,
                       {{"kind", "successor"},
                        {"query", to_hex(w, q.x)},
                        {"expected", want == n ? Json(nullptr) : Json(want + 1)},
                        {"got", rank_json(found, rank)}});
        });

        Shard pre = run_sharded(prefixes.size(), opt.jobs, [&](std::size_t i, Shard& s) {
            const Prefix& p = prefixes[i];
            Bytes low = p.p, high = p.p;
            for (unsigned b = p.len; b < w; ++b) {
                set_bit(low, b, false);
                set_bit(high, b, true);
            }
            const std::size_t first = lower_bound(keys, 0, n, low.data());
            std::size_t last = lower_bound(keys, 0, n, high.data());
            if (last < n && std::memcmp(keys.at(last), high.data(), keys.bytes) == 0) ++last;
            int found = 0;
            unsigned a = 0, b = 0;
            check(widx_index_weak_prefix(idx.get(), p.p.data(), p.len, &found, &a, &b), "prefix query");
            ++s.checked;
            const bool ok = first < last ? found && a == first + 1 && b == last : !found;
            if (!ok)
                record(s, queries.size() + i,
                       {{"kind", "weak_prefix"},
                        {"prefix", to_hex(w, p.p)},
                        {"length", p.len},
                        {"expected", first < last ? Json::array({first + 1, last}) : Json(nullptr)},
                        {"got", found ? Json::array({a, b}) : Json(nullptr)}});
        });
        r["prefix_queries"] = pre.checked;
        r["prefix_mismatches"] = pre.mismatches;
        if (pre.first_bad && !result.first_bad) {
            result.first_bad = pre.first_bad;
            result.counterexample = pre.counterexample;
        }
    } else if (opt.structure == "beta") {
        widx_beta* raw = nullptr;
        check(widx_beta_new(w, keys.data.data(), n, opt.seed, &raw), "building rank structure");
        BetaPtr beta(raw, widx_beta_free);
        info["index_bits"] = widx_beta_index_bits(beta.get());
        info["height"] = widx_beta_height(beta.get());
        if (opt.inject_fault) {
            const std::uint64_t pos = rng.below(widx_beta_index_bits(beta.get()) - 64);
            check(widx_beta_corrupt_bit(beta.get(), pos), "injecting fault");
            r["fault"] = {{"bit", pos}, {"effect", "one encoded bit flipped"}};
        }
        result = run_sharded(queries.size(), opt.jobs, [&](std::size_t i, Shard& s) {
            const Query& q = queries[i];
            std::size_t want = lower_bound(keys, 0, n, q.x.data());
            if (want < n && std::memcmp(keys.at(want), q.x.data(), keys.bytes) == 0) ++want;
            unsigned rank = 0, depth = 0;
            int fallback = 0;
            const widx_counts c = measure([&] {
                check(widx_beta_rank(beta.get(), q.x.data(), &rank, &fallback, &depth), "rank query");
            });
            s.counts.add(c);
            ++s.checked;
            s.fallbacks += fallback;
            s.iterations_sum += depth;
            s.iterations_max = std::max<std::uint64_t>(s.iterations_max, depth);
            if (rank != want)
                record(s, i, {{"kind", "rank"}, {"query", to_hex(w, q.x)}, {"expected", want}, {"got", rank}});
        });
    } else if (opt.structure == "gamma") {
        std::vector<GammaPtr> nodes;
        std::uint64_t bits = 0;
        for (std::size_t at = 0; at < n; at += chunk) {
            widx_gamma* raw = nullptr;
            check(widx_gamma_new(w, keys.at(at), std::min<std::size_t>(chunk, n - at), &raw), "building gamma node");
            nodes.emplace_back(raw, widx_gamma_free);
            bits += widx_gamma_index_bits(raw);
        }
        info["nodes"] = nodes.size();
        info["index_bits"] = bits;
        if (opt.inject_fault) {
            unsigned c = 0;
            while (c + 1 < nodes.size() && std::min<std::size_t>(chunk, n - c * chunk) < 3) ++c;
            Bytes mask(w / 8);
            check(widx_gamma_plan_word(nodes[c].get(), 1, mask.data()), "reading plan word");
            check(widx_gamma_corrupt_plan_word(nodes[c].get(), 1, mask.data()), "injecting fault");
            r["fault"] = {{"node", c}, {"plan_word", 1}, {"effect", "selection mask cleared"}};
        }
        result = run_sharded(queries.size(), opt.jobs, [&](std::size_t i, Shard& s) {
            const Query& q = queries[i];
            const std::size_t from = std::size_t(q.chunk) * chunk, to = std::min(n, from + chunk);
            const std::size_t k = to - from;
            const std::size_t pos = lower_bound(keys, from, to, q.x.data());
            unsigned rank = 0, iterations = 0;
            int found = 0;
            check(widx_gamma_search(nodes[q.chunk].get(), q.x.data(), &rank, &iterations), "gamma search");
            const widx_counts c = measure([&] {
                check(widx_gamma_successor(nodes[q.chunk].get(), q.x.data(), &found, &rank, nullptr), "gamma query");
            });
            s.counts.add(c);
            ++s.checked;
            s.iterations_sum += iterations;
            s.iterations_max = std::max<std::uint64_t>(s.iterations_max, iterations);
            const unsigned max_iter = static_cast<unsigned>(std::bit_width(k - 1)) + 1;
            if (iterations > max_iter || c.key_probes > 3 || c.multiplications) ++s.violations;
            const bool ok = pos == to ? !found : found && rank == pos - from + 1;
            if (!ok)
                record(s, i,
                       {{"kind", "successor"},
                        {"node", q.chunk},
                        {"query", to_hex(w, q.x)},
                        {"expected", pos == to ? Json(nullptr) : Json(pos - from + 1)},
                        {"got", rank_json(found, rank)}});
        });
    } else {
        throw CliError("unknown structure '" + opt.structure + "'");
    }

    r["structure"] = info;
    r["checked"] = result.checked;
    r["mismatches"] = result.mismatches;
    if (opt.structure == "beta") {
        r["fallbacks"] = result.fallbacks;
        r["fallback_rate"] = result.checked ? double(result.fallbacks) / double(result.checked) : 0.0;
        r["depth"] = {{"mean", result.checked ? double(result.iterations_sum) / double(result.checked) : 0.0},
                      {"max", result.iterations_max}};
    }
    if (opt.structure == "gamma")
        r["iterations"] = {{"mean", result.checked ? double(result.iterations_sum) / double(result.checked) : 0.0},
                           {"max", result.iterations_max}};
    r["counts"] = result.counts.to_json();
    r["invariant_violations"] = result.violations;
    r["counterexample"] = result.first_bad ? result.counterexample : Json(nullptr);
    const bool pass = !result.first_bad && result.violations == 0;
    r["result"] = pass ? "pass" : "fail";
    out.code = pass ? exit_pass : exit_mismatch;
    return out;
}

} // namespace widx_cli
