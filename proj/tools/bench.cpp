#include "common.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

namespace widx_cli {

namespace {

unsigned log2u(unsigned w) { return static_cast<unsigned>(std::bit_width(w) - 1); }

Json extras(double mean_iterations, std::uint64_t max_iterations) {
    return {{"mean", mean_iterations}, {"max", max_iterations}};
}

Json bench_gamma(const KeySet& keys, const std::vector<Query>& queries) {
    const unsigned w = keys.width, chunk = widx_chunk_size(w);
    const std::size_t n = keys.size();
    std::vector<std::unique_ptr<widx_gamma, decltype(&widx_gamma_free)>> nodes;
    std::uint64_t bits = 0;
    for (std::size_t at = 0; at < n; at += chunk) {
        widx_gamma* g = nullptr;
        check(widx_gamma_new(w, keys.at(at), std::min<std::size_t>(chunk, n - at), &g), "building gamma node");
        nodes.emplace_back(g, widx_gamma_free);
        bits += widx_gamma_index_bits(g);
    }
    CountStats stats;
    std::uint64_t it_sum = 0, it_max = 0;
    for (const Query& q : queries) {
        int found;
        unsigned rank, it;
        check(widx_gamma_search(nodes[q.chunk].get(), q.x.data(), &rank, &it), "gamma search");
        it_sum += it;
        it_max = std::max<std::uint64_t>(it_max, it);
        stats.add(measure([&] {
            check(widx_gamma_successor(nodes[q.chunk].get(), q.x.data(), &found, &rank, nullptr), "gamma query");
        }));
    }
    Json j;
    j["nodes"] = nodes.size();
    j["index_bits"] = bits;
    j["bits_per_key"] = double(bits) / double(n);
    j["counts"] = stats.to_json();
    j["iterations"] = extras(queries.empty() ? 0.0 : double(it_sum) / double(queries.size()), it_max);
    return j;
}

Json bench_beta(const KeySet& keys, const std::vector<Query>& queries, std::uint64_t seed) {
    const std::size_t n = keys.size();
    widx_beta* raw = nullptr;
    check(widx_beta_new(keys.width, keys.data.data(), n, seed, &raw), "building rank structure");
    std::unique_ptr<widx_beta, decltype(&widx_beta_free)> beta(raw, widx_beta_free);
    CountStats stats;
    std::uint64_t fallbacks = 0, d_sum = 0, d_max = 0;
    for (const Query& q : queries) {
        unsigned rank, depth;
        int fb;
        stats.add(measure([&] { check(widx_beta_rank(beta.get(), q.x.data(), &rank, &fb, &depth), "rank query"); }));
        fallbacks += fb;
        d_sum += depth;
        d_max = std::max<std::uint64_t>(d_max, depth);
    }
    const double lg = double(log2u(keys.width)) + std::log2(double(n));
    Json j;
    j["height"] = widx_beta_height(beta.get());
    j["index_bits"] = widx_beta_index_bits(beta.get());
    j["bits_per_key_log_w_plus_log_n"] = double(widx_beta_index_bits(beta.get())) / (double(n) * lg);
    j["counts"] = stats.to_json();
    j["depth"] = extras(queries.empty() ? 0.0 : double(d_sum) / double(queries.size()), d_max);
    j["fallbacks"] = fallbacks;
    j["fallback_rate"] = queries.empty() ? 0.0 : double(fallbacks) / double(queries.size());
    return j;
}

Json bench_index(const KeySet& keys, const std::vector<Query>& queries) {
    const std::size_t n = keys.size();
    widx_index* raw = nullptr;
    check(widx_index_new(keys.width, keys.data.data(), n, &raw), "building index");
    std::unique_ptr<widx_index, decltype(&widx_index_free)> idx(raw, widx_index_free);
    CountStats stats;
    for (const Query& q : queries) {
        int found;
        unsigned rank;
        stats.add(measure([&] {
            check(widx_index_successor(idx.get(), q.x.data(), &found, &rank, nullptr), "index query");
        }));
    }
    Json j;
    j["chunks"] = widx_index_chunk_count(idx.get());
    j["index_bits"] = widx_index_bits(idx.get());
    j["bits_per_key_log_w"] = double(widx_index_bits(idx.get())) / (double(n) * log2u(keys.width));
    j["counts"] = stats.to_json();
    return j;
}

// Mean select() cost over random plans; k = 0 means w / log w.
CountStats selector_run(unsigned w, unsigned k, unsigned plans, unsigned words_per_plan, Random& rng) {
    if (k == 0) k = widx_chunk_size(w);
    CountStats stats;
    std::vector<unsigned> idx(k);
    Bytes out(w / 8);
    for (unsigned p = 0; p < plans; ++p) {
        for (auto& i : idx) i = static_cast<unsigned>(rng.below(w));
        widx_selector* sel = nullptr;
        check(widx_selector_new(w, idx.data(), k, &sel), "building selector");
        for (unsigned t = 0; t < words_per_plan; ++t) {
            const Bytes x = rng.word(w);
            stats.add(measure([&] { check(widx_selector_select(sel, x.data(), out.data()), "select"); }));
        }
        widx_selector_free(sel);
    }
    return stats;
}

Json selector_scaling(const BenchOptions& opt) {
    Random rng(opt.seed ^ 0x5e1ec7);
    Json rows = Json::array();
    struct Workload {
        const char* name;
        unsigned k;
    };
    for (Workload wl : {Workload{"capacity", 0}, Workload{"k4", 4}}) {
        double base = 0;
        for (unsigned w : opt.widths) {
            const bool huge = w > 256;
            const unsigned plans = huge ? 2 : std::max<unsigned>(1, static_cast<unsigned>(opt.queries / 10));
            const unsigned per = huge ? 3 : 10;
            const CountStats s = selector_run(w, wl.k, plans, per, rng);
            const double mean = double(s.ops_sum) / double(s.samples);
            if (w == opt.widths.front()) base = mean;
            rows.push_back({{"workload", wl.name},
                            {"width", w},
                            {"k", wl.k ? wl.k : widx_chunk_size(w)},
                            {"samples", s.samples},
                            {"mean_ops", mean},
                            {"max_ops", s.ops_max},
                            {"mean_multiplications", double(s.sum.multiplications) / double(s.samples)},
                            {"op_ratio", base > 0 ? mean / base : 0.0},
                            {"log_ratio", double(log2u(w)) / double(log2u(opt.widths.front()))}});
        }
    }
    return rows;
}

} // namespace

Json run_bench(const KeySet& keys, const BenchOptions& opt) {
    Random rng(opt.seed);
    const auto queries = make_queries(keys, rng, opt.queries, widx_chunk_size(keys.width), false);
    Json r;
    r["command"] = "bench";
    Json widths = Json::array();
    for (unsigned w : opt.widths) widths.push_back(w);
    r["config"] = {{"width", keys.width}, {"keys", keys.size()}, {"queries", opt.queries}, {"seed", opt.seed},
                   {"scaling_widths", widths}};
    r["gamma"] = bench_gamma(keys, queries);
    r["beta"] = bench_beta(keys, queries, opt.seed);
    r["index"] = bench_index(keys, queries);
    r["selector_scaling"] = selector_scaling(opt);
    return r;
}

std::string bench_text(const Json& r) {
    std::ostringstream out;
    char line[256];
    const Json& cfg = r["config"];
    out << "width " << cfg["width"].get<unsigned>() << ", keys " << cfg["keys"].get<std::size_t>() << ", queries "
        << cfg["queries"].get<std::size_t>() << ", seed " << cfg["seed"].get<std::uint64_t>() << "\n\n";
    std::snprintf(line, sizeof line, "%-10s %12s %10s %10s %10s %10s %8s\n", "structure", "index bits", "mean ops",
                  "max ops", "mean prb", "max prb", "mults");
    out << line;
    for (const char* name : {"gamma", "beta", "index"}) {
        const Json& s = r[name];
        const Json& c = s["counts"];
        std::snprintf(line, sizeof line, "%-10s %12llu %10.1f %10llu %10.2f %10llu %8llu\n", name,
                      static_cast<unsigned long long>(s["index_bits"].get<std::uint64_t>()),
                      c["mean"]["operations"].get<double>(),
                      static_cast<unsigned long long>(c["max"]["operations"].get<std::uint64_t>()),
                      c["mean"]["probes"].get<double>(),
                      static_cast<unsigned long long>(c["max"]["probes"].get<std::uint64_t>()),
                      static_cast<unsigned long long>(c["max"]["multiplications"].get<std::uint64_t>()));
        out << line;
    }
    out << "beta fallback rate " << r["beta"]["fallback_rate"].get<double>() << "\n\nselector scaling\n";
    std::snprintf(line, sizeof line, "%-9s %6s %5s %10s %8s %8s %9s\n", "workload", "width", "k", "mean ops", "ratio",
                  "log w", "mults");
    out << line;
    for (const Json& row : r["selector_scaling"]) {
        std::snprintf(line, sizeof line, "%-9s %6u %5u %10.1f %8.3f %8.3f %9.1f\n",
                      row["workload"].get<std::string>().c_str(), row["width"].get<unsigned>(),
                      row["k"].get<unsigned>(), row["mean_ops"].get<double>(), row["op_ratio"].get<double>(),
                      row["log_ratio"].get<double>(), row["mean_multiplications"].get<double>());
        out << line;
    }
    return out.str();
}

} // namespace widx_cli
