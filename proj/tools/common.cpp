#include "common.hpp"

#include <algorithm>
#include <set>

namespace widx_cli {

std::string to_hex(unsigned width, const std::uint8_t* word) {
    std::string out(width / 4 + 1, '\0');
    check(widx_word_to_hex(width, word, out.data(), out.size()), "hex");
    out.pop_back();
    return out;
}

Bytes from_hex(unsigned width, const std::string& hex) {
    Bytes out(width / 8);
    check(widx_word_from_hex(width, hex.c_str(), out.data()), "hex word");
    return out;
}

bool get_bit(const Bytes& w, unsigned i) { return (w[i / 8] >> (7 - i % 8)) & 1; }

void set_bit(Bytes& w, unsigned i, bool v) {
    const std::uint8_t m = std::uint8_t(0x80u >> (i % 8));
    w[i / 8] = v ? (w[i / 8] | m) : (w[i / 8] & ~m);
}

void increment(Bytes& w) {
    for (std::size_t i = w.size(); i-- > 0;)
        if (++w[i] != 0) return;
}

void decrement(Bytes& w) {
    for (std::size_t i = w.size(); i-- > 0;)
        if (w[i]-- != 0) return;
}

widx_format parse_format(const std::string& name) {
    if (name == "hex") return WIDX_FORMAT_HEX;
    if (name == "bin") return WIDX_FORMAT_BIN;
    throw CliError("unknown format '" + name + "'");
}

KeySet read_keys(const std::string& path, unsigned width, widx_format format) {
    std::uint8_t* buf = nullptr;
    std::size_t count = 0;
    check(widx_words_read(path.c_str(), width, format, &buf, &count), "reading keys");
    KeySet keys;
    keys.width = width;
    keys.bytes = width / 8;
    keys.data.assign(buf, buf + count * keys.bytes);
    widx_buffer_free(buf);
    if (count == 0) throw CliError("key file " + path + " is empty");
    check(widx_keys_check(width, keys.data.data(), count), "key file " + path);
    return keys;
}

KeySet generate_keys(std::size_t count, unsigned width, std::uint64_t seed, const std::string& distribution) {
    if (!widx_width_supported(width)) throw CliError("unsupported width " + std::to_string(width));
    if (count == 0) throw CliError("count must be at least 1");
    if (width == 16 && count > 65536) throw CliError("at most 65536 distinct 16-bit keys exist");
    if (distribution != "uniform" && distribution != "clustered")
        throw CliError("unknown distribution '" + distribution + "'");

    Random rng(seed);
    std::set<Bytes> keys;
    std::vector<Bytes> centers;
    const unsigned spread = std::max(2u, width / 4);  // random low bits in a cluster
    while (keys.size() < count) {
        Bytes k = rng.word(width);
        if (distribution == "clustered") {
            if (centers.empty() || rng.below(64) == 0) centers.push_back(rng.word(width));
            const Bytes& c = centers[rng.below(centers.size())];
            for (unsigned i = 0; i + spread < width; ++i) set_bit(k, i, get_bit(c, i));
        }
        keys.insert(std::move(k));
    }
    KeySet out;
    out.width = width;
    out.bytes = width / 8;
    for (const Bytes& k : keys) out.data.insert(out.data.end(), k.begin(), k.end());
    return out;
}

std::size_t lower_bound(const KeySet& keys, std::size_t from, std::size_t to, const std::uint8_t* x) {
    while (from < to) {
        const std::size_t mid = (from + to) / 2;
        if (std::memcmp(keys.at(mid), x, keys.bytes) < 0)
            from = mid + 1;
        else
            to = mid;
    }
    return from;
}

std::uint64_t operations(const widx_counts& c) {
    return c.shifts + c.boolean_ops + c.arith_ops + c.comparisons + c.multiplications;
}

std::uint64_t probes(const widx_counts& c) { return c.index_probes + c.key_probes; }

void CountStats::add(const widx_counts& c) {
    auto acc = [](std::uint64_t& s, std::uint64_t& m, std::uint64_t v) {
        s += v;
        m = std::max(m, v);
    };
    acc(sum.shifts, max.shifts, c.shifts);
    acc(sum.boolean_ops, max.boolean_ops, c.boolean_ops);
    acc(sum.arith_ops, max.arith_ops, c.arith_ops);
    acc(sum.comparisons, max.comparisons, c.comparisons);
    acc(sum.multiplications, max.multiplications, c.multiplications);
    acc(sum.index_probes, max.index_probes, c.index_probes);
    acc(sum.key_probes, max.key_probes, c.key_probes);
    acc(ops_sum, ops_max, operations(c));
    acc(probes_sum, probes_max, probes(c));
    ++samples;
}

void CountStats::merge(const CountStats& o) {
    auto acc = [](std::uint64_t& s, std::uint64_t& m, std::uint64_t os, std::uint64_t om) {
        s += os;
        m = std::max(m, om);
    };
    acc(sum.shifts, max.shifts, o.sum.shifts, o.max.shifts);
    acc(sum.boolean_ops, max.boolean_ops, o.sum.boolean_ops, o.max.boolean_ops);
    acc(sum.arith_ops, max.arith_ops, o.sum.arith_ops, o.max.arith_ops);
    acc(sum.comparisons, max.comparisons, o.sum.comparisons, o.max.comparisons);
    acc(sum.multiplications, max.multiplications, o.sum.multiplications, o.max.multiplications);
    acc(sum.index_probes, max.index_probes, o.sum.index_probes, o.max.index_probes);
    acc(sum.key_probes, max.key_probes, o.sum.key_probes, o.max.key_probes);
    acc(ops_sum, ops_max, o.ops_sum, o.ops_max);
    acc(probes_sum, probes_max, o.probes_sum, o.probes_max);
    samples += o.samples;
}

Json CountStats::to_json() const {
    const double n = samples ? double(samples) : 1.0;
    auto fields = [&](const widx_counts& c, bool mean) {
        auto v = [&](std::uint64_t x) -> Json { return mean ? Json(double(x) / n) : Json(x); };
        Json j;
        j["shifts"] = v(c.shifts);
        j["boolean_ops"] = v(c.boolean_ops);
        j["arith_ops"] = v(c.arith_ops);
        j["comparisons"] = v(c.comparisons);
        j["multiplications"] = v(c.multiplications);
        j["index_probes"] = v(c.index_probes);
        j["key_probes"] = v(c.key_probes);
        j["operations"] = mean ? Json(double(ops_sum) / n) : Json(ops_max);
        j["probes"] = mean ? Json(double(probes_sum) / n) : Json(probes_max);
        return j;
    };
    Json j;
    j["samples"] = samples;
    j["mean"] = fields(sum, true);
    j["max"] = fields(max, false);
    return j;
}

Bytes splice(const Bytes& key, const Bytes& noise, unsigned from) {
    Bytes out = key;
    for (unsigned i = from; i < key.size() * 8; ++i) set_bit(out, i, get_bit(noise, i));
    return out;
}

std::vector<Query> make_queries(const KeySet& keys, Random& rng, std::size_t count, unsigned chunk, bool boundary) {
    const std::size_t n = keys.size();
    std::vector<Query> out;
    for (std::size_t i = 0; boundary && i < n; ++i) {
        const unsigned c = static_cast<unsigned>(i / chunk);
        out.push_back({keys.word(i), c});
        if (i % chunk == 0) {
            Bytes up = keys.word(i), down = keys.word(i);
            increment(up);
            decrement(down);
            out.push_back({up, c});
            out.push_back({down, c});
        }
    }
    for (std::size_t q = 0; q < count; ++q) {
        const std::size_t i = rng.below(n);
        Query query{keys.word(i), static_cast<unsigned>(i / chunk)};
        switch (rng.below(4)) {
        case 0: query.x = rng.word(keys.width); break;
        case 1: break;
        case 2:
            if (rng.below(2))
                increment(query.x);
            else
                decrement(query.x);
            break;
        default: query.x = splice(query.x, rng.word(keys.width), static_cast<unsigned>(rng.below(keys.width + 1)));
        }
        out.push_back(std::move(query));
    }
    return out;
}

} // namespace widx_cli
