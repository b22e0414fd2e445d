#pragma once
// Shared helpers for the widx command-line tool. Everything here talks to the
// library through the C interface only.

#include "wordidx/wordidx.h"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace widx_cli {

using Bytes = std::vector<std::uint8_t>;
using Json = nlohmann::ordered_json;

enum Exit { exit_pass = 0, exit_mismatch = 1, exit_usage = 2 };

// Library or input failure; reported with exit code 2.
struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check(widx_status s, const std::string& what) {
    if (s != WIDX_OK) throw CliError(what + ": " + widx_status_name(s) + ": " + widx_last_error());
}

// Sorted keys packed as big-endian words.
struct KeySet {
    unsigned width = 0;
    std::size_t bytes = 0;  // per word
    Bytes data;

    std::size_t size() const { return bytes ? data.size() / bytes : 0; }
    const std::uint8_t* at(std::size_t i) const { return data.data() + i * bytes; }
    Bytes word(std::size_t i) const { return Bytes(at(i), at(i) + bytes); }
};

class Random {
public:
    explicit Random(std::uint64_t seed) { check(widx_rng_new(seed, &rng_), "rng"); }
    ~Random() { widx_rng_free(rng_); }
    Random(const Random&) = delete;
    Random& operator=(const Random&) = delete;

    std::uint64_t next() { return widx_rng_next(rng_); }
    std::uint64_t below(std::uint64_t bound) { return widx_rng_below(rng_, bound); }
    Bytes word(unsigned width) {
        Bytes out(width / 8);
        check(widx_rng_word(rng_, width, out.data()), "random word");
        return out;
    }

private:
    widx_rng* rng_ = nullptr;
};

std::string to_hex(unsigned width, const std::uint8_t* word);
inline std::string to_hex(unsigned width, const Bytes& word) { return to_hex(width, word.data()); }
Bytes from_hex(unsigned width, const std::string& hex);

bool get_bit(const Bytes& w, unsigned i);
void set_bit(Bytes& w, unsigned i, bool v);
void increment(Bytes& w);  // wraps
void decrement(Bytes& w);  // wraps

widx_format parse_format(const std::string& name);

KeySet read_keys(const std::string& path, unsigned width, widx_format format);
KeySet generate_keys(std::size_t count, unsigned width, std::uint64_t seed, const std::string& distribution);

// 0-based position of the first key >= x (size() when none).
std::size_t lower_bound(const KeySet& keys, std::size_t from, std::size_t to, const std::uint8_t* x);

struct CountStats {
    widx_counts sum{};
    widx_counts max{};
    std::uint64_t ops_sum = 0, ops_max = 0, probes_sum = 0, probes_max = 0;
    std::uint64_t samples = 0;

    void add(const widx_counts& c);
    void merge(const CountStats& o);
    Json to_json() const;
};

std::uint64_t operations(const widx_counts& c);
std::uint64_t probes(const widx_counts& c);

// Counts charged to the calling thread by f.
template <class F>
widx_counts measure(F&& f) {
    widx_counts before, after;
    widx_counts_get(&before);
    f();
    widx_counts_get(&after);
    return {after.shifts - before.shifts,           after.boolean_ops - before.boolean_ops,
            after.arith_ops - before.arith_ops,     after.comparisons - before.comparisons,
            after.multiplications - before.multiplications,
            after.index_probes - before.index_probes, after.key_probes - before.key_probes};
}

struct Query {
    Bytes x;
    unsigned chunk = 0;  // key chunk the query was drawn from
};

Bytes splice(const Bytes& key, const Bytes& noise, unsigned from);

// Random queries: uniform words, keys, keys +-1 and key prefixes with random
// tails. With boundary set, every key and every chunk head +-1 come first.
std::vector<Query> make_queries(const KeySet& keys, Random& rng, std::size_t count, unsigned chunk, bool boundary);

struct VerifyOptions {
    std::size_t queries = 10000;
    std::uint64_t seed = 1;
    std::string structure = "index";
    bool inject_fault = false;
    unsigned jobs = 1;
};

// Report plus exit code.
struct Outcome {
    Json report;
    int code = exit_pass;
};

Outcome run_verify(const KeySet& keys, const VerifyOptions& opt);

struct BenchOptions {
    std::size_t queries = 2000;
    std::uint64_t seed = 1;
    std::vector<unsigned> widths{16, 256};
};

Json run_bench(const KeySet& keys, const BenchOptions& opt);
std::string bench_text(const Json& report);

} // namespace widx_cli
