#include "wordidx/wordidx.h"

#include "wordidx/beta.hpp"
#include "wordidx/gamma.hpp"
#include "wordidx/index.hpp"
#include "wordidx/rng.hpp"
#include "wordidx/selector.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

using namespace wordidx;

struct widx_rng {
    Rng rng;
};

struct widx_selector {
    SelectorPlan plan;
};

struct widx_gamma {
    std::vector<Word> keys;
    GammaNode node;  // views keys
};

struct widx_beta {
    BetaStructure beta;
};

struct widx_index {
    SuccessorIndex index;
};

namespace {

thread_local std::string last_error;

widx_status to_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return WIDX_INVALID_ARGUMENT;
    case ErrorCode::width_mismatch: return WIDX_WIDTH_MISMATCH;
    case ErrorCode::out_of_range: return WIDX_OUT_OF_RANGE;
    case ErrorCode::unsorted_keys: return WIDX_UNSORTED_KEYS;
    case ErrorCode::parse_error: return WIDX_PARSE_ERROR;
    case ErrorCode::io_error: return WIDX_IO_ERROR;
    case ErrorCode::internal: return WIDX_INTERNAL;
    }
    return WIDX_INTERNAL;
}

template <class F>
widx_status guard(F&& f) {
    try {
        f();
        return WIDX_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return WIDX_NO_MEMORY;
    } catch (const std::exception& e) {
        last_error = e.what();
        return WIDX_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " is null");
}

void need_width(unsigned width) {
    if (!is_supported_width(width)) fail(ErrorCode::invalid_argument, "unsupported width " + std::to_string(width));
}

std::size_t word_bytes(unsigned width) { return width / 8; }

Word load_word(unsigned width, const std::uint8_t* p) {
    need(p, "word");
    return Word::from_bytes(width, std::span<const std::uint8_t>(p, word_bytes(width)));
}

void store_word(const Word& w, std::uint8_t* p) { w.to_bytes(std::span<std::uint8_t>(p, word_bytes(w.width()))); }

std::vector<Word> load_keys(unsigned width, const std::uint8_t* keys, std::size_t count) {
    need_width(width);
    if (count == 0) fail(ErrorCode::invalid_argument, "need at least one key");
    need(keys, "keys");
    std::vector<Word> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(load_word(width, keys + i * word_bytes(width)));
    return out;
}

WordFormat to_format(widx_format f) {
    if (f != WIDX_FORMAT_HEX && f != WIDX_FORMAT_BIN) fail(ErrorCode::invalid_argument, "unknown format");
    return f == WIDX_FORMAT_HEX ? WordFormat::hex : WordFormat::bin;
}

std::ios::openmode mode(widx_format f) { return f == WIDX_FORMAT_BIN ? std::ios::binary : std::ios::openmode{}; }

} // namespace

extern "C" {

const char* widx_status_name(widx_status status) {
    switch (status) {
    case WIDX_OK: return "ok";
    case WIDX_INVALID_ARGUMENT: return "invalid_argument";
    case WIDX_WIDTH_MISMATCH: return "width_mismatch";
    case WIDX_OUT_OF_RANGE: return "out_of_range";
    case WIDX_UNSORTED_KEYS: return "unsorted_keys";
    case WIDX_PARSE_ERROR: return "parse_error";
    case WIDX_IO_ERROR: return "io_error";
    case WIDX_INTERNAL: return "internal";
    case WIDX_NO_MEMORY: return "no_memory";
    }
    return "unknown";
}

const char* widx_last_error(void) { return last_error.c_str(); }

int widx_width_supported(unsigned width) { return is_supported_width(width) ? 1 : 0; }

unsigned widx_chunk_size(unsigned width) { return is_supported_width(width) ? blocks_per_word(width) : 0; }

void widx_counts_get(widx_counts* out) {
    if (!out) return;
    const OpCounts& c = live_counts();
    *out = {c.shifts, c.boolean_ops, c.arith_ops, c.comparisons, c.multiplications, c.index_probes, c.key_probes};
}

void widx_counts_reset(void) { live_counts() = OpCounts{}; }

// ---- rng ----

widx_status widx_rng_new(uint64_t seed, widx_rng** out) {
    return guard([&] {
        need(out, "out");
        *out = new widx_rng{Rng(seed)};
    });
}

void widx_rng_free(widx_rng* rng) { delete rng; }

uint64_t widx_rng_next(widx_rng* rng) { return rng ? rng->rng() : 0; }

uint64_t widx_rng_below(widx_rng* rng, uint64_t bound) { return rng && bound ? rng->rng.below(bound) : 0; }

widx_status widx_rng_word(widx_rng* rng, unsigned width, uint8_t* out) {
    return guard([&] {
        need(rng, "rng");
        need(out, "out");
        need_width(width);
        store_word(random_word(rng->rng, width), out);
    });
}

// ---- words ----

widx_status widx_word_to_hex(unsigned width, const uint8_t* word, char* out, size_t cap) {
    return guard([&] {
        need_width(width);
        need(out, "out");
        const std::string hex = load_word(width, word).to_hex();
        if (cap < hex.size() + 1) fail(ErrorCode::out_of_range, "hex buffer too small");
        std::memcpy(out, hex.c_str(), hex.size() + 1);
    });
}

widx_status widx_word_from_hex(unsigned width, const char* hex, uint8_t* out) {
    return guard([&] {
        need_width(width);
        need(hex, "hex");
        need(out, "out");
        store_word(Word::from_hex(width, hex), out);
    });
}

widx_status widx_words_read(const char* path, unsigned width, widx_format format, uint8_t** out, size_t* count) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        need(count, "count");
        need_width(width);
        const WordFormat f = to_format(format);
        std::ifstream in(path, mode(format));
        if (!in) fail(ErrorCode::io_error, std::string("cannot open ") + path);
        const auto words = read_words(in, width, f);
        const std::size_t wb = word_bytes(width);
        auto* buf = static_cast<std::uint8_t*>(std::malloc(std::max<std::size_t>(1, words.size() * wb)));
        if (!buf) throw std::bad_alloc();
        for (std::size_t i = 0; i < words.size(); ++i) store_word(words[i], buf + i * wb);
        *out = buf;
        *count = words.size();
    });
}

widx_status widx_words_write(const char* path, unsigned width, widx_format format, const uint8_t* words,
                             size_t count) {
    return guard([&] {
        need(path, "path");
        need_width(width);
        const WordFormat f = to_format(format);
        if (count) need(words, "words");
        std::vector<Word> list;
        for (std::size_t i = 0; i < count; ++i) list.push_back(load_word(width, words + i * word_bytes(width)));
        std::ofstream out(path, mode(format) | std::ios::trunc);
        if (!out) fail(ErrorCode::io_error, std::string("cannot open ") + path);
        write_words(out, list, f);
    });
}

void widx_buffer_free(void* buffer) { std::free(buffer); }

widx_status widx_keys_check(unsigned width, const uint8_t* keys, size_t count) {
    return guard([&] {
        if (count == 0) {
            need_width(width);
            return;
        }
        check_sorted_keys(load_keys(width, keys, count));
    });
}

// ---- selector ----

widx_status widx_selector_new(unsigned width, const unsigned* indices, size_t k, widx_selector** out) {
    return guard([&] {
        need(out, "out");
        need_width(width);
        if (k) need(indices, "indices");
        *out = new widx_selector{preprocess(std::span<const unsigned>(indices, k), width)};
    });
}

void widx_selector_free(widx_selector* sel) { delete sel; }

widx_status widx_selector_select(const widx_selector* sel, const uint8_t* x, uint8_t* out) {
    return guard([&] {
        need(sel, "selector");
        need(out, "out");
        store_word(select(sel->plan, load_word(sel->plan.width, x)), out);
    });
}

widx_status widx_selector_trace(const widx_selector* sel, const uint8_t* x, uint8_t* x_phases,
                                uint8_t* mask_phases) {
    return guard([&] {
        need(sel, "selector");
        need(x_phases, "x_phases");
        const SelectorTrace t = select_traced(sel->plan, load_word(sel->plan.width, x));
        const std::size_t wb = word_bytes(sel->plan.width);
        for (std::size_t i = 0; i < 8; ++i) {
            store_word(t.x[i], x_phases + i * wb);
            if (mask_phases) store_word(t.mask[i], mask_phases + i * wb);
        }
    });
}

unsigned widx_selector_word_count(const widx_selector* sel) { return sel ? sel->plan.word_count() : 0; }

widx_status widx_selector_words(const widx_selector* sel, uint8_t* out) {
    return guard([&] {
        need(sel, "selector");
        need(out, "out");
        const auto words = sel->plan.words();
        for (std::size_t i = 0; i < words.size(); ++i) store_word(words[i], out + i * word_bytes(sel->plan.width));
    });
}

// ---- gamma ----

widx_status widx_gamma_new(unsigned width, const uint8_t* keys, size_t count, widx_gamma** out) {
    return guard([&] {
        need(out, "out");
        auto g = std::make_unique<widx_gamma>();
        g->keys = load_keys(width, keys, count);
        g->node = build_gamma(g->keys);
        *out = g.release();
    });
}

void widx_gamma_free(widx_gamma* g) { delete g; }

uint64_t widx_gamma_index_bits(const widx_gamma* g) { return g ? g->node.index_bits() : 0; }

widx_status widx_gamma_search(const widx_gamma* g, const uint8_t* x, unsigned* rank, unsigned* iterations) {
    return guard([&] {
        need(g, "gamma");
        const FastSearch f = blind_search_fast(g->node, load_word(g->node.width(), x));
        if (rank) *rank = f.rank;
        if (iterations) *iterations = f.iterations;
    });
}

widx_status widx_gamma_successor(const widx_gamma* g, const uint8_t* x, int* found, unsigned* rank,
                                 uint8_t* key_out) {
    return guard([&] {
        need(g, "gamma");
        need(found, "found");
        const auto h = gamma_successor(g->node, load_word(g->node.width(), x));
        *found = h ? 1 : 0;
        if (h && rank) *rank = h->rank;
        if (h && key_out) store_word(h->key, key_out);
    });
}

unsigned widx_gamma_plan_word_count(const widx_gamma* g) { return g ? g->node.plan().word_count() : 0; }

widx_status widx_gamma_plan_word(const widx_gamma* g, unsigned word, uint8_t* out) {
    return guard([&] {
        need(g, "gamma");
        need(out, "out");
        const auto words = g->node.plan().words();
        if (word >= words.size()) fail(ErrorCode::out_of_range, "plan word out of range");
        store_word(words[word], out);
    });
}

widx_status widx_gamma_corrupt_plan_word(widx_gamma* g, unsigned word, const uint8_t* flip) {
    return guard([&] {
        need(g, "gamma");
        auto words = g->node.words();
        if (5 + word >= words.size()) fail(ErrorCode::out_of_range, "plan word out of range");
        words[5 + word] = words[5 + word] ^ load_word(g->node.width(), flip);
        g->node = GammaNode::from_words(g->node.width(), words, g->keys);
    });
}

// ---- beta ----

widx_status widx_beta_new(unsigned width, const uint8_t* keys, size_t count, uint64_t seed, widx_beta** out) {
    return guard([&] {
        need(out, "out");
        const auto list = load_keys(width, keys, count);
        *out = new widx_beta{build_beta(list, seed)};
    });
}

void widx_beta_free(widx_beta* b) { delete b; }

uint64_t widx_beta_index_bits(const widx_beta* b) { return b ? b->beta.index_bits() : 0; }

unsigned widx_beta_height(const widx_beta* b) { return b ? b->beta.height() : 0; }

widx_status widx_beta_rank(const widx_beta* b, const uint8_t* x, unsigned* rank, int* fallback, unsigned* depth) {
    return guard([&] {
        need(b, "beta");
        const BetaResult r = beta_rank(b->beta, load_word(b->beta.width(), x));
        if (rank) *rank = r.rank;
        if (fallback) *fallback = r.fallback ? 1 : 0;
        if (depth) *depth = r.depth;
    });
}

widx_status widx_beta_corrupt_bit(widx_beta* b, uint64_t pos) {
    return guard([&] {
        need(b, "beta");
        b->beta.corrupt_bit(pos);
    });
}

// ---- index ----

widx_status widx_index_new(unsigned width, const uint8_t* keys, size_t count, widx_index** out) {
    return guard([&] {
        need(out, "out");
        *out = new widx_index{SuccessorIndex::build(load_keys(width, keys, count))};
    });
}

void widx_index_free(widx_index* idx) { delete idx; }

unsigned widx_index_width(const widx_index* idx) { return idx ? idx->index.width() : 0; }

size_t widx_index_size(const widx_index* idx) { return idx ? idx->index.size() : 0; }

unsigned widx_index_chunk_count(const widx_index* idx) { return idx ? idx->index.chunk_count() : 0; }

uint64_t widx_index_bits(const widx_index* idx) { return idx ? idx->index.index_bits() : 0; }

widx_status widx_index_key(const widx_index* idx, size_t rank, uint8_t* out) {
    return guard([&] {
        need(idx, "index");
        need(out, "out");
        if (rank < 1 || rank > idx->index.size()) fail(ErrorCode::out_of_range, "key rank out of range");
        store_word(idx->index.keys()[rank - 1], out);
    });
}

widx_status widx_index_successor(const widx_index* idx, const uint8_t* x, int* found, unsigned* rank,
                                 uint8_t* key_out) {
    return guard([&] {
        need(idx, "index");
        need(found, "found");
        const auto h = idx->index.successor(load_word(idx->index.width(), x));
        *found = h ? 1 : 0;
        if (h && rank) *rank = h->rank;
        if (h && key_out) store_word(h->key, key_out);
    });
}

widx_status widx_index_weak_prefix(const widx_index* idx, const uint8_t* prefix, unsigned len, int* found,
                                   unsigned* first, unsigned* last) {
    return guard([&] {
        need(idx, "index");
        need(found, "found");
        const auto r = idx->index.weak_prefix(load_word(idx->index.width(), prefix), len);
        *found = r ? 1 : 0;
        if (r && first) *first = r->first;
        if (r && last) *last = r->last;
    });
}

widx_status widx_index_save(const widx_index* idx, const char* path, widx_format format) {
    return guard([&] {
        need(idx, "index");
        need(path, "path");
        const WordFormat f = to_format(format);
        std::ofstream out(path, mode(format) | std::ios::trunc);
        if (!out) fail(ErrorCode::io_error, std::string("cannot open ") + path);
        idx->index.save(out, f);
    });
}

widx_status widx_index_load(const char* path, widx_format format, widx_index** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        const WordFormat f = to_format(format);
        std::ifstream in(path, mode(format));
        if (!in) fail(ErrorCode::io_error, std::string("cannot open ") + path);
        *out = new widx_index{SuccessorIndex::load(in, f)};
    });
}

widx_status widx_index_plan_word(const widx_index* idx, unsigned chunk, unsigned word, uint8_t* out) {
    return guard([&] {
        need(idx, "index");
        need(out, "out");
        if (chunk >= idx->index.chunk_count()) fail(ErrorCode::out_of_range, "chunk out of range");
        const auto words = idx->index.chunk(chunk).plan().words();
        if (word >= words.size()) fail(ErrorCode::out_of_range, "plan word out of range");
        store_word(words[word], out);
    });
}

widx_status widx_index_corrupt_plan_word(widx_index* idx, unsigned chunk, unsigned word, const uint8_t* flip) {
    return guard([&] {
        need(idx, "index");
        idx->index.corrupt_plan_word(chunk, word, load_word(idx->index.width(), flip));
    });
}

} // extern "C"
