#include "wordidx/wordidx.h"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace {

using Bytes = std::vector<std::uint8_t>;

// n sorted distinct random keys, packed.
Bytes random_keys(widx_rng* rng, unsigned width, std::size_t n) {
    const std::size_t wb = width / 8;
    std::vector<Bytes> keys;
    while (keys.size() < n) {
        Bytes k(wb);
        REQUIRE(widx_rng_word(rng, width, k.data()) == WIDX_OK);
        keys.push_back(k);
        if (keys.size() == n) {
            std::sort(keys.begin(), keys.end());
            keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        }
    }
    Bytes packed;
    for (const auto& k : keys) packed.insert(packed.end(), k.begin(), k.end());
    return packed;
}

// 1-based rank of the first key >= x, or 0.
unsigned oracle_successor(const Bytes& keys, std::size_t wb, const std::uint8_t* x) {
    for (std::size_t i = 0; i * wb < keys.size(); ++i)
        if (std::memcmp(keys.data() + i * wb, x, wb) >= 0) return static_cast<unsigned>(i + 1);
    return 0;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / (std::string("widx_capi_") + name)).string();
}

} // namespace

TEST_CASE("status reporting") {
    widx_index* idx = nullptr;
    CHECK(widx_index_new(17, nullptr, 0, &idx) == WIDX_INVALID_ARGUMENT);
    CHECK(idx == nullptr);
    CHECK(std::string(widx_last_error()).find("width") != std::string::npos);

    const std::uint8_t unsorted[4] = {0x00, 0x05, 0x00, 0x02};
    CHECK(widx_index_new(16, unsorted, 2, &idx) == WIDX_UNSORTED_KEYS);
    CHECK(widx_keys_check(16, unsorted, 2) == WIDX_UNSORTED_KEYS);
    CHECK(std::string(widx_status_name(WIDX_PARSE_ERROR)) == "parse_error");

    std::uint8_t w[2];
    CHECK(widx_word_from_hex(16, "12g4", w) == WIDX_PARSE_ERROR);
    CHECK(widx_word_from_hex(16, "123", w) == WIDX_PARSE_ERROR);
    REQUIRE(widx_word_from_hex(16, "12f4", w) == WIDX_OK);
    CHECK(w[0] == 0x12);
    CHECK(w[1] == 0xf4);
    char hex[5];
    REQUIRE(widx_word_to_hex(16, w, hex, sizeof hex) == WIDX_OK);
    CHECK(std::string(hex) == "12f4");
    CHECK(widx_word_to_hex(16, w, hex, 4) == WIDX_OUT_OF_RANGE);

    CHECK(widx_chunk_size(256) == 32);
    CHECK(widx_width_supported(65536) == 1);
    CHECK(widx_width_supported(64) == 0);
}

TEST_CASE("rng is reproducible") {
    widx_rng *a, *b;
    REQUIRE(widx_rng_new(42, &a) == WIDX_OK);
    REQUIRE(widx_rng_new(42, &b) == WIDX_OK);
    for (int i = 0; i < 100; ++i) CHECK(widx_rng_next(a) == widx_rng_next(b));
    for (int i = 0; i < 100; ++i) CHECK(widx_rng_below(a, 7) < 7);
    widx_rng_free(a);
    widx_rng_free(b);
}

TEST_CASE("selector through the C interface") {
    // x = 1000 1101 1110 0011, I = <0, 15, 12, 15>.
    const unsigned idx[4] = {0, 15, 12, 15};
    widx_selector* sel;
    REQUIRE(widx_selector_new(16, idx, 4, &sel) == WIDX_OK);
    const std::uint8_t x[2] = {0x8d, 0xe3};
    std::uint8_t out[2];
    REQUIRE(widx_selector_select(sel, x, out) == WIDX_OK);
    CHECK(out[0] == 0xd0);
    CHECK(out[1] == 0x00);
    std::uint8_t phases[16], masks[16];
    REQUIRE(widx_selector_trace(sel, x, phases, masks) == WIDX_OK);
    CHECK(phases[14] == 0xd0);
    Bytes words(2 * widx_selector_word_count(sel));
    CHECK(widx_selector_words(sel, words.data()) == WIDX_OK);
    widx_selector_free(sel);

    const unsigned bad[1] = {16};
    CHECK(widx_selector_new(16, bad, 1, &sel) != WIDX_OK);
}

TEST_CASE("index, gamma and beta agree with a byte-order oracle") {
    widx_rng* rng;
    REQUIRE(widx_rng_new(7, &rng) == WIDX_OK);
    for (unsigned width : {16u, 256u}) {
        const std::size_t wb = width / 8;
        const Bytes keys = random_keys(rng, width, 700);
        const std::size_t n = keys.size() / wb;

        widx_index* idx;
        REQUIRE(widx_index_new(width, keys.data(), n, &idx) == WIDX_OK);
        CHECK(widx_index_size(idx) == n);
        widx_beta* beta;
        REQUIRE(widx_beta_new(width, keys.data(), n, 99, &beta) == WIDX_OK);
        const std::size_t chunk = widx_chunk_size(width);
        widx_gamma* g;
        REQUIRE(widx_gamma_new(width, keys.data(), chunk, &g) == WIDX_OK);
        const Bytes first_chunk(keys.begin(), keys.begin() + chunk * wb);

        Bytes x(wb), key(wb);
        for (int q = 0; q < 3000; ++q) {
            REQUIRE(widx_rng_word(rng, width, x.data()) == WIDX_OK);
            if (q % 2) std::memcpy(x.data(), keys.data() + widx_rng_below(rng, n) * wb, wb);
            const unsigned want = oracle_successor(keys, wb, x.data());

            int found;
            unsigned rank = 0;
            REQUIRE(widx_index_successor(idx, x.data(), &found, &rank, key.data()) == WIDX_OK);
            REQUIRE(found == (want != 0));
            if (found) {
                REQUIRE(rank == want);
                REQUIRE(std::memcmp(key.data(), keys.data() + (want - 1) * wb, wb) == 0);
            }

            unsigned beta_rank;
            int fallback;
            REQUIRE(widx_beta_rank(beta, x.data(), &beta_rank, &fallback, nullptr) == WIDX_OK);
            const unsigned preds = want == 0 ? static_cast<unsigned>(n)
                                   : std::memcmp(keys.data() + (want - 1) * wb, x.data(), wb) == 0 ? want
                                                                                                     : want - 1;
            REQUIRE(beta_rank == preds);

            const unsigned gwant = oracle_successor(first_chunk, wb, x.data());
            REQUIRE(widx_gamma_successor(g, x.data(), &found, &rank, nullptr) == WIDX_OK);
            REQUIRE(found == (gwant != 0));
            if (found) REQUIRE(rank == gwant);
        }

        int found;
        unsigned first, last;
        REQUIRE(widx_index_weak_prefix(idx, keys.data(), 0, &found, &first, &last) == WIDX_OK);
        CHECK(found == 1);
        CHECK(first == 1);
        CHECK(last == n);
        REQUIRE(widx_index_weak_prefix(idx, keys.data() + 5 * wb, width, &found, &first, &last) == WIDX_OK);
        CHECK(first == 6);
        CHECK(last == 6);
        CHECK(widx_index_weak_prefix(idx, keys.data(), width + 1, &found, &first, &last) == WIDX_INVALID_ARGUMENT);

        widx_gamma_free(g);
        widx_beta_free(beta);
        widx_index_free(idx);
    }
    widx_rng_free(rng);
}

TEST_CASE("save, load and word files") {
    widx_rng* rng;
    REQUIRE(widx_rng_new(8, &rng) == WIDX_OK);
    const Bytes keys = random_keys(rng, 256, 300);
    const std::size_t n = keys.size() / 32;
    widx_index* idx;
    REQUIRE(widx_index_new(256, keys.data(), n, &idx) == WIDX_OK);
    for (widx_format f : {WIDX_FORMAT_HEX, WIDX_FORMAT_BIN}) {
        const std::string path = temp_path(f == WIDX_FORMAT_HEX ? "index.txt" : "index.bin");
        REQUIRE(widx_index_save(idx, path.c_str(), f) == WIDX_OK);
        widx_index* back;
        REQUIRE(widx_index_load(path.c_str(), f, &back) == WIDX_OK);
        CHECK(widx_index_bits(back) == widx_index_bits(idx));
        Bytes k(32);
        REQUIRE(widx_index_key(back, n, k.data()) == WIDX_OK);
        CHECK(std::memcmp(k.data(), keys.data() + (n - 1) * 32, 32) == 0);
        CHECK(widx_index_key(back, n + 1, k.data()) == WIDX_OUT_OF_RANGE);
        widx_index_free(back);

        const std::string words = temp_path(f == WIDX_FORMAT_HEX ? "keys.txt" : "keys.bin");
        REQUIRE(widx_words_write(words.c_str(), 256, f, keys.data(), n) == WIDX_OK);
        std::uint8_t* read;
        std::size_t count;
        REQUIRE(widx_words_read(words.c_str(), 256, f, &read, &count) == WIDX_OK);
        CHECK(count == n);
        CHECK(std::memcmp(read, keys.data(), keys.size()) == 0);
        widx_buffer_free(read);
        std::remove(path.c_str());
        std::remove(words.c_str());
    }
    widx_index* none;
    CHECK(widx_index_load("/nonexistent/file", WIDX_FORMAT_HEX, &none) == WIDX_IO_ERROR);
    widx_index_free(idx);
    widx_rng_free(rng);
}

TEST_CASE("counters and fault injection") {
    widx_rng* rng;
    REQUIRE(widx_rng_new(9, &rng) == WIDX_OK);
    const Bytes keys = random_keys(rng, 256, 64);
    widx_index* idx;
    REQUIRE(widx_index_new(256, keys.data(), 64, &idx) == WIDX_OK);

    widx_counts_reset();
    int found;
    unsigned rank;
    REQUIRE(widx_index_successor(idx, keys.data() + 3 * 32, &found, &rank, nullptr) == WIDX_OK);
    widx_counts c;
    widx_counts_get(&c);
    CHECK(c.multiplications == 0);
    CHECK(c.key_probes >= 1);
    CHECK(c.key_probes <= 3);
    CHECK(c.index_probes > 0);

    Bytes mask(32);
    REQUIRE(widx_index_plan_word(idx, 0, 1, mask.data()) == WIDX_OK);
    REQUIRE(widx_index_corrupt_plan_word(idx, 0, 1, mask.data()) == WIDX_OK);
    unsigned wrong = 0;
    for (unsigned q = 0; q < 32; ++q) {
        REQUIRE(widx_index_successor(idx, keys.data() + q * 32, &found, &rank, nullptr) == WIDX_OK);
        wrong += !found || rank != q + 1;
    }
    CHECK(wrong > 0);
    CHECK(widx_index_corrupt_plan_word(idx, 5, 1, mask.data()) == WIDX_OUT_OF_RANGE);
    widx_index_free(idx);
    widx_rng_free(rng);
}
