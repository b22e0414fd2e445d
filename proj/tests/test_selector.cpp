#include "oracles.hpp"
#include "wordidx/rng.hpp"
#include "wordidx/selector.hpp"

#include <doctest.h>

using namespace wordidx;

namespace {

std::vector<unsigned> random_indices(Rng& rng, unsigned w, unsigned k) {
    std::vector<unsigned> idx(k);
    // Mix of wide-range draws and a small pool so repeats are common.
    const bool clustered = rng.coin();
    const unsigned pool = clustered ? std::max(1u, k / 2) : w;
    const unsigned base = static_cast<unsigned>(rng.below(w - pool + 1));
    for (auto& v : idx) v = base + static_cast<unsigned>(rng.below(pool));
    return idx;
}

Word bits16(const char* s) { return Word::from_bits(16, s); }

std::vector<unsigned> block_counts(const Word& m) {
    const unsigned lw = log2_width(m.width());
    std::vector<unsigned> c(m.width() / lw, 0);
    for (unsigned p = 0; p < m.width(); ++p)
        if (m.bit(p)) ++c[p / lw];
    return c;
}

} // namespace

TEST_CASE("worked example at w=16") {
    const std::vector<unsigned> idx{0, 15, 12, 15};
    SelectorPlan plan = preprocess(idx, 16);
    CHECK(plan.k == 4);
    CHECK(plan.r == 3);
    CHECK(plan.mask == bits16("1000 0000 0000 1001"));

    Word x = bits16("1000 1101 1110 0011");
    SelectorTrace t = select_traced(plan, x);
    const char* expect_x[8] = {"1000 0000 0000 0001", "1000 0000 0000 0100", "0100 1000 0000 0000",
                               "0000 1000 1000 0000", "0110 0000 0000 0000", "0110 0000 0000 0000",
                               "0111 0000 0000 0000", "1101 0000 0000 0000"};
    const char* expect_m[8] = {"1000 0000 0000 1001", "1000 0000 0000 1100", "1100 1000 0000 0000",
                               "1000 1000 1000 0000", "1110 0000 0000 0000", "1110 0000 0000 0000",
                               "1111 0000 0000 0000", "1111 0000 0000 0000"};
    for (unsigned ph = 0; ph < 8; ++ph) {
        CAPTURE(ph);
        CHECK(t.x[ph] == bits16(expect_x[ph]));
        CHECK(t.mask[ph] == bits16(expect_m[ph]));
    }
    CHECK(select(plan, x) == bits16("1101 0000 0000 0000"));

    OpCounts c = scoped_counts([&] { (void)select(plan, x); });
    CHECK(c.multiplications == 0);
    CHECK(c.key_probes == 0);
    CHECK(c.index_probes == plan.word_count());
}

TEST_CASE("trivial sequences") {
    Rng rng(31);
    for (unsigned w : {16u, 256u}) {
        const unsigned kmax = blocks_per_word(w);
        for (unsigned k = 1; k <= kmax; k *= 2) {
            std::vector<unsigned> idx(k);
            for (unsigned j = 0; j < k; ++j) idx[j] = j;
            SelectorPlan plan = preprocess(idx, w);
            Word x = random_word(rng, w);
            CHECK(select(plan, x) == (x & (Word::ones(w) << (w - k))));
        }
        for (int t = 0; t < 20; ++t) {
            unsigned j = static_cast<unsigned>(rng.below(w));
            std::vector<unsigned> one{j};
            SelectorPlan plan = preprocess(one, w);
            Word x = random_word(rng, w);
            CHECK(select(plan, x) == (x.bit(j) ? Word::single(w, 0) : Word::zero(w)));
        }
    }
    SelectorPlan empty = preprocess(std::vector<unsigned>{}, 16);
    CHECK(select(empty, Word::ones(16)).none());
}

TEST_CASE("identity prefix stays in place except while spread over blocks") {
    std::vector<unsigned> idx{0, 1, 2, 3};
    SelectorPlan plan = preprocess(idx, 16);
    Word x = bits16("1011 0110 0000 1111");
    SelectorTrace t = select_traced(plan, x);
    for (unsigned ph = 1; ph < 8; ++ph) {
        CAPTURE(ph);
        if (ph == 3)
            CHECK(t.x[3] == bits16("1000 0000 1000 1000"));
        else
            CHECK(t.x[ph] == t.x[0]);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(preprocess(std::vector<unsigned>{0, 1, 2, 3, 4}, 16), Error);
    CHECK_THROWS_AS(preprocess(std::vector<unsigned>{16}, 16), Error);
    SelectorPlan plan = preprocess(std::vector<unsigned>{1}, 16);
    CHECK_THROWS_AS(select(plan, Word::zero(256)), Error);
}

TEST_CASE("random sequences against the per-index oracle, with phase invariants") {
    Rng rng(32);
    for (unsigned w : {16u, 256u, 65536u}) {
        const unsigned lw = log2_width(w);
        const unsigned kmax = blocks_per_word(w);
        const int plans = w == 65536 ? 20 : 2000;
        const int per_plan = w == 65536 ? 5 : 5;
        for (int t = 0; t < plans; ++t) {
            const unsigned k = 1 + static_cast<unsigned>(rng.below(kmax));
            auto idx = random_indices(rng, w, k);
            SelectorPlan plan = preprocess(idx, w);
            REQUIRE(plan.mask.popcount() == plan.r);
            auto offs = plan.offset_table();
            for (unsigned i = 1; i < offs.size(); ++i) REQUIRE(offs[i - 1] <= offs[i]);
            REQUIRE(offs.back() == plan.r);
            REQUIRE(plan.word_count() <= 20);

            for (int s = 0; s < per_plan; ++s) {
                Word x = random_word(rng, w);
                SelectorTrace tr = select_traced(plan, x);
                REQUIRE(tr.x[7] == oracle::select(x, idx));
                REQUIRE(select(plan, x) == tr.x[7]);
            }

            SelectorTrace tr = select_traced(plan, Word::zero(w));
            // Phase 1: each block's selected bits are left-aligned, counts kept.
            auto c0 = block_counts(tr.mask[0]);
            REQUIRE(block_counts(tr.mask[1]) == c0);
            for (unsigned b = 0; b < c0.size(); ++b)
                for (unsigned o = 0; o < lw; ++o) REQUIRE(tr.mask[1].bit(b * lw + o) == (o < c0[b]));
            // Phase 2: occupancies non-increasing.
            auto c2 = block_counts(tr.mask[2]);
            for (unsigned b = 1; b < c2.size(); ++b) REQUIRE(c2[b - 1] >= c2[b]);
            // Phase 3: one bit at the start of each of the first r blocks.
            for (unsigned p = 0; p < w; ++p) REQUIRE(tr.mask[3].bit(p) == (p % lw == 0 && p / lw < plan.r));
            // Phase 4: positions 0..r-1.
            for (unsigned p = 0; p < w; ++p) REQUIRE(tr.mask[4].bit(p) == (p < plan.r));
            // Phase 6: positions 0..k-1.
            for (unsigned p = 0; p < w; ++p) REQUIRE(tr.mask[6].bit(p) == (p < plan.k));
        }
    }
}

TEST_CASE("plan words round trip") {
    Rng rng(33);
    for (unsigned w : {16u, 256u}) {
        for (int t = 0; t < 200; ++t) {
            const unsigned k = 1 + static_cast<unsigned>(rng.below(blocks_per_word(w)));
            auto idx = random_indices(rng, w, k);
            SelectorPlan plan = preprocess(idx, w);
            auto words = plan.words();
            REQUIRE(words.size() == plan.word_count());
            SelectorPlan back = SelectorPlan::from_words(w, words);
            Word x = random_word(rng, w);
            REQUIRE(select(back, x) == oracle::select(x, idx));
        }
    }
    auto words = preprocess(std::vector<unsigned>{0, 15, 12, 15}, 16).words();
    words.pop_back();
    CHECK_THROWS_AS(SelectorPlan::from_words(16, words), Error);
}

TEST_CASE("query cost is multiplication-free and logarithmic") {
    Rng rng(34);
    for (unsigned w : {16u, 256u, 65536u}) {
        const unsigned lw = log2_width(w);
        const unsigned k = blocks_per_word(w);
        for (int t = 0; t < (w == 65536 ? 3 : 50); ++t) {
            auto idx = random_indices(rng, w, k);
            SelectorPlan plan = preprocess(idx, w);
            Word x = random_word(rng, w);
            OpCounts c = scoped_counts([&] { (void)select(plan, x); });
            REQUIRE(c.multiplications == 0);
            REQUIRE(c.key_probes == 0);
            REQUIRE(c.operations() <= 100 * lw);
        }
    }
}
