#include "oracles.hpp"
#include "wordidx/beta.hpp"
#include "wordidx/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace wordidx;

namespace {

std::vector<Word> random_keys(Rng& rng, unsigned w, unsigned n, bool with_zero = false) {
    std::vector<Word> keys;
    if (with_zero) keys.push_back(Word::zero(w));
    while (keys.size() < n) {
        for (std::size_t i = keys.size(); i < n; ++i) {
            Word x = random_word(rng, w);
            if (!keys.empty() && rng.below(3) == 0) {
                const Word& base = keys[rng.below(keys.size())];
                unsigned p = static_cast<unsigned>(rng.below(w));
                x = (base & (Word::ones(w) << (w - p))) | (x & (Word::ones(w) >> p));
            }
            keys.push_back(x);
        }
        std::sort(keys.begin(), keys.end(), oracle::less);
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    }
    return keys;
}

Word near(Rng& rng, const std::vector<Word>& keys) {
    const unsigned w = keys[0].width();
    Word x = random_word(rng, w);
    switch (rng.below(4)) {
    case 0: return x;
    case 1: return keys[rng.below(keys.size())];
    case 2: return keys[rng.below(keys.size())] - Word::from_u64(w, 1);
    default: return keys[rng.below(keys.size())] + Word::from_u64(w, 1);
    }
}

unsigned prefix_count(const std::vector<Word>& set, const PrefixPartition& p) {
    unsigned c = 0;
    for (const Word& k : set) {
        bool in = true;
        for (unsigned i = 0; i < p.length && in; ++i) in = k.bit(i) == p.prefix.bit(i);
        c += in;
    }
    return c;
}

} // namespace

TEST_CASE("prefix partition on small sets") {
    std::vector<Word> two{Word::zero(16), Word::single(16, 0)};
    PrefixPartition p = prefix_partition(two);
    CHECK(p.inside == 1);
    CHECK(p.outside == 1);

    std::vector<Word> groups;
    for (unsigned top = 0; top < 4; ++top)
        for (unsigned low = 0; low < 3; ++low) groups.push_back(Word::from_u64(16, (top << 14) | low));
    PrefixPartition g = prefix_partition(groups);
    CHECK(g.length <= 2);
    CHECK(g.inside >= 4);
    CHECK(g.inside <= 8);

    CHECK_THROWS_AS(prefix_partition(std::vector<Word>{Word::zero(16)}), Error);
}

TEST_CASE("prefix partition bounds on random sets") {
    Rng rng(51);
    for (int t = 0; t < 10000; ++t) {
        const unsigned w = t % 2 ? 256 : 16;
        const unsigned n = 2 + static_cast<unsigned>(rng.below(w == 16 ? 60 : 199));
        auto set = random_keys(rng, w, n);
        // Unsorted input is fine.
        for (unsigned i = n; i > 1; --i) std::swap(set[i - 1], set[rng.below(i)]);
        PrefixPartition p = prefix_partition(set);
        REQUIRE(p.inside + p.outside == n);
        REQUIRE(prefix_count(set, p) == p.inside);
        REQUIRE(3 * p.inside >= n);
        REQUIRE(3 * p.inside <= 2 * n);
        REQUIRE(3 * p.outside >= n);
        REQUIRE(3 * p.outside <= 2 * n);
    }
}

TEST_CASE("explicit tree shape") {
    Rng rng(52);
    auto three = random_keys(rng, 16, 3, true);
    PartitionTree t3 = build_b_structure(three);
    CHECK(t3.nodes.size() == 1);
    CHECK(t3.nodes[0].leaf);
    CHECK(t3.nodes[0].ranks.size() == 3);

    auto four = random_keys(rng, 16, 4, true);
    PartitionTree t4 = build_b_structure(four);
    REQUIRE(t4.nodes.size() == 3);
    CHECK(t4.nodes[t4.nodes[0].left].leaf);
    CHECK(t4.nodes[t4.nodes[0].right].leaf);
    CHECK(3 * t4.nodes[t4.nodes[0].left].ranks.size() <= 2 * 4 + 3);
    CHECK(3 * t4.nodes[t4.nodes[0].right].ranks.size() <= 2 * 4 + 3);

    const unsigned bound = static_cast<unsigned>(std::ceil(std::log(256.0) / std::log(1.5))) + 2;
    for (int t = 0; t < 1000; ++t) {
        auto keys = random_keys(rng, 256, 256);
        REQUIRE(build_b_structure(keys).height() <= bound);
    }
}

TEST_CASE("explicit tree answers predecessor ranks") {
    Rng rng(53);
    for (unsigned w : {16u, 256u}) {
        for (int t = 0; t < 200; ++t) {
            const unsigned n = 1 + static_cast<unsigned>(rng.below(w == 16 ? 40 : 300));
            auto keys = random_keys(rng, w, n, t % 3 == 0);
            PartitionTree tree = build_b_structure(keys);
            CHECK(tree.virtual_zero == !keys[0].none());
            for (int s = 0; s < 50; ++s) {
                Word x = near(rng, keys);
                REQUIRE(b_structure_rank(tree, x) == oracle::predecessor_rank(keys, x));
            }
            for (unsigned q = 0; q < keys.size(); ++q) REQUIRE(b_structure_rank(tree, keys[q]) == q + 1);
        }
    }
}

TEST_CASE("hashed structure is always correct and rarely falls back") {
    Rng rng(54);
    const unsigned n = 1024;
    for (unsigned w : {16u, 256u}) {
        if (w == 16) {
            // Only 2^16 keys exist; use a dense set.
            auto keys = random_keys(rng, w, n);
            BetaStructure b = build_beta(keys, 7);
            unsigned fallbacks = 0;
            for (int s = 0; s < 20000; ++s) {
                Word x = near(rng, keys);
                BetaResult r = beta_rank(b, x);
                REQUIRE(r.rank == oracle::predecessor_rank(keys, x));
                fallbacks += r.fallback;
            }
            CHECK(fallbacks <= 5 * 20000 / n);
            continue;
        }
        auto keys = random_keys(rng, w, n);
        BetaStructure b = build_beta(keys, 8);
        CHECK(b.size() == n);
        CHECK(b.signature_bits() == 2 * 11);
        unsigned fallbacks = 0;
        const int queries = 100000;
        for (int s = 0; s < queries; ++s) {
            Word x = near(rng, keys);
            BetaResult r;
            OpCounts c = scoped_counts([&] { r = beta_rank(b, x); });
            REQUIRE(r.rank == oracle::predecessor_rank(keys, x));
            REQUIRE(r.depth <= b.height());
            if (!r.fallback) REQUIRE(c.key_probes <= 4);
            fallbacks += r.fallback;
        }
        CHECK(double(fallbacks) / queries <= 5.0 / n);
    }
}

TEST_CASE("exact keys, below-minimum queries and the zero key") {
    Rng rng(55);
    auto keys = random_keys(rng, 256, 300);
    BetaStructure b = build_beta(keys, 1);
    for (unsigned q = 0; q < keys.size(); ++q) REQUIRE(beta_rank(b, keys[q]).rank == q + 1);
    CHECK(beta_rank(b, Word::zero(256)).rank == (keys[0].none() ? 1u : 0u));

    auto with_zero = random_keys(rng, 256, 100, true);
    BetaStructure z = build_beta(with_zero, 2);
    CHECK(beta_rank(z, Word::zero(256)).rank == 1);
    CHECK(beta_rank(z, Word::ones(256)).rank == 100);

    std::vector<Word> single{Word::from_u64(16, 9)};
    BetaStructure s = build_beta(single, 3);
    CHECK(beta_rank(s, Word::from_u64(16, 8)).rank == 0);
    CHECK(beta_rank(s, Word::from_u64(16, 9)).rank == 1);
}

TEST_CASE("corrupted encodings still answer correctly") {
    Rng rng(56);
    auto keys = random_keys(rng, 256, 500);
    BetaStructure b = build_beta(keys, 4);
    for (int f = 0; f < 40; ++f) {
        BetaStructure bad = b;
        bad.corrupt_bit(rng.below(b.index_bits() - 64));
        for (int s = 0; s < 100; ++s) {
            Word x = near(rng, keys);
            REQUIRE(beta_rank(bad, x).rank == oracle::predecessor_rank(keys, x));
        }
    }
}

TEST_CASE("space") {
    Rng rng(57);
    for (unsigned w : {16u, 256u}) {
        for (unsigned n : {100u, 1000u, 5000u}) {
            if (w == 16 && n > 4000) continue;
            auto keys = random_keys(rng, w, n);
            BetaStructure b = build_beta(keys, 5);
            const double per = double(b.index_bits()) / (n * (std::log2(double(w)) + std::log2(double(n))));
            MESSAGE("w=" << w << " n=" << n << " bits/(n(log w + log n))=" << per);
            CHECK(per <= 4.0);
        }
    }
}
