#include "oracles.hpp"
#include "wordidx/gamma.hpp"
#include "wordidx/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <set>

using namespace wordidx;

namespace {

std::vector<Word> random_keys(Rng& rng, unsigned w, unsigned n) {
    std::vector<Word> keys;
    while (keys.size() < n) {
        Word x = random_word(rng, w);
        // Share long prefixes now and then so tries get deep.
        if (!keys.empty() && rng.coin()) {
            const Word& base = keys[rng.below(keys.size())];
            unsigned p = static_cast<unsigned>(rng.below(w));
            x = (base & (Word::ones(w) << (w - p))) | (x & (Word::ones(w) >> p));
        }
        keys.push_back(x);
        if (keys.size() == n) {
            std::sort(keys.begin(), keys.end(), oracle::less);
            keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        }
    }
    return keys;
}

// Queries near keys as well as uniform ones.
Word random_query(Rng& rng, const std::vector<Word>& keys) {
    const unsigned w = keys[0].width();
    Word x = random_word(rng, w);
    switch (rng.below(4)) {
    case 0: return x;
    case 1: return keys[rng.below(keys.size())];
    default: {
        const Word& base = keys[rng.below(keys.size())];
        unsigned p = static_cast<unsigned>(rng.below(w + 1));
        Word hi = p ? (Word::ones(w) << (w - p)) : Word::zero(w);
        return (base & hi) | (x & ~hi);
    }
    }
}

int lex_compare(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a == b) return 0;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()) ? -1 : 1;
}

} // namespace

TEST_CASE("key validation") {
    std::vector<Word> bad{Word::from_u64(16, 5), Word::from_u64(16, 3)};
    CHECK_THROWS_AS(build_blind_trie(bad), Error);
    std::vector<Word> dup{Word::from_u64(16, 5), Word::from_u64(16, 5)};
    CHECK_THROWS_AS(build_gamma(dup), Error);
    std::vector<Word> many;
    for (unsigned i = 0; i < 5; ++i) many.push_back(Word::from_u64(16, i));
    CHECK_THROWS_AS(build_gamma(many), Error);
}

TEST_CASE("small tries") {
    std::vector<Word> two{Word::from_hex(16, "0000"), Word::from_hex(16, "8000")};
    BlindTrie t = build_blind_trie(two);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].bit == 0);
    CHECK(t.nodes[0].left == -1);
    CHECK(t.nodes[0].right == -2);

    std::vector<Word> one{Word::from_hex(16, "1234")};
    BlindTrie s = build_blind_trie(one);
    CHECK(s.nodes.empty());
    CHECK(blind_search_slow(s, Word::from_hex(16, "ffff")) == 1);

    GammaNode g1 = build_gamma(one);
    CHECK(g1.path_bits() == 0);
    CHECK(g1.plan().k == 0);
    FastSearch f = blind_search_fast(g1, Word::from_hex(16, "0000"));
    CHECK(f.rank == 1);
    CHECK(f.iterations == 0);

    GammaNode g2 = build_gamma(two);
    CHECK(g2.path_bits() <= 2);
}

TEST_CASE("trie structure matches brute-force LCPs") {
    Rng rng(41);
    for (int t = 0; t < 300; ++t) {
        auto keys = random_keys(rng, 16, 1 + static_cast<unsigned>(rng.below(4)));
        BlindTrie trie = build_blind_trie(keys);
        REQUIRE(trie.nodes.size() == keys.size() - 1);
        for (unsigned q = 1; q <= keys.size(); ++q) {
            auto path = trie.path(q);
            for (unsigned i = 0; i < path.bits.size(); ++i) {
                REQUIRE(keys[q - 1].bit(path.bits[i]) == path.turns[i]);
                if (i) REQUIRE(path.bits[i - 1] < path.bits[i]);
            }
            REQUIRE(blind_search_slow(trie, keys[q - 1]) == q);
        }
        // i_u equals the LCP of the node's leftmost and rightmost keys.
        for (const auto& n : trie.nodes) {
            int a = n.left, b = n.right;
            while (a >= 0) a = trie.nodes[a].left;
            while (b >= 0) b = trie.nodes[b].right;
            REQUIRE(n.bit == oracle::lcp(keys[-a - 1], keys[-b - 1]));
        }
    }
}

TEST_CASE("blind search reaches a key of maximal common prefix") {
    Rng rng(42);
    for (unsigned w : {16u, 256u}) {
        for (int t = 0; t < 500; ++t) {
            auto keys = random_keys(rng, w, 1 + static_cast<unsigned>(rng.below(blocks_per_word(w))));
            BlindTrie trie = build_blind_trie(keys);
            for (int s = 0; s < 10; ++s) {
                Word x = random_query(rng, keys);
                unsigned r = blind_search_slow(trie, x);
                REQUIRE(oracle::lcp(keys[r - 1], x) == oracle::max_lcp(keys, x));
            }
        }
    }
}

TEST_CASE("search order of path strings matches key order") {
    Rng rng(43);
    for (int t = 0; t < 1000; ++t) {
        auto keys = random_keys(rng, 16, 1 + static_cast<unsigned>(rng.below(4)));
        BlindTrie trie = build_blind_trie(keys);
        for (int s = 0; s < 8; ++s) {
            Word x = random_query(rng, keys);
            const unsigned b = blind_search_slow(trie, x);
            for (unsigned q = 1; q <= keys.size(); ++q) {
                auto path = trie.path(q);
                std::vector<bool> xs;
                for (unsigned bit : path.bits) xs.push_back(x.bit(bit));
                const int c = lex_compare(path.turns, xs);
                const int want = q < b ? -1 : q == b ? 0 : 1;
                REQUIRE(c == want);
            }
        }
    }
}

TEST_CASE("fast search equals slow search and the successor oracle") {
    Rng rng(44);
    for (unsigned w : {16u, 256u, 65536u}) {
        const unsigned kmax = blocks_per_word(w);
        const int sets = w == 65536 ? 4 : 400;
        const int per_set = w == 65536 ? 25 : 30;
        for (int t = 0; t < sets; ++t) {
            const unsigned k = t % 2 ? kmax : 1 + static_cast<unsigned>(rng.below(kmax));
            auto keys = random_keys(rng, w, k);
            BlindTrie trie = build_blind_trie(keys);
            GammaNode g = build_gamma(keys);
            REQUIRE(g.word_count() <= 24);
            REQUIRE(g.index_bits() <= 24u * w);
            const unsigned max_iter = static_cast<unsigned>(std::bit_width(k - 1)) + 1;
            for (int s = 0; s < per_set; ++s) {
                Word x = random_query(rng, keys);
                FastSearch f;
                OpCounts c = scoped_counts([&] { f = blind_search_fast(g, x); });
                REQUIRE(f.rank == blind_search_slow(trie, x));
                REQUIRE(f.iterations <= max_iter);
                REQUIRE(c.multiplications == 0);

                std::optional<Hit> h;
                c = scoped_counts([&] { h = gamma_successor(g, x); });
                auto want = oracle::successor(keys, x);
                REQUIRE(h.has_value() == want.has_value());
                if (h) {
                    REQUIRE(h->rank == *want);
                    REQUIRE(h->key == keys[*want - 1]);
                }
                REQUIRE(c.key_probes <= 3);
                REQUIRE(c.multiplications == 0);
            }
            for (unsigned q = 1; q <= k; ++q) REQUIRE(blind_search_fast(g, keys[q - 1]).rank == q);
        }
    }
}

TEST_CASE("successor edge cases") {
    std::vector<Word> keys{Word::from_u64(16, 3), Word::from_u64(16, 100), Word::from_u64(16, 4000),
                           Word::from_u64(16, 60000)};
    GammaNode g = build_gamma(keys);
    auto h = gamma_successor(g, Word::from_u64(16, 3));
    REQUIRE(h);
    CHECK(h->rank == 1);
    CHECK_FALSE(gamma_successor(g, Word::from_u64(16, 60001)));
    CHECK(gamma_successor(g, Word::zero(16))->rank == 1);
    CHECK(gamma_successor(g, Word::from_u64(16, 101))->rank == 3);
    CHECK(gamma_successor(g, Word::from_u64(16, 60000))->rank == 4);
}

TEST_CASE("word round trip") {
    Rng rng(45);
    auto keys = random_keys(rng, 256, 32);
    GammaNode g = build_gamma(keys);
    auto words = g.words();
    REQUIRE(words.size() == g.word_count());
    GammaNode back = GammaNode::from_words(256, words, keys);
    for (int s = 0; s < 200; ++s) {
        Word x = random_query(rng, keys);
        REQUIRE(blind_search_fast(back, x).rank == blind_search_fast(g, x).rank);
    }
    CHECK_THROWS_AS(GammaNode::from_words(256, words, std::span<const Word>(keys).first(3)), Error);
}

TEST_CASE("corrupted tables never crash") {
    Rng rng(46);
    auto keys = random_keys(rng, 256, 32);
    GammaNode g = build_gamma(keys);
    auto words = g.words();
    for (unsigned i = 1; i < 5; ++i) {
        auto bad = words;
        bad[i] = bad[i] ^ random_word(rng, 256);
        GammaNode h = GammaNode::from_words(256, bad, keys);
        for (int s = 0; s < 50; ++s) {
            Word x = random_query(rng, keys);
            unsigned r = blind_search_fast(h, x).rank;
            CHECK((r >= 1 && r <= 32));
            (void)gamma_successor(h, x);
        }
    }
}
