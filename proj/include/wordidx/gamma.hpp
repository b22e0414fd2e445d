#pragma once
// gamma.hpp - blind trie over at most w/log w sorted keys, and the constant-word
// node that searches it with a bit-selector and a binary search over leaves.

#include "wordidx/selector.hpp"
#include "wordidx/word.hpp"

#include <optional>
#include <span>
#include <vector>

namespace wordidx {

// Throws unless keys are strictly ascending and share one supported width.
void check_sorted_keys(std::span<const Word> keys);

struct BlindTrie {
    // Child references: >= 0 is an internal node index, < 0 is leaf rank -child.
    struct Node {
        unsigned bit;  // i_u: LCP length of the subtree's keys
        int left;
        int right;
    };
    struct Path {
        std::vector<unsigned> nodes;  // internal node indices, root first
        std::vector<unsigned> bits;   // I_q
        std::vector<bool> turns;      // zeta_q, 1 = right
    };

    unsigned width = 0;
    unsigned k = 0;
    int root = -1;  // a leaf when k == 1
    std::vector<Node> nodes;

    // Root-to-leaf path of the leaf with 1-based rank q.
    Path path(unsigned q) const;
};

BlindTrie build_blind_trie(std::span<const Word> keys);

// Rank reached by branching on x[i_u] at every node (no key comparisons).
unsigned blind_search_slow(const BlindTrie& trie, const Word& x);

struct FastSearch {
    unsigned rank = 0;
    unsigned iterations = 0;
};

class GammaNode {
public:
    GammaNode() = default;

    unsigned width() const noexcept { return width_; }
    unsigned size() const noexcept { return k_; }
    const SelectorPlan& plan() const noexcept { return plan_; }
    std::span<const Word> keys() const noexcept { return keys_; }

    // Stored words: header, j_L, j_R, segment ends, Z, then the selector plan.
    std::vector<Word> words() const;
    unsigned word_count() const noexcept { return 5 + plan_.word_count(); }
    std::size_t index_bits() const noexcept { return std::size_t(word_count()) * width_; }

    // keys must outlive the node.
    static GammaNode from_words(unsigned width, std::span<const Word> words, std::span<const Word> keys);

    // Decoded tables (uncounted), 1-based q.
    unsigned j_left(unsigned q) const;
    unsigned j_right(unsigned q) const;
    unsigned segment_end(unsigned q) const;
    unsigned path_bits() const;  // |I|

    // Counted read of key rank q.
    const Word& probe_key(unsigned q) const;

private:
    friend GammaNode build_gamma(std::span<const Word> keys);
    friend FastSearch blind_search_fast(const GammaNode& g, const Word& x);

    unsigned width_ = 0;
    unsigned k_ = 0;
    Word header_, jl_, jr_, ends_, z_;
    SelectorPlan plan_;
    std::span<const Word> keys_;
};

// keys must outlive the node.
GammaNode build_gamma(std::span<const Word> keys);

FastSearch blind_search_fast(const GammaNode& g, const Word& x);

struct Hit {
    unsigned rank;  // 1-based
    Word key;
};

// Smallest key >= x.
std::optional<Hit> gamma_successor(const GammaNode& g, const Word& x);

} // namespace wordidx
