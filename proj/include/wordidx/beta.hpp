#pragma once
// beta.hpp - randomized rank structure built from recursive 1/3-2/3 prefix
// partitions. Inner nodes keep only (|p|, h(p)); every answer is verified
// against the keys and falls back to binary search when a signature lied.

#include "wordidx/word.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace wordidx {

struct PrefixPartition {
    Word prefix;          // p left-aligned, zeros after
    unsigned length = 0;  // |p|
    unsigned inside = 0;  // |S with prefix p|
    unsigned outside = 0;
};

// Greedy majority-bit extension; set must hold at least two distinct keys.
PrefixPartition prefix_partition(std::span<const Word> set);

// Uncompressed tree with explicit prefixes; also the reference for BetaStructure.
struct PartitionTree {
    struct Node {
        bool leaf = false;
        Word prefix;
        unsigned length = 0;
        int left = -1, right = -1;    // children (inner nodes)
        std::vector<unsigned> ranks;  // 0-based ranks in the augmented set (leaves)
    };
    unsigned width = 0;
    bool virtual_zero = false;  // 0^w added because the input lacked it
    std::vector<Word> keys;     // augmented, sorted
    std::vector<Node> nodes;    // nodes[0] is the root

    unsigned height() const;
};

PartitionTree build_b_structure(std::span<const Word> sorted_keys);

// Number of input keys <= x (0 when x precedes them all).
unsigned b_structure_rank(const PartitionTree& tree, const Word& x);

// Multiply-add-shift hash of a left-aligned prefix and its length.
class PrefixHash {
public:
    PrefixHash() = default;
    PrefixHash(unsigned width, unsigned bits, std::uint64_t seed);
    unsigned bits() const noexcept { return bits_; }
    // masked must be zero past len; counts its multiplications.
    std::uint64_t operator()(const Word& masked, unsigned len) const;

private:
    unsigned bits_ = 0;
    std::vector<std::uint64_t> coef_;  // per 32-bit chunk, then length, then offset; two sets
};

struct BetaResult {
    unsigned rank = 0;  // number of input keys <= x
    bool fallback = false;
    unsigned depth = 0;  // inner nodes visited
};

class BetaStructure {
public:
    BetaStructure() = default;

    unsigned width() const noexcept { return width_; }
    unsigned size() const noexcept { return n_; }  // input keys
    unsigned height() const noexcept { return height_; }
    unsigned inner_nodes() const noexcept { return inner_; }
    std::uint64_t seed() const noexcept { return seed_; }
    // Encoded tree plus the hash seed.
    std::size_t index_bits() const noexcept { return bit_count_ + 64; }
    unsigned signature_bits() const noexcept { return hash_.bits(); }
    unsigned length_bits() const noexcept { return len_bits_; }

    // Flips one bit of the encoded tree (fault injection for the harness).
    void corrupt_bit(std::size_t pos);

private:
    friend BetaStructure build_beta(std::span<const Word> sorted_keys, std::uint64_t seed);
    friend BetaResult beta_rank(const BetaStructure& beta, const Word& x);

    unsigned width_ = 0;
    unsigned n_ = 0;
    bool virtual_zero_ = false;
    std::vector<Word> keys_;  // augmented, sorted
    PrefixHash hash_;
    std::uint64_t seed_ = 0;
    unsigned len_bits_ = 0, rank_bits_ = 0;
    unsigned height_ = 0, inner_ = 0;
    std::vector<std::uint64_t> bits_;
    std::size_t bit_count_ = 0;
};

BetaStructure build_beta(std::span<const Word> sorted_keys, std::uint64_t seed);

BetaResult beta_rank(const BetaStructure& beta, const Word& x);

} // namespace wordidx
