#pragma once
// benes.hpp - Benes-network routing of a permutation, applied in-word either to
// the leftmost b bits or to the w/log w blocks of log w bits each.

#include "wordidx/word.hpp"

#include <array>
#include <span>
#include <vector>

namespace wordidx {

// targets[i] is the destination of source i.
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<unsigned> targets);

    static Permutation identity(unsigned size);

    unsigned size() const noexcept { return static_cast<unsigned>(targets_.size()); }
    unsigned target(unsigned i) const { return targets_.at(i); }
    const std::vector<unsigned>& targets() const noexcept { return targets_; }

    Permutation inverse() const;
    // Extends with fixed points up to new_size.
    Permutation padded(unsigned new_size) const;

private:
    std::vector<unsigned> targets_;
};

enum class Granularity { bit, block };

struct BenesPlan {
    unsigned size = 0;  // b, a power of two
    Granularity granularity = Granularity::bit;
    unsigned width = 0;
    Word c1, c2;      // packed switch settings ("not straight")
    Word dir1, dir2;  // packed mate directions (1: mate has the larger index)

    // 2 log b - 1, or 0 for the trivial size-1 network.
    unsigned stages() const noexcept;
    // Bit granularity: number of stage columns packed into c1/dir1.
    unsigned stages_in_first_word() const noexcept;

    std::array<Word, 4> words() const { return {c1, c2, dir1, dir2}; }
    static BenesPlan from_words(unsigned width, unsigned size, Granularity g, std::span<const Word> words);

    // Decoded switch / direction bit for 1-based stage and input position.
    bool crossed(unsigned stage, unsigned pos) const;
    bool mate_below(unsigned stage, unsigned pos) const;
};

// Partner distance (in elements) at 1-based stage s of a size-b network.
unsigned benes_stage_distance(unsigned b, unsigned stage);

// Looping algorithm; cycles start at the smallest unrouted input, routed up.
BenesPlan build_benes_plan(const Permutation& perm, Granularity granularity, unsigned width);

Word apply_benes_bits(const BenesPlan& plan, const Word& x);

// 1 at the last position of every block; built by doubling in O(log w) ops.
Word block_tail_pattern(unsigned width);

// Spreads bit j (1-based) of every block over the whole block.
Word replicate_control(const Word& z, unsigned j);
Word replicate_control(const Word& z, unsigned j, const Word& tail_pattern);

Word apply_benes_blocks(const BenesPlan& plan, const Word& x);
Word apply_benes_blocks(const BenesPlan& plan, const Word& x, const Word& tail_pattern);

} // namespace wordidx
