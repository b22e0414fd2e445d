#pragma once
// selector.hpp - (k,k) bit-selector: for a fixed index sequence I (k <= w/log w,
// repetitions allowed) a handful of precomputed words lets any query word x be
// turned into x[I] followed by zeros with O(log w) multiplication-free ops.
//
// Query phases:
//   0  keep only the selected bits
//   1  compact selected bits to the left of each block
//   2  sort blocks by descending occupancy (block Benes network)
//   3  spread the bits so each occupies the first bit of its own block
//   4  gather the first bits into positions 0..r-1
//   5  space distinct bits apart by their multiplicities (only with repeats)
//   6  duplicate repeated bits into the gaps (only with repeats)
//   7  final positioning (bit Benes network)

#include "wordidx/benes.hpp"
#include "wordidx/word.hpp"

#include <array>
#include <span>
#include <vector>

namespace wordidx {

struct SelectorPlan {
    unsigned width = 0;
    unsigned k = 0;  // length of I
    unsigned r = 0;  // distinct entries

    // Fields of log w bits each: k, r, max block occupancy, log2(b5)+1 (0 when
    // there are no repeats), log2(b7).
    Word header;
    Word mask;          // 1 exactly at positions present in I
    BenesPlan phase2;   // block granularity
    Word offsets;       // A_1..A_log w, log w bits each
    BenesPlan phase7;   // bit granularity, size b7
    BenesPlan phase5;   // bit granularity, size b5 (only with repeats)
    Word phase6_masks;  // log2(b5) masks of b5 bits each (only with repeats)

    bool has_repeats() const noexcept { return r < k; }
    unsigned word_count() const noexcept { return has_repeats() ? 16 : 11; }
    std::vector<Word> words() const;
    static SelectorPlan from_words(unsigned width, std::span<const Word> words);

    // Decoded prefix sums A_1..A_log w.
    std::vector<unsigned> offset_table() const;
    unsigned max_occupancy() const;
};

struct SelectorTrace {
    std::array<Word, 8> x;     // x after phases 0..7
    std::array<Word, 8> mask;  // the selection mask pushed through the same phases
};

SelectorPlan preprocess(std::span<const unsigned> indices, unsigned width);

Word select(const SelectorPlan& plan, const Word& x);
SelectorTrace select_traced(const SelectorPlan& plan, const Word& x);

} // namespace wordidx
