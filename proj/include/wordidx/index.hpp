#pragma once
// index.hpp - successor / rank index over n keys: one gamma node per chunk of
// w/log w keys, chunk heads searched by plain binary search.

#include "wordidx/gamma.hpp"
#include "wordidx/word.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace wordidx {

enum class WordFormat { hex, bin };

struct RankRange {
    unsigned first;  // 1-based, inclusive
    unsigned last;
};

class SuccessorIndex {
public:
    SuccessorIndex() = default;
    SuccessorIndex(const SuccessorIndex&) = delete;
    SuccessorIndex& operator=(const SuccessorIndex&) = delete;
    SuccessorIndex(SuccessorIndex&&) noexcept = default;
    SuccessorIndex& operator=(SuccessorIndex&&) noexcept = default;

    // keys: strictly ascending, at least one.
    static SuccessorIndex build(std::vector<Word> keys);

    unsigned width() const noexcept { return width_; }
    unsigned size() const noexcept { return static_cast<unsigned>(keys_.size()); }
    unsigned chunk_size() const noexcept { return chunk_; }
    unsigned chunk_count() const noexcept { return static_cast<unsigned>(gammas_.size()); }
    const std::vector<Word>& keys() const noexcept { return keys_; }
    const GammaNode& chunk(unsigned c) const { return gammas_.at(c); }

    // Heads plus every gamma node's words; keys excluded.
    std::size_t index_bits() const noexcept;

    // Smallest key >= x with its 1-based rank.
    std::optional<Hit> successor(const Word& x) const;

    // Ranks of keys starting with the first len bits of p; empty when none do.
    std::optional<RankRange> weak_prefix(const Word& p, unsigned len) const;
    std::optional<RankRange> weak_prefix(const std::vector<bool>& p) const;

    void save(std::ostream& out, WordFormat format) const;
    static SuccessorIndex load(std::istream& in, WordFormat format);

    // XORs word `word` of chunk c's selector plan with flip (fault injection).
    void corrupt_plan_word(unsigned c, unsigned word, const Word& flip);

private:
    const Word& head(unsigned c) const;

    unsigned width_ = 0;
    unsigned chunk_ = 0;
    std::vector<Word> keys_;
    std::vector<Word> heads_;
    std::vector<GammaNode> gammas_;  // views into keys_
};

// Word list I/O shared by the index and the CLI: hex lines or raw big-endian words.
void write_words(std::ostream& out, std::span<const Word> words, WordFormat format);
std::vector<Word> read_words(std::istream& in, unsigned width, WordFormat format);

} // namespace wordidx
