#pragma once
// word.hpp - simulated w-bit word machine with per-thread instruction accounting.
//
// Bit 0 of a Word is its most significant (leftmost) bit. "Left shift" moves
// bits toward position 0, exactly like an unsigned integer shift toward the
// high end. Every arithmetic/boolean/shift/compare below is one counted
// instruction; inspection helpers (bit(), popcount(), operator==, hex I/O)
// are uncounted and meant for preprocessing, tests and serialization.

#include "wordidx/error.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace wordidx {

constexpr bool is_supported_width(unsigned w) noexcept {
    return w == 16 || w == 256 || w == 65536;
}

// log2(w) for a supported width; throws for anything else.
unsigned log2_width(unsigned w);

// w / log2(w): number of blocks per word, and the maximum selector length.
inline unsigned blocks_per_word(unsigned w) { return w / log2_width(w); }

// ============================================================
//  Instrumentation
// ============================================================

struct OpCounts {
    std::uint64_t shifts = 0;
    std::uint64_t boolean_ops = 0;
    std::uint64_t arith_ops = 0;
    std::uint64_t comparisons = 0;
    std::uint64_t multiplications = 0;
    std::uint64_t index_probes = 0;
    std::uint64_t key_probes = 0;

    // Register operations (everything except memory probes).
    std::uint64_t operations() const noexcept {
        return shifts + boolean_ops + arith_ops + comparisons + multiplications;
    }
    std::uint64_t probes() const noexcept { return index_probes + key_probes; }

    OpCounts& operator+=(const OpCounts& o) noexcept;
    OpCounts& operator-=(const OpCounts& o) noexcept;
    friend OpCounts operator+(OpCounts a, const OpCounts& b) noexcept { return a += b; }
    friend OpCounts operator-(OpCounts a, const OpCounts& b) noexcept { return a -= b; }
    friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

// Running totals for the calling thread.
OpCounts& live_counts() noexcept;

#ifdef WORDIDX_NO_INSTRUMENTATION
#define WORDIDX_COUNT(field, n) ((void)0)
#else
#define WORDIDX_COUNT(field, n) (::wordidx::live_counts().field += (n))
#endif

// Captures the counter deltas produced between construction and delta().
class CountScope {
public:
    CountScope() noexcept : start_(live_counts()) {}
    OpCounts delta() const noexcept { return live_counts() - start_; }

private:
    OpCounts start_;
};

template <class F>
OpCounts scoped_counts(F&& f) {
    CountScope scope;
    std::forward<F>(f)();
    return scope.delta();
}

// ============================================================
//  Word
// ============================================================

enum class BinaryOp { bit_and, bit_or, bit_xor, add, sub };
enum class ShiftDir { left, right };

class Word {
public:
    Word() noexcept = default;  // width 0: placeholder only, rejected by every op
    Word(const Word& o);
    Word(Word&& o) noexcept;
    Word& operator=(const Word& o);
    Word& operator=(Word&& o) noexcept;
    ~Word() = default;

    static Word zero(unsigned width);
    static Word ones(unsigned width);
    // Numeric value v in the low (rightmost) bits.
    static Word from_u64(unsigned width, std::uint64_t v);
    // Single 1 at MSB-first position pos.
    static Word single(unsigned width, unsigned pos);
    // First n bits set (positions 0..n-1).
    static Word leading_ones(unsigned width, unsigned n);

    // Exactly width/4 hex digits, most significant first.
    static Word from_hex(unsigned width, std::string_view hex);
    // '0'/'1' characters, whitespace and '_' ignored; must total width bits.
    static Word from_bits(unsigned width, std::string_view bits);
    // Big-endian bytes, width/8 of them.
    static Word from_bytes(unsigned width, std::span<const std::uint8_t> bytes);

    unsigned width() const noexcept { return width_; }
    bool valid() const noexcept { return width_ != 0; }

    bool bit(unsigned pos) const;
    unsigned popcount() const noexcept;
    bool none() const noexcept;
    // Numeric low 64 bits, i.e. the value of a field after it was shifted to
    // the right end of a register.
    std::uint64_t low_u64() const noexcept { return width_ ? data()[0] : 0; }

    std::string to_hex() const;
    // Bits MSB first, a space every `group` bits (0 for none).
    std::string to_bits(unsigned group = 4) const;
    void to_bytes(std::span<std::uint8_t> out) const;

    std::size_t limb_count() const noexcept { return limbs_for(width_); }
    // Numeric limbs, least significant first.
    std::span<const std::uint64_t> limbs() const noexcept { return {data(), limb_count()}; }

    friend bool operator==(const Word& a, const Word& b) noexcept;

private:
    friend class WordBuilder;
    friend Word word_binary(const Word&, const Word&, BinaryOp);
    friend Word word_shift(const Word&, unsigned, ShiftDir);
    friend Word operator~(const Word&);

    static constexpr std::size_t kInline = 4;
    static std::size_t limbs_for(unsigned width) noexcept { return (width + 63) / 64; }

    explicit Word(unsigned width);
    std::uint64_t* data() noexcept { return heap_ ? heap_.get() : inline_.data(); }
    const std::uint64_t* data() const noexcept { return heap_ ? heap_.get() : inline_.data(); }
    void mask_top() noexcept;

    unsigned width_ = 0;
    std::array<std::uint64_t, kInline> inline_{};
    std::unique_ptr<std::uint64_t[]> heap_;
};

// Mutable scratch used while preprocessing; produces an immutable Word.
class WordBuilder {
public:
    explicit WordBuilder(unsigned width);
    WordBuilder& set(unsigned pos, bool value = true);
    bool get(unsigned pos) const;
    // Writes `value`'s low `bits` bits MSB-first starting at pos.
    WordBuilder& put_field(unsigned pos, unsigned bits, std::uint64_t value);
    unsigned width() const noexcept { return word_.width(); }
    Word build() const { return word_; }

private:
    Word word_;
};

// Reads a bits-wide field starting at MSB-first position pos (uncounted).
std::uint64_t peek_field(const Word& w, unsigned pos, unsigned bits);

// ---- counted instructions ----

Word word_binary(const Word& a, const Word& b, BinaryOp op);
Word word_shift(const Word& a, unsigned amount, ShiftDir dir);

inline Word operator&(const Word& a, const Word& b) { return word_binary(a, b, BinaryOp::bit_and); }
inline Word operator|(const Word& a, const Word& b) { return word_binary(a, b, BinaryOp::bit_or); }
inline Word operator^(const Word& a, const Word& b) { return word_binary(a, b, BinaryOp::bit_xor); }
inline Word operator+(const Word& a, const Word& b) { return word_binary(a, b, BinaryOp::add); }
inline Word operator-(const Word& a, const Word& b) { return word_binary(a, b, BinaryOp::sub); }
inline Word operator<<(const Word& a, unsigned s) { return word_shift(a, s, ShiftDir::left); }
inline Word operator>>(const Word& a, unsigned s) { return word_shift(a, s, ShiftDir::right); }
Word operator~(const Word& a);

// Unsigned comparison, identical to lexicographic order of the bit strings.
bool word_less(const Word& a, const Word& b);
bool word_equal(const Word& a, const Word& b);
bool word_is_zero(const Word& a);

// Index of the first 1 bit (w if a is zero), by halving: O(log w) counted ops.
unsigned leading_zeros(const Word& a);

// Field [pos, pos+bits) moved to the right end: two counted shifts.
std::uint64_t extract_field(const Word& w, unsigned pos, unsigned bits);

} // namespace wordidx
