#pragma once
// Brute-force reference implementations used by the tests.

#include "wordidx/word.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <doctest.h>

#include <algorithm>
#include <optional>
#include <vector>

namespace doctest {
template <> struct StringMaker<wordidx::Word> {
    static String convert(const wordidx::Word& w) {
        return w.width() <= 256 ? String(w.to_hex().c_str()) : String("<wide word>");
    }
};
} // namespace doctest

namespace oracle {

using boost::multiprecision::cpp_int;
using wordidx::Word;

inline cpp_int to_int(const Word& w) {
    cpp_int v = 0;
    for (unsigned p = 0; p < w.width(); ++p) {
        v <<= 1;
        if (w.bit(p)) v |= 1;
    }
    return v;
}

inline Word from_int(unsigned width, cpp_int v) {
    const cpp_int modulus = cpp_int(1) << width;
    v %= modulus;
    if (v < 0) v += modulus;
    wordidx::WordBuilder b(width);
    for (unsigned p = 0; p < width; ++p)
        if (bit_test(v, width - 1 - p)) b.set(p);
    return b.build();
}

// Bit i of the result is x[perm^-1(i)] for i < perm.size(), untouched beyond.
inline Word shuffle_bits(const Word& x, const std::vector<unsigned>& targets) {
    wordidx::WordBuilder b(x.width());
    for (unsigned p = 0; p < x.width(); ++p) b.set(p, x.bit(p));
    for (unsigned i = 0; i < targets.size(); ++i) b.set(targets[i], x.bit(i));
    return b.build();
}

inline Word shuffle_blocks(const Word& x, const std::vector<unsigned>& targets) {
    const unsigned lw = wordidx::log2_width(x.width());
    wordidx::WordBuilder b(x.width());
    for (unsigned i = 0; i < targets.size(); ++i)
        for (unsigned t = 0; t < lw; ++t) b.set(targets[i] * lw + t, x.bit(i * lw + t));
    return b.build();
}

// x[I] followed by zeros.
inline Word select(const Word& x, const std::vector<unsigned>& idx) {
    wordidx::WordBuilder b(x.width());
    for (unsigned j = 0; j < idx.size(); ++j) b.set(j, x.bit(idx[j]));
    return b.build();
}

inline unsigned lcp(const Word& a, const Word& b) {
    unsigned p = 0;
    while (p < a.width() && a.bit(p) == b.bit(p)) ++p;
    return p;
}

// Numeric order via the raw limbs, most significant first.
inline bool less(const Word& a, const Word& b) {
    auto la = a.limbs(), lb = b.limbs();
    for (std::size_t i = la.size(); i-- > 0;)
        if (la[i] != lb[i]) return la[i] < lb[i];
    return false;
}

// Smallest key >= x as a 1-based rank.
inline std::optional<unsigned> successor(const std::vector<Word>& keys, const Word& x) {
    auto it = std::lower_bound(keys.begin(), keys.end(), x, [](const Word& a, const Word& b) { return less(a, b); });
    if (it == keys.end()) return std::nullopt;
    return static_cast<unsigned>(it - keys.begin()) + 1;
}

// Number of keys <= x (1-based predecessor rank, 0 when none).
inline unsigned predecessor_rank(const std::vector<Word>& keys, const Word& x) {
    auto it = std::upper_bound(keys.begin(), keys.end(), x, [](const Word& a, const Word& b) { return less(a, b); });
    return static_cast<unsigned>(it - keys.begin());
}

// Max LCP with x over all keys.
inline unsigned max_lcp(const std::vector<Word>& keys, const Word& x) {
    unsigned best = 0;
    for (const Word& k : keys) best = std::max(best, lcp(k, x));
    return best;
}

inline bool has_prefix(const Word& key, const std::vector<bool>& p) {
    for (unsigned i = 0; i < p.size(); ++i)
        if (key.bit(i) != p[i]) return false;
    return true;
}

} // namespace oracle
