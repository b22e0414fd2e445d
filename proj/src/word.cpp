#include "wordidx/word.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace wordidx {

unsigned log2_width(unsigned w) {
    switch (w) {
    case 16: return 4;
    case 256: return 8;
    case 65536: return 16;
    default: fail(ErrorCode::invalid_argument, "unsupported word width " + std::to_string(w));
    }
}

// ============================================================
//  OpCounts
// ============================================================

OpCounts& OpCounts::operator+=(const OpCounts& o) noexcept {
    shifts += o.shifts;
    boolean_ops += o.boolean_ops;
    arith_ops += o.arith_ops;
    comparisons += o.comparisons;
    multiplications += o.multiplications;
    index_probes += o.index_probes;
    key_probes += o.key_probes;
    return *this;
}

OpCounts& OpCounts::operator-=(const OpCounts& o) noexcept {
    shifts -= o.shifts;
    boolean_ops -= o.boolean_ops;
    arith_ops -= o.arith_ops;
    comparisons -= o.comparisons;
    multiplications -= o.multiplications;
    index_probes -= o.index_probes;
    key_probes -= o.key_probes;
    return *this;
}

OpCounts& live_counts() noexcept {
    static thread_local OpCounts counts;
    return counts;
}

// ============================================================
//  Word storage
// ============================================================

Word::Word(unsigned width) : width_(width) {
    if (!is_supported_width(width))
        fail(ErrorCode::invalid_argument, "unsupported word width " + std::to_string(width));
    if (limbs_for(width) > kInline)
        heap_ = std::make_unique<std::uint64_t[]>(limbs_for(width));
}

Word::Word(const Word& o) : width_(o.width_), inline_(o.inline_) {
    if (o.heap_) {
        heap_ = std::make_unique<std::uint64_t[]>(limb_count());
        std::memcpy(heap_.get(), o.heap_.get(), limb_count() * sizeof(std::uint64_t));
    }
}

Word::Word(Word&& o) noexcept
    : width_(o.width_), inline_(o.inline_), heap_(std::move(o.heap_)) {
    o.width_ = 0;
}

Word& Word::operator=(const Word& o) {
    if (this != &o) {
        Word tmp(o);
        *this = std::move(tmp);
    }
    return *this;
}

Word& Word::operator=(Word&& o) noexcept {
    if (this != &o) {
        width_ = o.width_;
        inline_ = o.inline_;
        heap_ = std::move(o.heap_);
        o.width_ = 0;
    }
    return *this;
}

void Word::mask_top() noexcept {
    if (width_ % 64 != 0)
        data()[0] &= (std::uint64_t{1} << width_) - 1;
}

Word Word::zero(unsigned width) { return Word(width); }

Word Word::ones(unsigned width) {
    Word w(width);
    std::fill_n(w.data(), w.limb_count(), ~std::uint64_t{0});
    w.mask_top();
    return w;
}

Word Word::from_u64(unsigned width, std::uint64_t v) {
    Word w(width);
    w.data()[0] = v;
    w.mask_top();
    return w;
}

Word Word::single(unsigned width, unsigned pos) {
    return WordBuilder(width).set(pos).build();
}

Word Word::leading_ones(unsigned width, unsigned n) {
    if (n > width) fail(ErrorCode::out_of_range, "leading_ones: n exceeds width");
    WordBuilder b(width);
    for (unsigned i = 0; i < n; ++i) b.set(i);
    return b.build();
}

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Word Word::from_hex(unsigned width, std::string_view hex) {
    Word w(width);
    if (hex.size() != width / 4)
        fail(ErrorCode::parse_error, "expected " + std::to_string(width / 4) + " hex digits, got " +
                                         std::to_string(hex.size()));
    std::uint64_t* d = w.data();
    for (std::size_t i = 0; i < hex.size(); ++i) {
        int v = hex_value(hex[i]);
        if (v < 0) fail(ErrorCode::parse_error, "invalid hex digit '" + std::string(1, hex[i]) + "'");
        std::size_t nibble = hex.size() - 1 - i;  // numeric nibble index
        d[nibble / 16] |= std::uint64_t(v) << (4 * (nibble % 16));
    }
    return w;
}

Word Word::from_bits(unsigned width, std::string_view bits) {
    WordBuilder b(width);
    unsigned pos = 0;
    for (char c : bits) {
        if (c == ' ' || c == '_' || c == '\t' || c == '\n') continue;
        if (c != '0' && c != '1') fail(ErrorCode::parse_error, "invalid bit character");
        if (pos >= width) fail(ErrorCode::parse_error, "too many bits");
        b.set(pos++, c == '1');
    }
    if (pos != width) fail(ErrorCode::parse_error, "too few bits");
    return b.build();
}

Word Word::from_bytes(unsigned width, std::span<const std::uint8_t> bytes) {
    Word w(width);
    if (bytes.size() != width / 8) fail(ErrorCode::parse_error, "wrong byte count for word");
    std::uint64_t* d = w.data();
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::size_t byte = bytes.size() - 1 - i;
        d[byte / 8] |= std::uint64_t(bytes[i]) << (8 * (byte % 8));
    }
    return w;
}

bool Word::bit(unsigned pos) const {
    if (pos >= width_) fail(ErrorCode::out_of_range, "bit position out of range");
    unsigned n = width_ - 1 - pos;
    return (data()[n / 64] >> (n % 64)) & 1;
}

unsigned Word::popcount() const noexcept {
    unsigned c = 0;
    for (auto l : limbs()) c += std::popcount(l);
    return c;
}

bool Word::none() const noexcept {
    for (auto l : limbs())
        if (l) return false;
    return true;
}

std::string Word::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(width_ / 4, '0');
    const std::uint64_t* d = data();
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t nibble = s.size() - 1 - i;
        s[i] = digits[(d[nibble / 16] >> (4 * (nibble % 16))) & 0xF];
    }
    return s;
}

std::string Word::to_bits(unsigned group) const {
    std::string s;
    s.reserve(width_ + (group ? width_ / group : 0));
    for (unsigned p = 0; p < width_; ++p) {
        if (group && p && p % group == 0) s.push_back(' ');
        s.push_back(bit(p) ? '1' : '0');
    }
    return s;
}

void Word::to_bytes(std::span<std::uint8_t> out) const {
    if (out.size() != width_ / 8) fail(ErrorCode::invalid_argument, "wrong byte count for word");
    const std::uint64_t* d = data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t byte = out.size() - 1 - i;
        out[i] = std::uint8_t(d[byte / 8] >> (8 * (byte % 8)));
    }
}

bool operator==(const Word& a, const Word& b) noexcept {
    if (a.width_ != b.width_) return false;
    return std::equal(a.data(), a.data() + a.limb_count(), b.data());
}

// ============================================================
//  WordBuilder
// ============================================================

WordBuilder::WordBuilder(unsigned width) : word_(Word::zero(width)) {}

WordBuilder& WordBuilder::set(unsigned pos, bool value) {
    if (pos >= word_.width_) fail(ErrorCode::out_of_range, "bit position out of range");
    unsigned n = word_.width_ - 1 - pos;
    std::uint64_t m = std::uint64_t{1} << (n % 64);
    if (value)
        word_.data()[n / 64] |= m;
    else
        word_.data()[n / 64] &= ~m;
    return *this;
}

bool WordBuilder::get(unsigned pos) const { return word_.bit(pos); }

WordBuilder& WordBuilder::put_field(unsigned pos, unsigned bits, std::uint64_t value) {
    if (bits > 64 || pos + bits > word_.width_) fail(ErrorCode::out_of_range, "field out of range");
    if (bits < 64 && (value >> bits) != 0) fail(ErrorCode::out_of_range, "value does not fit field");
    for (unsigned i = 0; i < bits; ++i) set(pos + i, (value >> (bits - 1 - i)) & 1);
    return *this;
}

std::uint64_t peek_field(const Word& w, unsigned pos, unsigned bits) {
    if (bits > 64 || pos + bits > w.width()) fail(ErrorCode::out_of_range, "field out of range");
    std::uint64_t v = 0;
    for (unsigned i = 0; i < bits; ++i) v = (v << 1) | (w.bit(pos + i) ? 1 : 0);
    return v;
}

// ============================================================
//  Counted instructions
// ============================================================

namespace {

void require_same_width(const Word& a, const Word& b) {
    if (!a.valid() || a.width() != b.width())
        fail(ErrorCode::width_mismatch, "word width mismatch (" + std::to_string(a.width()) + " vs " +
                                            std::to_string(b.width()) + ")");
}

void require_valid(const Word& a) {
    if (!a.valid()) fail(ErrorCode::width_mismatch, "operation on an unset word");
}

} // namespace

Word word_binary(const Word& a, const Word& b, BinaryOp op) {
    require_same_width(a, b);
    Word r(a.width());
    const std::size_t n = a.limb_count();
    const std::uint64_t* x = a.data();
    const std::uint64_t* y = b.data();
    std::uint64_t* z = r.data();
    switch (op) {
    case BinaryOp::bit_and:
        for (std::size_t i = 0; i < n; ++i) z[i] = x[i] & y[i];
        WORDIDX_COUNT(boolean_ops, 1);
        break;
    case BinaryOp::bit_or:
        for (std::size_t i = 0; i < n; ++i) z[i] = x[i] | y[i];
        WORDIDX_COUNT(boolean_ops, 1);
        break;
    case BinaryOp::bit_xor:
        for (std::size_t i = 0; i < n; ++i) z[i] = x[i] ^ y[i];
        WORDIDX_COUNT(boolean_ops, 1);
        break;
    case BinaryOp::add: {
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t s = x[i] + carry;
            std::uint64_t c1 = s < carry;
            z[i] = s + y[i];
            carry = c1 | (z[i] < s);
        }
        WORDIDX_COUNT(arith_ops, 1);
        break;
    }
    case BinaryOp::sub: {
        std::uint64_t borrow = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t d = x[i] - y[i];
            std::uint64_t b1 = x[i] < y[i];
            z[i] = d - borrow;
            borrow = b1 | (d < borrow);
        }
        WORDIDX_COUNT(arith_ops, 1);
        break;
    }
    }
    r.mask_top();
    return r;
}

Word word_shift(const Word& a, unsigned amount, ShiftDir dir) {
    require_valid(a);
    if (amount > a.width()) fail(ErrorCode::out_of_range, "shift amount exceeds word width");
    WORDIDX_COUNT(shifts, 1);
    Word r(a.width());
    if (amount == a.width()) return r;
    const std::size_t n = a.limb_count();
    const std::size_t ls = amount / 64;
    const unsigned bs = amount % 64;
    const std::uint64_t* x = a.data();
    std::uint64_t* z = r.data();
    if (dir == ShiftDir::left) {
        // numeric shift toward the most significant end
        for (std::size_t i = n; i-- > ls;) {
            std::uint64_t v = x[i - ls] << bs;
            if (bs && i - ls >= 1) v |= x[i - ls - 1] >> (64 - bs);
            z[i] = v;
        }
        r.mask_top();
    } else {
        for (std::size_t i = 0; i + ls < n; ++i) {
            std::uint64_t v = x[i + ls] >> bs;
            if (bs && i + ls + 1 < n) v |= x[i + ls + 1] << (64 - bs);
            z[i] = v;
        }
    }
    return r;
}

Word operator~(const Word& a) {
    require_valid(a);
    Word r(a.width());
    for (std::size_t i = 0; i < a.limb_count(); ++i) r.data()[i] = ~a.data()[i];
    r.mask_top();
    WORDIDX_COUNT(boolean_ops, 1);
    return r;
}

bool word_less(const Word& a, const Word& b) {
    require_same_width(a, b);
    WORDIDX_COUNT(comparisons, 1);
    auto x = a.limbs();
    auto y = b.limbs();
    for (std::size_t i = x.size(); i-- > 0;)
        if (x[i] != y[i]) return x[i] < y[i];
    return false;
}

bool word_equal(const Word& a, const Word& b) {
    require_same_width(a, b);
    WORDIDX_COUNT(comparisons, 1);
    return a == b;
}

bool word_is_zero(const Word& a) {
    require_valid(a);
    WORDIDX_COUNT(comparisons, 1);
    return a.none();
}

unsigned leading_zeros(const Word& a) {
    const unsigned w = a.width();
    if (word_is_zero(a)) return w;
    unsigned count = 0;
    Word v = a;
    for (unsigned half = w / 2; half >= 1; half /= 2) {
        if (word_is_zero(v >> (w - half))) {
            count += half;
            v = v << half;
        }
    }
    return count;
}

std::uint64_t extract_field(const Word& w, unsigned pos, unsigned bits) {
    if (bits == 0) return 0;
    if (bits > 64 || pos + bits > w.width()) fail(ErrorCode::out_of_range, "field out of range");
    return ((w << pos) >> (w.width() - bits)).low_u64();
}

} // namespace wordidx
