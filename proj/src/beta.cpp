#include "wordidx/beta.hpp"

#include "wordidx/gamma.hpp"
#include "wordidx/rng.hpp"

#include <algorithm>
#include <bit>
#include <functional>

namespace wordidx {

namespace {

bool limb_less(const Word& a, const Word& b) {
    auto la = a.limbs(), lb = b.limbs();
    for (std::size_t i = la.size(); i-- > 0;)
        if (la[i] != lb[i]) return la[i] < lb[i];
    return false;
}

unsigned ceil_log2(unsigned v) { return v <= 1 ? 0 : static_cast<unsigned>(std::bit_width(v - 1)); }

Word prefix_of(const Word& key, unsigned len) {
    WordBuilder b(key.width());
    for (unsigned p = 0; p < len; ++p) b.set(p, key.bit(p));
    return b.build();
}

struct Range {
    unsigned length;
    unsigned lo, hi;  // [lo, hi) within the subset
};

// subset: sorted indices into keys, size >= 2.
Range partition_range(const std::vector<Word>& keys, const std::vector<unsigned>& subset) {
    const unsigned n = static_cast<unsigned>(subset.size());
    const unsigned w = keys[0].width();
    Range r{0, 0, n};
    while (3 * (r.hi - r.lo) > 2 * n && r.length < w) {
        // Keys in the range share the first r.length bits, so bit r.length is
        // monotone over it.
        unsigned a = r.lo, b = r.hi;
        while (a < b) {
            unsigned mid = (a + b) / 2;
            if (keys[subset[mid]].bit(r.length))
                b = mid;
            else
                a = mid + 1;
        }
        const unsigned zeros = a - r.lo, ones = r.hi - a;
        if (zeros >= ones)
            r.hi = a;
        else
            r.lo = a;
        ++r.length;
    }
    return r;
}

int build_node(const std::vector<Word>& keys, std::vector<unsigned> subset, std::vector<PartitionTree::Node>& nodes) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (subset.size() <= 3) {
        nodes[id].leaf = true;
        nodes[id].ranks = std::move(subset);
        return id;
    }
    Range r = partition_range(keys, subset);
    nodes[id].length = r.length;
    nodes[id].prefix = prefix_of(keys[subset[r.lo]], r.length);

    std::vector<unsigned> right(subset.begin() + r.lo, subset.begin() + r.hi);
    if (r.lo > 0) right.insert(right.begin(), subset[r.lo - 1]);
    std::vector<unsigned> left(subset.begin(), subset.begin() + r.lo);
    left.push_back(subset[r.hi - 1]);
    left.insert(left.end(), subset.begin() + r.hi, subset.end());

    int l = build_node(keys, std::move(left), nodes);
    int rt = build_node(keys, std::move(right), nodes);
    nodes[id].left = l;
    nodes[id].right = rt;
    return id;
}

} // namespace

// ============================================================
//  Prefix partition and the explicit tree
// ============================================================

PrefixPartition prefix_partition(std::span<const Word> set) {
    if (set.size() < 2) fail(ErrorCode::invalid_argument, "prefix partition needs at least two keys");
    std::vector<Word> keys(set.begin(), set.end());
    std::sort(keys.begin(), keys.end(), limb_less);
    check_sorted_keys(keys);
    std::vector<unsigned> all(keys.size());
    for (unsigned i = 0; i < all.size(); ++i) all[i] = i;
    Range r = partition_range(keys, all);
    PrefixPartition p;
    p.length = r.length;
    p.prefix = prefix_of(keys[r.lo], r.length);
    p.inside = r.hi - r.lo;
    p.outside = static_cast<unsigned>(keys.size()) - p.inside;
    return p;
}

unsigned PartitionTree::height() const {
    std::function<unsigned(int)> h = [&](int id) -> unsigned {
        const Node& n = nodes[id];
        return n.leaf ? 0 : 1 + std::max(h(n.left), h(n.right));
    };
    return nodes.empty() ? 0 : h(0);
}

PartitionTree build_b_structure(std::span<const Word> sorted_keys) {
    if (sorted_keys.empty()) fail(ErrorCode::invalid_argument, "rank structure needs at least one key");
    check_sorted_keys(sorted_keys);
    PartitionTree t;
    t.width = sorted_keys[0].width();
    t.virtual_zero = !sorted_keys[0].none();
    if (t.virtual_zero) t.keys.push_back(Word::zero(t.width));
    t.keys.insert(t.keys.end(), sorted_keys.begin(), sorted_keys.end());
    std::vector<unsigned> all(t.keys.size());
    for (unsigned i = 0; i < all.size(); ++i) all[i] = i;
    build_node(t.keys, std::move(all), t.nodes);
    return t;
}

unsigned b_structure_rank(const PartitionTree& tree, const Word& x) {
    int id = 0;
    while (!tree.nodes[id].leaf) {
        const auto& n = tree.nodes[id];
        Word head = n.length ? (x & (Word::ones(tree.width) << (tree.width - n.length))) : Word::zero(tree.width);
        id = word_equal(head, n.prefix) ? n.right : n.left;
    }
    // The augmented set starts with 0^w, so some leaf key is <= x.
    int best = -1;
    for (unsigned r : tree.nodes[id].ranks) {
        WORDIDX_COUNT(key_probes, 1);
        if (!word_less(x, tree.keys[r])) best = std::max(best, static_cast<int>(r));
    }
    if (best < 0) fail(ErrorCode::internal, "no leaf key precedes the query");
    return static_cast<unsigned>(best) + 1 - (tree.virtual_zero ? 1 : 0);
}

// ============================================================
//  Hashing
// ============================================================

PrefixHash::PrefixHash(unsigned width, unsigned bits, std::uint64_t seed) : bits_(bits) {
    if (bits == 0 || bits > 64) fail(ErrorCode::invalid_argument, "signature width must be 1..64");
    const unsigned chunks = std::max(1u, width / 32);
    const unsigned sets = bits > 32 ? 2 : 1;
    Rng rng(seed);
    coef_.resize(std::size_t(sets) * (chunks + 2));
    for (auto& c : coef_) c = rng();
}

std::uint64_t PrefixHash::operator()(const Word& masked, unsigned len) const {
    const unsigned w = masked.width();
    const unsigned chunks = std::max(1u, w / 32);
    const unsigned used = std::min(chunks, (len + 31) / 32);
    const unsigned sets = bits_ > 32 ? 2 : 1;
    auto limbs = masked.limbs();
    auto chunk = [&](unsigned c) -> std::uint64_t {
        if (w < 32) return limbs[0];
        const unsigned low = w - 32 * c - 32;  // numeric position of the chunk's last bit
        return (limbs[low / 64] >> (low % 64)) & 0xffffffffULL;
    };
    std::uint64_t out = 0;
    for (unsigned s = 0; s < sets; ++s) {
        const std::uint64_t* a = coef_.data() + std::size_t(s) * (chunks + 2);
        std::uint64_t acc = a[chunks + 1] + a[chunks] * len;
        for (unsigned c = 0; c < used; ++c) acc += a[c] * chunk(c);
        WORDIDX_COUNT(multiplications, used + 1);
        WORDIDX_COUNT(arith_ops, used + 1);
        const unsigned take = s == 0 ? std::min(bits_, 32u) : bits_ - 32;
        out = (out << take) | (acc >> (64 - take));
    }
    return out;
}

// ============================================================
//  Encoded structure
// ============================================================

namespace {

class BitWriter {
public:
    void put(std::uint64_t v, unsigned bits) {
        for (unsigned i = bits; i-- > 0;) {
            if (size_ % 64 == 0) data_.push_back(0);
            if ((v >> i) & 1) data_.back() |= 1ULL << (63 - size_ % 64);
            ++size_;
        }
    }
    std::size_t size() const noexcept { return size_; }
    std::vector<std::uint64_t> take() { return std::move(data_); }

private:
    std::vector<std::uint64_t> data_;
    std::size_t size_ = 0;
};

unsigned gap_bits(unsigned gap) { return 2 * static_cast<unsigned>(std::bit_width(gap)) - 1; }

std::uint64_t read_bits(const std::vector<std::uint64_t>& data, std::size_t pos, unsigned bits) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < bits; ++i, ++pos) v = (v << 1) | ((data[pos / 64] >> (63 - pos % 64)) & 1);
    return v;
}

} // namespace

BetaStructure build_beta(std::span<const Word> sorted_keys, std::uint64_t seed) {
    PartitionTree tree = build_b_structure(sorted_keys);
    const unsigned w = tree.width;
    const unsigned total = static_cast<unsigned>(tree.keys.size());

    BetaStructure b;
    b.width_ = w;
    b.n_ = static_cast<unsigned>(sorted_keys.size());
    b.virtual_zero_ = tree.virtual_zero;
    b.keys_ = tree.keys;
    b.seed_ = seed;
    b.hash_ = PrefixHash(w, std::max(2u, 2 * ceil_log2(total)), seed);
    b.len_bits_ = ceil_log2(w);
    b.rank_bits_ = std::max(1u, ceil_log2(total));
    b.height_ = tree.height();
    for (const auto& n : tree.nodes) b.inner_ += n.leaf ? 0 : 1;

    const unsigned sig_bits = b.hash_.bits();
    // The offset to the right child is stored in bit_width(subtree size) bits;
    // the reader knows each subtree's size from its parent.
    std::vector<std::size_t> size(tree.nodes.size());
    std::function<std::size_t(int)> measure = [&](int id) -> std::size_t {
        const auto& n = tree.nodes[id];
        if (n.leaf) {
            std::size_t bits = 1 + 2 + b.rank_bits_;
            for (std::size_t i = 1; i < n.ranks.size(); ++i) bits += gap_bits(n.ranks[i] - n.ranks[i - 1]);
            return size[id] = bits;
        }
        const std::size_t base = 1 + b.len_bits_ + sig_bits + measure(n.left) + measure(n.right);
        std::size_t f = std::bit_width(base);
        while (std::bit_width(base + f) > f) ++f;
        return size[id] = base + f;
    };
    measure(0);

    BitWriter out;
    std::function<void(int)> emit = [&](int id) {
        const auto& n = tree.nodes[id];
        if (n.leaf) {
            out.put(0, 1);
            out.put(n.ranks.size() - 1, 2);
            // First rank in full, then Elias-gamma coded gaps.
            out.put(n.ranks[0], b.rank_bits_);
            for (std::size_t i = 1; i < n.ranks.size(); ++i) {
                const unsigned gap = n.ranks[i] - n.ranks[i - 1];
                const unsigned width = static_cast<unsigned>(std::bit_width(gap));
                out.put(0, width - 1);
                out.put(gap, width);
            }
            return;
        }
        out.put(1, 1);
        out.put(n.length - 1, b.len_bits_);
        out.put(b.hash_(n.prefix, n.length), sig_bits);
        out.put(size[n.left], static_cast<unsigned>(std::bit_width(size[id])));
        emit(n.left);
        emit(n.right);
    };
    OpCounts saved = live_counts();
    emit(0);
    live_counts() = saved;
    b.bit_count_ = out.size();
    b.bits_ = out.take();
    return b;
}

void BetaStructure::corrupt_bit(std::size_t pos) {
    if (pos >= bit_count_) fail(ErrorCode::out_of_range, "corrupt_bit position out of range");
    bits_[pos / 64] ^= 1ULL << (63 - pos % 64);
}

BetaResult beta_rank(const BetaStructure& beta, const Word& x) {
    if (x.width() != beta.width_) fail(ErrorCode::width_mismatch, "query width does not match rank structure");
    const unsigned w = beta.width_;
    const unsigned total = static_cast<unsigned>(beta.keys_.size());
    const unsigned sig_bits = beta.hash_.bits();
    auto touch = [&](std::size_t from, std::size_t to) {
        WORDIDX_COUNT(index_probes, (to - 1) / w - from / w + 1);
    };
    auto key = [&](unsigned r) -> const Word& {
        WORDIDX_COUNT(key_probes, 1);
        return beta.keys_[r];
    };

    BetaResult res;
    std::size_t pos = 0, span = beta.bit_count_;
    int best = -1;
    bool ok = beta.bit_count_ > 0;
    while (ok) {
        if (span < 3) {
            ok = false;
            break;
        }
        if (read_bits(beta.bits_, pos, 1) == 0) {
            const unsigned cnt = static_cast<unsigned>(read_bits(beta.bits_, pos + 1, 2)) + 1;
            const std::size_t end = pos + span;
            std::size_t at = pos + 3;
            if (at + beta.rank_bits_ > end) {
                ok = false;
                break;
            }
            unsigned r = static_cast<unsigned>(read_bits(beta.bits_, at, beta.rank_bits_));
            at += beta.rank_bits_;
            for (unsigned i = 0; i < cnt && ok; ++i) {
                if (i > 0) {
                    unsigned zeros = 0;
                    while (at < end && zeros <= beta.rank_bits_ && read_bits(beta.bits_, at, 1) == 0) ++zeros, ++at;
                    if (zeros > beta.rank_bits_ || at + zeros + 1 > end) {
                        ok = false;
                        break;
                    }
                    r += static_cast<unsigned>(read_bits(beta.bits_, at, zeros + 1));
                    at += zeros + 1;
                }
                if (r >= total) break;
                if (!word_less(x, key(r))) best = std::max(best, static_cast<int>(r));
            }
            touch(pos, at);
            break;
        }
        const unsigned off_bits = static_cast<unsigned>(std::bit_width(span));
        const std::size_t hdr = pos + 1 + beta.len_bits_ + sig_bits + off_bits;
        if (hdr > pos + span || res.depth > total) {
            ok = false;
            break;
        }
        touch(pos, hdr);
        const unsigned len = static_cast<unsigned>(read_bits(beta.bits_, pos + 1, beta.len_bits_)) + 1;
        const std::uint64_t sig = read_bits(beta.bits_, pos + 1 + beta.len_bits_, sig_bits);
        const std::size_t off = read_bits(beta.bits_, pos + 1 + beta.len_bits_ + sig_bits, off_bits);
        const std::size_t rest = pos + span - hdr;
        if (len > w || off > rest) {
            ok = false;
            break;
        }
        const Word masked = x & (Word::ones(w) << (w - len));
        WORDIDX_COUNT(comparisons, 1);
        if (beta.hash_(masked, len) == sig) {
            pos = hdr + off;
            span = rest - off;
        } else {
            pos = hdr;
            span = off;
        }
        ++res.depth;
    }

    // Verify s_r <= x < s_{r+1}.
    if (ok && best >= 0) {
        const unsigned r = static_cast<unsigned>(best);
        ok = r + 1 == total || word_less(x, key(r + 1));
    } else {
        ok = false;
    }
    if (!ok) {
        res.fallback = true;
        unsigned lo = 0, hi = total;  // first index with key > x
        while (lo < hi) {
            unsigned mid = (lo + hi) / 2;
            if (word_less(x, key(mid)))
                hi = mid;
            else
                lo = mid + 1;
        }
        best = static_cast<int>(lo) - 1;
    }
    // best >= 0 whenever the sentinel is real or x >= 0^w, i.e. always.
    res.rank = static_cast<unsigned>(best + 1) - (beta.virtual_zero_ ? 1 : 0);
    return res;
}

} // namespace wordidx
