#include "wordidx/gamma.hpp"

#include <algorithm>
#include <string>

namespace wordidx {

namespace {

unsigned lcp(const Word& a, const Word& b) {
    unsigned p = 0;
    while (p < a.width() && a.bit(p) == b.bit(p)) ++p;
    return p;
}

enum HeaderField : unsigned { f_k = 0, f_ibits = 1 };

unsigned field(const Word& w, unsigned i) {
    const unsigned lw = log2_width(w.width());
    return static_cast<unsigned>(peek_field(w, i * lw, lw));
}

unsigned read_field(const Word& w, unsigned i) {
    const unsigned lw = log2_width(w.width());
    return static_cast<unsigned>(extract_field(w, i * lw, lw));
}

Word leading(unsigned width, unsigned n) { return Word::ones(width) << (width - n); }

} // namespace

void check_sorted_keys(std::span<const Word> keys) {
    if (keys.empty()) return;
    const unsigned w = keys[0].width();
    if (!is_supported_width(w)) fail(ErrorCode::invalid_argument, "unsupported key width");
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].width() != w) fail(ErrorCode::width_mismatch, "keys have mixed widths");
        if (i > 0) {
            unsigned p = lcp(keys[i - 1], keys[i]);
            if (p == w || keys[i - 1].bit(p))
                fail(ErrorCode::unsorted_keys,
                     "keys not strictly ascending at index " + std::to_string(i));
        }
    }
}

// ============================================================
//  Blind trie
// ============================================================

namespace {

int build_range(std::span<const Word> keys, unsigned lo, unsigned hi, std::vector<BlindTrie::Node>& nodes) {
    if (hi - lo == 1) return -static_cast<int>(lo + 1);
    const unsigned bit = lcp(keys[lo], keys[hi - 1]);
    unsigned split = lo;
    while (!keys[split].bit(bit)) ++split;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({bit, 0, 0});
    int left = build_range(keys, lo, split, nodes);
    int right = build_range(keys, split, hi, nodes);
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
}

} // namespace

BlindTrie build_blind_trie(std::span<const Word> keys) {
    if (keys.empty()) fail(ErrorCode::invalid_argument, "blind trie needs at least one key");
    check_sorted_keys(keys);
    BlindTrie t;
    t.width = keys[0].width();
    t.k = static_cast<unsigned>(keys.size());
    t.root = build_range(keys, 0, t.k, t.nodes);
    return t;
}

BlindTrie::Path BlindTrie::path(unsigned q) const {
    if (q < 1 || q > k) fail(ErrorCode::out_of_range, "leaf rank out of range");
    Path p;
    int cur = root;
    while (cur >= 0) {
        const Node& n = nodes[cur];
        // Leaves under a node form a contiguous rank range; find which side q is on.
        int probe = n.left;
        while (probe >= 0) probe = nodes[probe].right;  // rightmost leaf of the left subtree
        const bool right = q > static_cast<unsigned>(-probe);
        p.nodes.push_back(static_cast<unsigned>(cur));
        p.bits.push_back(n.bit);
        p.turns.push_back(right);
        cur = right ? n.right : n.left;
    }
    return p;
}

unsigned blind_search_slow(const BlindTrie& trie, const Word& x) {
    if (trie.k == 0) fail(ErrorCode::invalid_argument, "empty trie");
    int cur = trie.root;
    while (cur >= 0) {
        const auto& n = trie.nodes[cur];
        cur = x.bit(n.bit) ? n.right : n.left;
    }
    return static_cast<unsigned>(-cur);
}

// ============================================================
//  Gamma node construction
// ============================================================

namespace {

unsigned shared_nodes(const BlindTrie::Path& a, const BlindTrie::Path& b) {
    unsigned j = 0;
    while (j < a.nodes.size() && j < b.nodes.size() && a.nodes[j] == b.nodes[j]) ++j;
    return j;
}

// Walks the binary search over ranks and records, for each q, the LCA depths
// with the nearest lower and upper endpoint.
void assign_anchors(const std::vector<BlindTrie::Path>& paths, unsigned lo, unsigned hi, unsigned left_anchor,
                    unsigned right_anchor, std::vector<unsigned>& jl, std::vector<unsigned>& jr) {
    if (lo > hi) return;
    const unsigned q = (lo + hi) / 2;
    jl[q] = left_anchor ? shared_nodes(paths[q], paths[left_anchor]) : 0;
    jr[q] = right_anchor ? shared_nodes(paths[q], paths[right_anchor]) : 0;
    if (q > lo) assign_anchors(paths, lo, q - 1, left_anchor, q, jl, jr);
    assign_anchors(paths, q + 1, hi, q, right_anchor, jl, jr);
}

} // namespace

GammaNode build_gamma(std::span<const Word> keys) {
    BlindTrie trie = build_blind_trie(keys);
    const unsigned w = trie.width;
    const unsigned lw = log2_width(w);
    const unsigned k = trie.k;
    if (k > w / lw) fail(ErrorCode::invalid_argument, "a gamma node holds at most w/log w keys");

    std::vector<BlindTrie::Path> paths(k + 1);
    for (unsigned q = 1; q <= k; ++q) paths[q] = trie.path(q);

    std::vector<unsigned> jl(k + 1, 0), jr(k + 1, 0);
    assign_anchors(paths, 1, k, 0, 0, jl, jr);

    std::vector<unsigned> indices;
    WordBuilder zb(w), jlb(w), jrb(w), eb(w);
    for (unsigned q = 1; q <= k; ++q) {
        const unsigned d = std::max(jl[q], jr[q]);
        for (unsigned t = d; t < paths[q].bits.size(); ++t) {
            if (indices.size() >= w / lw)
                fail(ErrorCode::internal, "gamma path suffixes exceed selector capacity");
            zb.set(static_cast<unsigned>(indices.size()), paths[q].turns[t]);
            indices.push_back(paths[q].bits[t]);
        }
        jlb.put_field((q - 1) * lw, lw, jl[q]);
        jrb.put_field((q - 1) * lw, lw, jr[q]);
        eb.put_field((q - 1) * lw, lw, indices.size());
    }

    GammaNode g;
    g.width_ = w;
    g.k_ = k;
    WordBuilder hb(w);
    hb.put_field(f_k * lw, lw, k);
    hb.put_field(f_ibits * lw, lw, indices.size());
    g.header_ = hb.build();
    g.jl_ = jlb.build();
    g.jr_ = jrb.build();
    g.ends_ = eb.build();
    g.z_ = zb.build();
    g.plan_ = preprocess(indices, w);
    g.keys_ = keys;
    return g;
}

std::vector<Word> GammaNode::words() const {
    std::vector<Word> out{header_, jl_, jr_, ends_, z_};
    for (const Word& w : plan_.words()) out.push_back(w);
    return out;
}

GammaNode GammaNode::from_words(unsigned width, std::span<const Word> words, std::span<const Word> keys) {
    if (words.size() < 5) fail(ErrorCode::parse_error, "gamma node needs at least 5 words");
    for (const Word& w : words)
        if (w.width() != width) fail(ErrorCode::width_mismatch, "gamma node word width mismatch");
    GammaNode g;
    g.width_ = width;
    g.header_ = words[0];
    g.k_ = field(g.header_, f_k);
    if (g.k_ == 0 || g.k_ > blocks_per_word(width)) fail(ErrorCode::parse_error, "gamma node key count out of range");
    if (keys.size() != g.k_) fail(ErrorCode::parse_error, "gamma node key count does not match key storage");
    g.jl_ = words[1];
    g.jr_ = words[2];
    g.ends_ = words[3];
    g.z_ = words[4];
    g.plan_ = SelectorPlan::from_words(width, words.subspan(5));
    if (g.plan_.k != field(g.header_, f_ibits)) fail(ErrorCode::parse_error, "gamma node path length mismatch");
    g.keys_ = keys;
    return g;
}

unsigned GammaNode::j_left(unsigned q) const { return field(jl_, q - 1); }
unsigned GammaNode::j_right(unsigned q) const { return field(jr_, q - 1); }
unsigned GammaNode::segment_end(unsigned q) const { return field(ends_, q - 1); }
unsigned GammaNode::path_bits() const { return field(header_, f_ibits); }

const Word& GammaNode::probe_key(unsigned q) const {
    if (q < 1 || q > keys_.size()) fail(ErrorCode::out_of_range, "key rank out of range");
    WORDIDX_COUNT(key_probes, 1);
    return keys_[q - 1];
}

// ============================================================
//  Queries
// ============================================================

FastSearch blind_search_fast(const GammaNode& g, const Word& x) {
    if (x.width() != g.width()) fail(ErrorCode::width_mismatch, "query width does not match gamma node");
    const unsigned w = g.width();
    WORDIDX_COUNT(index_probes, 5);
    const Word& header = g.header_;
    const Word& jl_w = g.jl_;
    const Word& jr_w = g.jr_;
    const Word& ends_w = g.ends_;
    const Word& z_w = g.z_;

    const unsigned k = std::min(read_field(header, f_k), g.size());
    FastSearch out;
    if (k <= 1) {
        out.rank = 1;
        return out;
    }

    const Word sel = select(g.plan(), x);
    const Word top = Word::single(w, 0);
    Word x_lo, z_lo, x_hi, z_hi;
    unsigned lo = 1, hi = k;
    while (lo <= hi) {
        ++out.iterations;
        const unsigned q = (lo + hi) >> 1;
        const unsigned jl = read_field(jl_w, q - 1);
        const unsigned jr = read_field(jr_w, q - 1);
        const unsigned start = q == 1 ? 0 : read_field(ends_w, q - 2);
        const unsigned end = read_field(ends_w, q - 1);
        const unsigned len = end > start && end <= w ? end - start : 0;

        const Word seg = leading(w, len);
        const Word xs = (sel << start) & seg;
        const Word zs = (z_w << start) & seg;
        Word xq, zq;
        WORDIDX_COUNT(comparisons, 1);
        const bool from_left = jl >= jr;
        const unsigned d = std::min(from_left ? jl : jr, w);
        if (d == 0) {
            xq = xs;
            zq = zs;
        } else {
            const Word& xa = from_left ? x_lo : x_hi;
            const Word& za = from_left ? z_lo : z_hi;
            if (!xa.valid()) break;  // anchors missing: only with corrupted tables
            xq = (xa & leading(w, d)) | (xs >> d);
            zq = (za & leading(w, d - 1)) | (zs >> d);
            if (from_left) zq = zq | (top >> (d - 1));
        }

        if (word_equal(xq, zq)) {
            out.rank = q;
            return out;
        }
        if (word_less(zq, xq)) {
            lo = q + 1;
            x_lo = std::move(xq);
            z_lo = std::move(zq);
        } else {
            hi = q - 1;
            x_hi = std::move(xq);
            z_hi = std::move(zq);
        }
    }
    out.rank = std::clamp(lo, 1u, k);
    return out;
}

std::optional<Hit> gamma_successor(const GammaNode& g, const Word& x) {
    const unsigned w = g.width();
    const unsigned r = blind_search_fast(g, x).rank;
    const Word& bkey = g.probe_key(r);
    const unsigned l = leading_zeros(x ^ bkey);
    if (l == w) return Hit{r, bkey};

    const Word below = Word::ones(w) >> l;
    const bool b = !word_is_zero(x & (Word::single(w, 0) >> l));
    // z keeps the common prefix and repeats x's next bit to the end.
    const Word z = b ? (x | below) : (x & ~below);
    const unsigned q2 = blind_search_fast(g, z).rank;
    const unsigned ans = b ? q2 + 1 : q2;
    if (ans > g.size()) return std::nullopt;
    return Hit{ans, g.probe_key(ans)};
}

} // namespace wordidx
