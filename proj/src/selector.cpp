#include "wordidx/selector.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

namespace wordidx {

namespace {

unsigned ilog2(unsigned v) { return static_cast<unsigned>(std::bit_width(v)) - 1; }

enum HeaderField : unsigned { f_k = 0, f_r = 1, f_log_b5 = 2, f_log_b7 = 3 };

unsigned header_field(const Word& header, HeaderField f) {
    const unsigned lw = log2_width(header.width());
    return static_cast<unsigned>(peek_field(header, f * lw, lw));
}

// Counted read of a log w-bit field.
unsigned read_field(const Word& w, unsigned index) {
    const unsigned lw = log2_width(w.width());
    return static_cast<unsigned>(extract_field(w, index * lw, lw));
}

Word leading(unsigned width, unsigned n) { return Word::ones(width) << (width - n); }

} // namespace

// ============================================================
//  Preprocessing
// ============================================================

SelectorPlan preprocess(std::span<const unsigned> indices, unsigned width) {
    const unsigned lw = log2_width(width);
    const unsigned nblocks = width / lw;
    const unsigned k = static_cast<unsigned>(indices.size());
    if (k > nblocks)
        fail(ErrorCode::invalid_argument,
             "selector length " + std::to_string(k) + " exceeds w/log w = " + std::to_string(nblocks));
    for (unsigned v : indices)
        if (v >= width) fail(ErrorCode::out_of_range, "selector index " + std::to_string(v) + " out of range");

    std::vector<unsigned> distinct(indices.begin(), indices.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const unsigned r = static_cast<unsigned>(distinct.size());
    auto id_of = [&](unsigned v) {
        return static_cast<unsigned>(std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin());
    };
    std::vector<unsigned> mult(r, 0);
    for (unsigned v : indices) ++mult[id_of(v)];

    SelectorPlan plan;
    plan.width = width;
    plan.k = k;
    plan.r = r;

    WordBuilder mb(width);
    for (unsigned v : distinct) mb.set(v);
    plan.mask = mb.build();

    // cur[d]: current position of distinct bit d as the phases proceed.
    std::vector<unsigned> cur(r);

    // Phase 1: selected bits packed to the left of their block, order kept.
    std::vector<unsigned> count(nblocks, 0);
    for (unsigned d = 0; d < r; ++d) {
        unsigned blk = distinct[d] / lw;
        cur[d] = blk * lw + count[blk]++;
    }

    // Phase 2: stable sort of blocks by descending occupancy.
    std::vector<unsigned> order(nblocks);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](unsigned a, unsigned b) { return count[a] > count[b]; });
    std::vector<unsigned> block_target(nblocks), sorted_count(nblocks);
    for (unsigned t = 0; t < nblocks; ++t) {
        block_target[order[t]] = t;
        sorted_count[t] = count[order[t]];
    }
    plan.phase2 = build_benes_plan(Permutation(block_target), Granularity::block, width);
    for (unsigned d = 0; d < r; ++d) cur[d] = block_target[cur[d] / lw] * lw + cur[d] % lw;

    // Phase 3: a_i blocks hold at least i bits; A_i are their prefix sums.
    std::vector<unsigned> a(lw + 1, 0), A(lw + 1, 0);
    for (unsigned i = 1; i <= lw; ++i) {
        for (unsigned t = 0; t < nblocks && sorted_count[t] >= i; ++t) ++a[i];
        A[i] = A[i - 1] + a[i];
    }
    WordBuilder ob(width);
    for (unsigned i = 1; i <= lw; ++i) ob.put_field((i - 1) * lw, lw, A[i]);
    plan.offsets = ob.build();
    for (unsigned d = 0; d < r; ++d) {
        unsigned blk = cur[d] / lw, off = cur[d] % lw;
        if (off > 0) cur[d] = (A[off] + blk) * lw;
    }

    // Phase 4: first bits of blocks 0..r-1 gathered into positions 0..r-1.
    const unsigned q = r / lw;
    for (unsigned d = 0; d < r; ++d) {
        unsigned blk = cur[d] / lw;
        cur[d] = blk < q * lw ? (blk % q) * lw + blk / q : blk;
    }
    std::vector<unsigned> at(r);
    for (unsigned d = 0; d < r; ++d) at[cur[d]] = d;

    unsigned log_b5_field = 0;
    WordBuilder p6(width);
    if (r < k) {
        // Phase 5: bit at position l goes to the sum of multiplicities before it.
        const unsigned b5 = std::bit_ceil(k);
        std::vector<unsigned> targets(b5);
        std::vector<bool> used(b5, false);
        unsigned acc = 0;
        for (unsigned l = 0; l < r; ++l) {
            targets[l] = acc;
            used[acc] = true;
            acc += mult[at[l]];
        }
        unsigned next = 0;
        for (unsigned s = r; s < b5; ++s) {
            while (used[next]) ++next;
            targets[s] = next;
            used[next] = true;
        }
        plan.phase5 = build_benes_plan(Permutation(targets), Granularity::bit, width);
        for (unsigned d = 0; d < r; ++d) cur[d] = targets[cur[d]];

        // Phase 6: residual multiplicity above delta sends a copy delta places right.
        const unsigned log_b5 = ilog2(b5);
        log_b5_field = log_b5 + 1;
        std::vector<unsigned> residual(b5, 0);
        for (unsigned d = 0; d < r; ++d) residual[cur[d]] = mult[d];
        for (unsigned s = 1; s <= log_b5; ++s) {
            const unsigned delta = b5 >> s;
            std::vector<unsigned> next_res = residual;
            for (unsigned pos = 0; pos < b5; ++pos) {
                if (residual[pos] <= delta) continue;
                p6.set((s - 1) * b5 + pos);
                next_res[pos + delta] = residual[pos] - delta;
                next_res[pos] = delta;
            }
            residual = std::move(next_res);
        }
    } else {
        plan.phase5 = build_benes_plan(Permutation::identity(1), Granularity::bit, width);
    }
    plan.phase6_masks = p6.build();

    // Phase 7: occurrence j of the output comes from I6[j].
    const unsigned b7 = std::bit_ceil(std::max(k, 1u));
    std::vector<unsigned> targets7(b7);
    std::iota(targets7.begin(), targets7.end(), 0u);
    std::vector<unsigned> seen(r, 0);
    for (unsigned j = 0; j < k; ++j) {
        unsigned d = id_of(indices[j]);
        targets7[cur[d] + seen[d]++] = j;
    }
    plan.phase7 = build_benes_plan(Permutation(targets7), Granularity::bit, width);

    WordBuilder hb(width);
    hb.put_field(f_k * lw, lw, k);
    hb.put_field(f_r * lw, lw, r);
    hb.put_field(f_log_b5 * lw, lw, log_b5_field);
    hb.put_field(f_log_b7 * lw, lw, ilog2(b7));
    plan.header = hb.build();
    return plan;
}

// ============================================================
//  Serialization
// ============================================================

std::vector<Word> SelectorPlan::words() const {
    std::vector<Word> out{header, mask};
    for (const Word& w : phase2.words()) out.push_back(w);
    out.push_back(offsets);
    for (const Word& w : phase7.words()) out.push_back(w);
    if (has_repeats()) {
        for (const Word& w : phase5.words()) out.push_back(w);
        out.push_back(phase6_masks);
    }
    return out;
}

SelectorPlan SelectorPlan::from_words(unsigned width, std::span<const Word> words) {
    const unsigned lw = log2_width(width);
    if (words.size() < 11) fail(ErrorCode::parse_error, "selector plan needs at least 11 words");
    for (const Word& w : words)
        if (w.width() != width) fail(ErrorCode::width_mismatch, "selector plan word width mismatch");

    SelectorPlan p;
    p.width = width;
    p.header = words[0];
    p.k = header_field(p.header, f_k);
    p.r = header_field(p.header, f_r);
    const unsigned log_b5_field = header_field(p.header, f_log_b5);
    const unsigned log_b7 = header_field(p.header, f_log_b7);
    if (p.k > width / lw || p.r > p.k || (p.k > 0 && p.r == 0))
        fail(ErrorCode::parse_error, "selector header has inconsistent k/r");
    if (log_b7 != ilog2(std::bit_ceil(std::max(p.k, 1u))))
        fail(ErrorCode::parse_error, "selector header has inconsistent phase-7 size");
    if ((log_b5_field != 0) != p.has_repeats() || (log_b5_field != 0 && log_b5_field - 1 != log_b7))
        fail(ErrorCode::parse_error, "selector header has inconsistent phase-5 size");
    if (words.size() != p.word_count()) fail(ErrorCode::parse_error, "selector plan has the wrong word count");

    p.mask = words[1];
    p.phase2 = BenesPlan::from_words(width, width / lw, Granularity::block, words.subspan(2, 4));
    p.offsets = words[6];
    p.phase7 = BenesPlan::from_words(width, 1u << log_b7, Granularity::bit, words.subspan(7, 4));
    if (p.has_repeats()) {
        p.phase5 = BenesPlan::from_words(width, 1u << (log_b5_field - 1), Granularity::bit, words.subspan(11, 4));
        p.phase6_masks = words[15];
    } else {
        p.phase5 = build_benes_plan(Permutation::identity(1), Granularity::bit, width);
        p.phase6_masks = Word::zero(width);
    }
    return p;
}

std::vector<unsigned> SelectorPlan::offset_table() const {
    const unsigned lw = log2_width(width);
    std::vector<unsigned> out(lw);
    for (unsigned i = 0; i < lw; ++i) out[i] = static_cast<unsigned>(peek_field(offsets, i * lw, lw));
    return out;
}

unsigned SelectorPlan::max_occupancy() const {
    auto t = offset_table();
    unsigned m = 0;
    for (unsigned i = 0; i < t.size(); ++i)
        if (t[i] != (i ? t[i - 1] : 0)) m = i + 1;
    return m;
}

// ============================================================
//  Query
// ============================================================

namespace {

Word run(const SelectorPlan& p, const Word& input, std::array<Word, 8>* snaps) {
    if (input.width() != p.width) fail(ErrorCode::width_mismatch, "query width does not match selector plan");
    const unsigned w = p.width;
    const unsigned lw = log2_width(w);
    const unsigned llw = ilog2(lw);
    auto snap = [&](unsigned phase, const Word& v) {
        if (snaps) (*snaps)[phase] = v;
    };

    WORDIDX_COUNT(index_probes, p.word_count());
    const unsigned r = read_field(p.header, f_r);
    const unsigned log_b5_field = read_field(p.header, f_log_b5);

    // Phase 0
    Word x = input & p.mask;
    snap(0, x);

    // Phase 1
    const Word tail = block_tail_pattern(w);
    const Word unselected = ~p.mask;
    for (unsigned i = 2; i <= lw; ++i) {
        Word zi = tail << (i - 1);
        Word lm = unselected & zi;
        Word s = lm - (lm >> (i - 1));
        Word t = x & s;
        x = (t << 1) | (x ^ t);
    }
    snap(1, x);

    // Phase 2
    x = apply_benes_blocks(p.phase2, x, tail);
    snap(2, x);

    // Phase 3: bit i-1 of the first a_i blocks moves to the first bit of
    // blocks A_{i-1}.. ; stops at the first empty level.
    unsigned prev = read_field(p.offsets, 0);
    for (unsigned i = 2; i <= lw; ++i) {
        const unsigned cur = read_field(p.offsets, i - 1);
        WORDIDX_COUNT(comparisons, 1);
        if (cur == prev) break;
        unsigned shift = (prev << llw) - (i - 1);
        if (shift > w) shift = w;  // only reachable with a corrupted plan
        Word t = x & (tail << (lw - i));
        x = (x ^ t) | (t >> shift);
        prev = cur;
    }
    snap(3, x);

    // Phase 4: with q = r / log w, subphase i moves the first bits of blocks
    // iq..iq+q-1 to offset i of blocks 0..q-1; the rest go one at a time.
    const unsigned q = r >> llw;
    const unsigned q_span = q << llw;  // q log w
    {
        const Word src = x;
        const Word keep = leading(w, std::min(q_span, w));
        x = src & keep;
        unsigned from = 0;
        for (unsigned i = 1; i < lw && q > 0; ++i) {
            from += q_span;
            if (from > w) break;
            x = x | (((src << from) & keep) >> i);
        }
        const Word top = Word::single(w, 0);
        for (unsigned b = q << llw; b < r; ++b) {
            unsigned at = b << llw;
            if (at >= w) break;
            Word bit = src & (top >> at);
            x = x | (bit << (at - b));
        }
    }
    snap(4, x);

    if (log_b5_field != 0) {
        x = apply_benes_bits(p.phase5, x);
        snap(5, x);

        const unsigned b5 = 1u << (log_b5_field - 1);
        const Word lead5 = leading(w, b5);
        Word packed = p.phase6_masks;
        for (unsigned s = 1; s < log_b5_field; ++s) {
            Word m = packed & lead5;
            x = x | ((x & m) >> (b5 >> s));
            if (s + 1 < log_b5_field) packed = packed << b5;
        }
        snap(6, x);
    } else {
        snap(5, x);
        snap(6, x);
    }

    x = apply_benes_bits(p.phase7, x);
    snap(7, x);
    return x;
}

} // namespace

Word select(const SelectorPlan& plan, const Word& x) { return run(plan, x, nullptr); }

SelectorTrace select_traced(const SelectorPlan& plan, const Word& x) {
    SelectorTrace t;
    run(plan, x, &t.x);
    OpCounts saved = live_counts();
    run(plan, plan.mask, &t.mask);
    live_counts() = saved;
    return t;
}

} // namespace wordidx
