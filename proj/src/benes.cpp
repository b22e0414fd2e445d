#include "wordidx/benes.hpp"

#include <bit>
#include <string>

namespace wordidx {

// ============================================================
//  Permutation
// ============================================================

Permutation::Permutation(std::vector<unsigned> targets) : targets_(std::move(targets)) {
    std::vector<bool> hit(targets_.size(), false);
    for (unsigned t : targets_) {
        if (t >= targets_.size() || hit[t])
            fail(ErrorCode::invalid_argument, "permutation targets are not a bijection");
        hit[t] = true;
    }
}

Permutation Permutation::identity(unsigned size) {
    std::vector<unsigned> t(size);
    for (unsigned i = 0; i < size; ++i) t[i] = i;
    return Permutation(std::move(t));
}

Permutation Permutation::inverse() const {
    std::vector<unsigned> inv(targets_.size());
    for (unsigned i = 0; i < targets_.size(); ++i) inv[targets_[i]] = i;
    return Permutation(std::move(inv));
}

Permutation Permutation::padded(unsigned new_size) const {
    if (new_size < size()) fail(ErrorCode::invalid_argument, "cannot pad a permutation to a smaller size");
    std::vector<unsigned> t = targets_;
    for (unsigned i = size(); i < new_size; ++i) t.push_back(i);
    return Permutation(std::move(t));
}

// ============================================================
//  Plan layout
// ============================================================

namespace {

unsigned ilog2(unsigned v) { return static_cast<unsigned>(std::bit_width(v)) - 1; }

// Stage-major switch matrix: m[stage-1][pos].
using ControlMatrix = std::vector<std::vector<bool>>;

void route(const std::vector<unsigned>& perm, unsigned base, unsigned depth, unsigned log_b,
           ControlMatrix& c) {
    const unsigned n = static_cast<unsigned>(perm.size());
    if (n <= 1) return;
    if (n == 2) {
        if (perm[0] == 1) c[log_b - 1][base] = c[log_b - 1][base + 1] = true;
        return;
    }
    const unsigned half = n / 2;
    std::vector<unsigned> inv(n);
    for (unsigned i = 0; i < n; ++i) inv[perm[i]] = i;

    enum : signed char { unset = -1, upper = 0, lower = 1 };
    std::vector<signed char> side(n, unset);
    for (unsigned start = 0; start < half; ++start) {
        if (side[start] != unset) continue;
        unsigned i = start;
        for (;;) {
            side[i] = upper;
            side[i ^ half] = lower;
            // perm[i] leaves through the upper half, so its output mate must
            // come from the lower half.
            unsigned j = inv[perm[i] ^ half];
            if (side[j] != unset) break;
            side[j] = lower;
            side[j ^ half] = upper;
            i = j ^ half;
        }
    }

    const unsigned stage_in = depth;               // 0-based rows of c
    const unsigned stage_out = 2 * log_b - 2 - depth;
    std::vector<unsigned> up_perm(half), down_perm(half);
    for (unsigned s = 0; s < half; ++s) {
        bool cross_in = side[s] == lower;
        c[stage_in][base + s] = c[stage_in][base + s + half] = cross_in;
        bool cross_out = side[inv[s]] == lower;
        c[stage_out][base + s] = c[stage_out][base + s + half] = cross_out;
    }
    for (unsigned i = 0; i < n; ++i) {
        unsigned slot = i & (half - 1);
        unsigned dest = perm[i] & (half - 1);
        (side[i] == upper ? up_perm : down_perm)[slot] = dest;
    }
    route(up_perm, base, depth + 1, log_b, c);
    route(down_perm, base + half, depth + 1, log_b, c);
}

unsigned bit_split(unsigned width, unsigned b) {
    unsigned stages = b > 1 ? 2 * ilog2(b) - 1 : 0;
    return stages * b <= width ? stages : ilog2(b);
}

} // namespace

unsigned BenesPlan::stages() const noexcept { return size > 1 ? 2 * ilog2(size) - 1 : 0; }

unsigned BenesPlan::stages_in_first_word() const noexcept { return bit_split(width, size); }

unsigned benes_stage_distance(unsigned b, unsigned stage) {
    const unsigned log_b = ilog2(b);
    if (stage == 0 || stage > 2 * log_b - 1) fail(ErrorCode::out_of_range, "stage out of range");
    unsigned level = stage <= log_b ? stage : 2 * log_b - stage;
    return b >> level;
}

BenesPlan BenesPlan::from_words(unsigned width, unsigned size, Granularity g, std::span<const Word> words) {
    if (words.size() != 4) fail(ErrorCode::invalid_argument, "a Benes plan has four words");
    if (!std::has_single_bit(size)) fail(ErrorCode::invalid_argument, "Benes size must be a power of two");
    for (const Word& w : words)
        if (w.width() != width) fail(ErrorCode::width_mismatch, "Benes plan word width mismatch");
    BenesPlan p;
    p.size = size;
    p.granularity = g;
    p.width = width;
    p.c1 = words[0];
    p.c2 = words[1];
    p.dir1 = words[2];
    p.dir2 = words[3];
    return p;
}

namespace {

// Location of the control bit for (stage, pos): which word and which position.
std::pair<int, unsigned> control_slot(const BenesPlan& p, unsigned stage, unsigned pos) {
    if (p.granularity == Granularity::bit) {
        unsigned first = p.stages_in_first_word();
        if (stage <= first) return {0, (stage - 1) * p.size + pos};
        return {1, (stage - first - 1) * p.size + pos};
    }
    const unsigned log_w = log2_width(p.width);
    const unsigned col = 2 * log_w - p.stages() + stage;  // 1-based padded column
    if (col <= log_w) return {0, pos * log_w + (col - 1)};
    return {1, pos * log_w + (col - log_w - 1)};
}

} // namespace

bool BenesPlan::crossed(unsigned stage, unsigned pos) const {
    auto [which, at] = control_slot(*this, stage, pos);
    return (which == 0 ? c1 : c2).bit(at);
}

bool BenesPlan::mate_below(unsigned stage, unsigned pos) const {
    auto [which, at] = control_slot(*this, stage, pos);
    return (which == 0 ? dir1 : dir2).bit(at);
}

BenesPlan build_benes_plan(const Permutation& perm, Granularity granularity, unsigned width) {
    const unsigned b = perm.size();
    const unsigned blocks = blocks_per_word(width);
    if (b == 0 || !std::has_single_bit(b))
        fail(ErrorCode::invalid_argument, "Benes size must be a power of two, got " + std::to_string(b));
    if (granularity == Granularity::block && b != blocks)
        fail(ErrorCode::invalid_argument, "block permutation size must equal w/log w");
    if (granularity == Granularity::bit && b > blocks)
        fail(ErrorCode::invalid_argument, "bit permutation size exceeds w/log w");

    BenesPlan plan;
    plan.size = b;
    plan.granularity = granularity;
    plan.width = width;
    const unsigned stages = plan.stages();

    ControlMatrix c(stages, std::vector<bool>(b, false));
    if (stages) route(perm.targets(), 0, 0, ilog2(b), c);

    WordBuilder c1(width), c2(width), d1(width), d2(width);
    for (unsigned s = 1; s <= stages; ++s) {
        const unsigned dist = benes_stage_distance(b, s);
        for (unsigned pos = 0; pos < b; ++pos) {
            auto [which, at] = control_slot(plan, s, pos);
            (which == 0 ? c1 : c2).set(at, c[s - 1][pos]);
            (which == 0 ? d1 : d2).set(at, (pos & dist) == 0);
        }
    }
    plan.c1 = c1.build();
    plan.c2 = c2.build();
    plan.dir1 = d1.build();
    plan.dir2 = d2.build();
    return plan;
}

// ============================================================
//  Application
// ============================================================

Word apply_benes_bits(const BenesPlan& plan, const Word& x) {
    if (plan.granularity != Granularity::bit) fail(ErrorCode::invalid_argument, "plan is not bit-granular");
    if (x.width() != plan.width) fail(ErrorCode::width_mismatch, "word width does not match plan");
    const unsigned stages = plan.stages();
    if (stages == 0) return x;

    const unsigned b = plan.size;
    const unsigned first = plan.stages_in_first_word();
    const Word lead = Word::ones(plan.width) << (plan.width - b);
    Word ctl = plan.c1;
    Word dir = plan.dir1;
    Word y = x;
    for (unsigned s = 1; s <= stages; ++s) {
        if (s == first + 1) {
            ctl = plan.c2;
            dir = plan.dir2;
        }
        const unsigned d = benes_stage_distance(b, s);
        Word m = ctl & lead;
        Word moving = y & m;
        Word up = moving & dir;      // mate sits at a larger index
        Word down = moving ^ up;
        y = (y & ~m) | (up >> d) | (down << d);
        if (s < stages && s != first) {
            ctl = ctl << b;
            dir = dir << b;
        }
    }
    return y;
}

Word block_tail_pattern(unsigned width) {
    const unsigned log_w = log2_width(width);
    Word z = Word::from_u64(width, 1);
    for (unsigned span = log_w; span < width; span *= 2) z = z | (z << span);
    return z;
}

Word replicate_control(const Word& z, unsigned j, const Word& tail_pattern) {
    const unsigned log_w = log2_width(z.width());
    if (j < 1 || j > log_w) fail(ErrorCode::out_of_range, "replicate_control: j out of range");
    Word zj = tail_pattern << (log_w - j);
    Word y0 = zj & z;
    Word y1 = y0 << (j - 1);
    Word y2 = y0 >> (log_w - j);
    Word y3 = y1 - y2;
    return y3 | y1;
}

Word replicate_control(const Word& z, unsigned j) {
    return replicate_control(z, j, block_tail_pattern(z.width()));
}

Word apply_benes_blocks(const BenesPlan& plan, const Word& x, const Word& tail_pattern) {
    if (plan.granularity != Granularity::block) fail(ErrorCode::invalid_argument, "plan is not block-granular");
    if (x.width() != plan.width) fail(ErrorCode::width_mismatch, "word width does not match plan");
    const unsigned log_w = log2_width(plan.width);
    const unsigned stages = plan.stages();
    const unsigned pad = 2 * log_w - stages;
    Word y = x;
    for (unsigned col = pad + 1; col <= 2 * log_w; ++col) {
        const unsigned s = col - pad;
        const bool low = col <= log_w;
        const unsigned j = low ? col : col - log_w;
        Word cm = replicate_control(low ? plan.c1 : plan.c2, j, tail_pattern);
        Word dm = replicate_control(low ? plan.dir1 : plan.dir2, j, tail_pattern);
        const unsigned d = benes_stage_distance(plan.size, s) * log_w;
        Word moving = y & cm;
        Word up = moving & dm;
        Word down = moving ^ up;
        y = (y & ~cm) | (up >> d) | (down << d);
    }
    return y;
}

Word apply_benes_blocks(const BenesPlan& plan, const Word& x) {
    return apply_benes_blocks(plan, x, block_tail_pattern(plan.width));
}

} // namespace wordidx
