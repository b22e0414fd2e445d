#include "wordidx/index.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

namespace wordidx {

namespace {

constexpr char kMagic[4] = {'W', 'I', 'D', 'X'};
constexpr unsigned kVersion = 1;
constexpr const char* kTextMagic = "wordidx-index";

// Hex reader that remembers line numbers for error messages.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
            if (!line.empty()) return line;
        }
        fail(ErrorCode::parse_error, "unexpected end of input after line " + std::to_string(line_no_));
    }

    // "name value"
    unsigned field(const std::string& name) {
        const std::string line = next();
        const std::string prefix = name + " ";
        if (line.rfind(prefix, 0) != 0) error("expected '" + name + "'");
        return number(line.substr(prefix.size()));
    }

    Word word(unsigned width) {
        const std::string line = next();
        try {
            return Word::from_hex(width, line);
        } catch (const Error& e) {
            error(e.what());
        }
    }

    unsigned number(const std::string& s) {
        if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            error("expected a number, got '" + s + "'");
        return static_cast<unsigned>(std::stoul(s));
    }

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorCode::parse_error, "line " + std::to_string(line_no_) + ": " + what);
    }

private:
    std::istream& in_;
    unsigned line_no_ = 0;
};

void put_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorCode::parse_error, "truncated binary index");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
}

void put_word(std::ostream& out, const Word& w) {
    std::vector<std::uint8_t> bytes(w.width() / 8);
    w.to_bytes(bytes);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Word get_word(std::istream& in, unsigned width) {
    std::vector<std::uint8_t> bytes(width / 8);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
        fail(ErrorCode::parse_error, "truncated binary word data");
    return Word::from_bytes(width, bytes);
}

void check_width(unsigned w) {
    if (!is_supported_width(w)) fail(ErrorCode::parse_error, "unsupported width " + std::to_string(w));
}

} // namespace

void write_words(std::ostream& out, std::span<const Word> words, WordFormat format) {
    for (const Word& w : words) {
        if (format == WordFormat::hex)
            out << w.to_hex() << '\n';
        else
            put_word(out, w);
    }
    if (!out) fail(ErrorCode::io_error, "write failed");
}

std::vector<Word> read_words(std::istream& in, unsigned width, WordFormat format) {
    check_width(width);
    std::vector<Word> out;
    if (format == WordFormat::bin) {
        std::vector<std::uint8_t> bytes(width / 8);
        for (;;) {
            in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            if (in.gcount() == 0) break;
            if (static_cast<std::size_t>(in.gcount()) != bytes.size())
                fail(ErrorCode::parse_error, "trailing partial word after word " + std::to_string(out.size()));
            out.push_back(Word::from_bytes(width, bytes));
        }
        return out;
    }
    std::string line;
    unsigned line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        if (line.empty()) continue;
        try {
            out.push_back(Word::from_hex(width, line));
        } catch (const Error& e) {
            fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ============================================================
//  Build and queries
// ============================================================

SuccessorIndex SuccessorIndex::build(std::vector<Word> keys) {
    if (keys.empty()) fail(ErrorCode::invalid_argument, "index needs at least one key");
    check_sorted_keys(keys);
    SuccessorIndex idx;
    idx.width_ = keys[0].width();
    idx.chunk_ = blocks_per_word(idx.width_);
    idx.keys_ = std::move(keys);
    const std::span<const Word> all(idx.keys_);
    for (std::size_t at = 0; at < all.size(); at += idx.chunk_) {
        auto part = all.subspan(at, std::min<std::size_t>(idx.chunk_, all.size() - at));
        idx.heads_.push_back(part[0]);
        idx.gammas_.push_back(build_gamma(part));
    }
    return idx;
}

std::size_t SuccessorIndex::index_bits() const noexcept {
    std::size_t bits = heads_.size() * std::size_t(width_);
    for (const auto& g : gammas_) bits += g.index_bits();
    return bits;
}

const Word& SuccessorIndex::head(unsigned c) const {
    WORDIDX_COUNT(index_probes, 1);
    return heads_[c];
}

std::optional<Hit> SuccessorIndex::successor(const Word& x) const {
    if (x.width() != width_) fail(ErrorCode::width_mismatch, "query width does not match index");
    // Last chunk whose head is <= x, or the first chunk.
    unsigned lo = 0, hi = chunk_count();
    while (hi - lo > 1) {
        const unsigned mid = (lo + hi) / 2;
        WORDIDX_COUNT(comparisons, 1);
        if (word_less(x, head(mid)))
            hi = mid;
        else
            lo = mid;
    }
    const unsigned offset = lo * chunk_;
    if (auto h = gamma_successor(gammas_[lo], x)) return Hit{offset + h->rank, std::move(h->key)};
    if (lo + 1 >= chunk_count()) return std::nullopt;
    return Hit{offset + chunk_ + 1, head(lo + 1)};
}

std::optional<RankRange> SuccessorIndex::weak_prefix(const Word& p, unsigned len) const {
    if (p.width() != width_) fail(ErrorCode::width_mismatch, "prefix width does not match index");
    if (len > width_) fail(ErrorCode::invalid_argument, "prefix longer than the word");
    const Word keep = len ? (Word::ones(width_) << (width_ - len)) : Word::zero(width_);
    const Word low = p & keep;
    const Word high = low | ~keep;

    auto first = successor(low);
    if (!first) return std::nullopt;
    unsigned last = size();
    if (auto h = successor(high)) last = word_equal(h->key, high) ? h->rank : h->rank - 1;
    if (first->rank > last) return std::nullopt;
    // The successor of low has the prefix exactly when some key does.
    WORDIDX_COUNT(key_probes, 1);
    if (!word_equal(keys_[first->rank - 1] & keep, low)) return std::nullopt;
    return RankRange{first->rank, last};
}

std::optional<RankRange> SuccessorIndex::weak_prefix(const std::vector<bool>& p) const {
    if (p.size() > width_) fail(ErrorCode::invalid_argument, "prefix longer than the word");
    WordBuilder b(width_);
    for (unsigned i = 0; i < p.size(); ++i) b.set(i, p[i]);
    return weak_prefix(b.build(), static_cast<unsigned>(p.size()));
}

void SuccessorIndex::corrupt_plan_word(unsigned c, unsigned word, const Word& flip) {
    if (c >= chunk_count()) fail(ErrorCode::out_of_range, "chunk out of range");
    auto words = gammas_[c].words();
    if (5 + word >= words.size()) fail(ErrorCode::out_of_range, "plan word out of range");
    words[5 + word] = words[5 + word] ^ flip;
    gammas_[c] = GammaNode::from_words(width_, words, gammas_[c].keys());
}

// ============================================================
//  Serialization
// ============================================================

void SuccessorIndex::save(std::ostream& out, WordFormat format) const {
    if (format == WordFormat::hex) {
        out << kTextMagic << ' ' << kVersion << '\n'
            << "width " << width_ << '\n'
            << "keys " << size() << '\n'
            << "chunk " << chunk_ << '\n'
            << "heads " << heads_.size() << '\n';
        write_words(out, heads_, format);
        for (std::size_t c = 0; c < gammas_.size(); ++c) {
            const auto words = gammas_[c].words();
            out << "gamma " << words.size() << '\n';
            write_words(out, words, format);
        }
        out << "payload " << size() << '\n';
        write_words(out, keys_, format);
    } else {
        out.write(kMagic, 4);
        put_u32(out, kVersion);
        put_u32(out, width_);
        put_u32(out, size());
        put_u32(out, chunk_);
        put_u32(out, static_cast<std::uint32_t>(heads_.size()));
        write_words(out, heads_, format);
        for (const auto& g : gammas_) {
            const auto words = g.words();
            put_u32(out, static_cast<std::uint32_t>(words.size()));
            write_words(out, words, format);
        }
        write_words(out, keys_, format);
    }
    if (!out) fail(ErrorCode::io_error, "index write failed");
}

SuccessorIndex SuccessorIndex::load(std::istream& in, WordFormat format) {
    unsigned width, n, chunk, head_count;
    std::vector<Word> heads;
    std::vector<std::vector<Word>> dumps;
    std::vector<Word> keys;
    if (format == WordFormat::hex) {
        LineReader r(in);
        const std::string magic = r.next();
        if (magic != std::string(kTextMagic) + " " + std::to_string(kVersion)) r.error("not a version 1 index file");
        width = r.field("width");
        check_width(width);
        n = r.field("keys");
        chunk = r.field("chunk");
        if (n == 0 || chunk != blocks_per_word(width)) r.error("bad key count or chunk size");
        head_count = r.field("heads");
        if (head_count != (n + chunk - 1) / chunk) r.error("head count does not match key count");
        for (unsigned c = 0; c < head_count; ++c) heads.push_back(r.word(width));
        for (unsigned c = 0; c < head_count; ++c) {
            const unsigned count = r.field("gamma");
            if (count > 64) r.error("gamma node too large");
            dumps.emplace_back();
            for (unsigned i = 0; i < count; ++i) dumps.back().push_back(r.word(width));
        }
        if (r.field("payload") != n) r.error("payload size does not match key count");
        for (unsigned i = 0; i < n; ++i) keys.push_back(r.word(width));
    } else {
        char magic[4];
        if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) fail(ErrorCode::parse_error, "bad magic");
        if (get_u32(in) != kVersion) fail(ErrorCode::parse_error, "unsupported index version");
        width = get_u32(in);
        check_width(width);
        n = get_u32(in);
        chunk = get_u32(in);
        head_count = get_u32(in);
        if (n == 0 || n > (1u << 30) || chunk != blocks_per_word(width) || head_count != (n + chunk - 1) / chunk)
            fail(ErrorCode::parse_error, "inconsistent index header");
        for (unsigned c = 0; c < head_count; ++c) heads.push_back(get_word(in, width));
        for (unsigned c = 0; c < head_count; ++c) {
            const unsigned count = get_u32(in);
            if (count > 64) fail(ErrorCode::parse_error, "gamma node too large");
            dumps.emplace_back();
            for (unsigned i = 0; i < count; ++i) dumps.back().push_back(get_word(in, width));
        }
        for (unsigned i = 0; i < n; ++i) keys.push_back(get_word(in, width));
    }

    check_sorted_keys(keys);
    SuccessorIndex idx;
    idx.width_ = width;
    idx.chunk_ = chunk;
    idx.keys_ = std::move(keys);
    idx.heads_ = std::move(heads);
    const std::span<const Word> all(idx.keys_);
    for (unsigned c = 0; c < head_count; ++c) {
        const std::size_t at = std::size_t(c) * chunk;
        if (!word_equal(idx.heads_[c], all[at])) fail(ErrorCode::parse_error, "chunk head does not match key payload");
        auto part = all.subspan(at, std::min<std::size_t>(chunk, all.size() - at));
        idx.gammas_.push_back(GammaNode::from_words(width, dumps[c], part));
    }
    return idx;
}

} // namespace wordidx
