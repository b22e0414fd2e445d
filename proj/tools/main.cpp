#include "common.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace widx_cli;

namespace {

struct KeySource {
    std::string path;
    std::size_t count = 1000;
    std::string distribution = "uniform";
};

KeySet load_or_generate(const KeySource& src, unsigned width, std::uint64_t seed, widx_format format) {
    if (!src.path.empty()) return read_keys(src.path, width, format);
    return generate_keys(src.count, width, seed, src.distribution);
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::trunc);
    if (!f || !(f << text)) throw CliError("cannot write " + out);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string bits_of(const Bytes& w) {
    std::string s;
    for (unsigned i = 0; i < w.size() * 8; ++i) {
        if (i && i % 4 == 0) s += ' ';
        s += get_bit(w, i) ? '1' : '0';
    }
    return s;
}

Bytes parse_bits(unsigned width, const std::string& text) {
    Bytes out(width / 8);
    unsigned n = 0;
    for (char c : text) {
        if (c == ' ' || c == '_') continue;
        if ((c != '0' && c != '1') || n >= width) throw CliError("bad bit string '" + text + "'");
        set_bit(out, n++, c == '1');
    }
    if (n != width) throw CliError("bit string needs " + std::to_string(width) + " bits");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Word-level successor index toolkit"};
    app.require_subcommand(1);

    unsigned width = 256;
    std::uint64_t seed = 1;
    std::string format_name = "hex";
    std::string out;
    KeySource keys;
    std::size_t queries = 0;
    std::string structure = "index";
    bool inject_fault = false;
    unsigned jobs = 1;

    auto width_opt = [&](CLI::App* c) {
        c->add_option("--width", width, "Word width")->check(CLI::IsMember({16, 256, 65536}));
    };
    auto format_opt = [&](CLI::App* c) {
        c->add_option("--format", format_name, "Word file format")->check(CLI::IsMember({"hex", "bin"}));
    };
    auto key_opts = [&](CLI::App* c) {
        c->add_option("--keys", keys.path, "Key file (sorted, distinct)");
        c->add_option("--count", keys.count, "Keys to generate when --keys is absent")->check(CLI::PositiveNumber);
        c->add_option("--distribution", keys.distribution, "Generated key distribution")
            ->check(CLI::IsMember({"uniform", "clustered"}));
    };

    auto* gen = app.add_subcommand("gen", "Write sorted random keys");
    width_opt(gen);
    format_opt(gen);
    gen->add_option("--seed", seed);
    gen->add_option("--count", keys.count, "Number of keys")->required()->check(CLI::PositiveNumber);
    gen->add_option("--distribution", keys.distribution)->check(CLI::IsMember({"uniform", "clustered"}));
    gen->add_option("--out", out, "Output file (default stdout)");

    auto* build = app.add_subcommand("build", "Build and save a successor index");
    width_opt(build);
    format_opt(build);
    build->add_option("--keys", keys.path, "Key file")->required();
    build->add_option("--out", out, "Index file")->required();

    std::string index_path;
    std::vector<std::string> xs, prefixes;
    auto* query = app.add_subcommand("query", "Answer successor, rank and prefix queries");
    width_opt(query);
    format_opt(query);
    query->add_option("--seed", seed);
    auto* q_index = query->add_option("--index", index_path, "Saved index file");
    auto* q_keys = query->add_option("--keys", keys.path, "Key file");
    q_index->excludes(q_keys);
    query->add_option("--x", xs, "Query word in hex (repeatable)");
    query->add_option("--prefix", prefixes, "Prefix as a 0/1 string (repeatable)");
    query->add_option("--structure", structure)->check(CLI::IsMember({"index", "beta"}));

    auto* verify = app.add_subcommand("verify", "Check a structure against the sorted-array oracle");
    width_opt(verify);
    format_opt(verify);
    key_opts(verify);
    verify->add_option("--seed", seed);
    verify->add_option("--queries", queries, "Random queries (default 10000)");
    verify->add_option("--structure", structure)->check(CLI::IsMember({"gamma", "beta", "index"}));
    verify->add_flag("--inject-fault", inject_fault, "Corrupt one plan word (gamma, index) or one bit (beta)");
    verify->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));
    verify->add_option("--out", out, "Report file (default stdout)");

    bool text = false;
    std::vector<unsigned> scaling{16, 256};
    auto* bench = app.add_subcommand("bench", "Operation and probe counts");
    width_opt(bench);
    format_opt(bench);
    key_opts(bench);
    bench->add_option("--seed", seed);
    bench->add_option("--queries", queries, "Queries per structure (default 2000)");
    bench->add_option("--scaling-widths", scaling, "Widths for the selector scaling table")
        ->check(CLI::IsMember({16, 256, 65536}));
    bench->add_flag("--text", text, "Human-readable table instead of JSON");
    bench->add_option("--out", out, "Report file (default stdout)");

    std::string x_hex, x_bits, index_list;
    bool show_plan = false;
    auto* trace = app.add_subcommand("trace", "Per-phase selector trace");
    unsigned trace_width = 16;
    trace->add_option("--width", trace_width, "Word width (default 16)")->check(CLI::IsMember({16, 256, 65536}));
    auto* t_hex = trace->add_option("--x", x_hex, "Query word in hex");
    auto* t_bits = trace->add_option("--bits", x_bits, "Query word as a 0/1 string");
    t_hex->excludes(t_bits);
    trace->add_option("--indices", index_list, "Comma-separated bit indices")->required();
    trace->add_flag("--plan", show_plan, "Also dump the plan words");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_pass : exit_usage;
    }

    try {
        const widx_format format = parse_format(format_name);

        if (gen->parsed()) {
            const KeySet k = generate_keys(keys.count, width, seed, keys.distribution);
            if (!out.empty() && out != "-") {
                check(widx_words_write(out.c_str(), width, format, k.data.data(), k.size()), "writing keys");
            } else {
                if (format == WIDX_FORMAT_BIN) throw CliError("binary output needs --out");
                std::string s;
                for (std::size_t i = 0; i < k.size(); ++i) s += to_hex(width, k.at(i)) + "\n";
                std::cout << s;
            }
            return exit_pass;
        }

        if (build->parsed()) {
            const KeySet k = read_keys(keys.path, width, format);
            widx_index* idx = nullptr;
            check(widx_index_new(width, k.data.data(), k.size(), &idx), "building index");
            const widx_status s = widx_index_save(idx, out.c_str(), format);
            Json j{{"command", "build"},
                   {"width", width},
                   {"keys", k.size()},
                   {"chunks", widx_index_chunk_count(idx)},
                   {"index_bits", widx_index_bits(idx)},
                   {"out", out}};
            widx_index_free(idx);
            check(s, "saving index");
            std::cout << dump(j);
            return exit_pass;
        }

        if (query->parsed()) {
            if (index_path.empty() && keys.path.empty()) throw CliError("query needs --index or --keys");
            widx_index* idx = nullptr;
            widx_beta* beta = nullptr;
            if (!index_path.empty()) {
                if (structure == "beta") throw CliError("beta queries need --keys");
                check(widx_index_load(index_path.c_str(), format, &idx), "loading index");
                width = widx_index_width(idx);
            } else {
                const KeySet k = read_keys(keys.path, width, format);
                if (structure == "beta")
                    check(widx_beta_new(width, k.data.data(), k.size(), seed, &beta), "building rank structure");
                else
                    check(widx_index_new(width, k.data.data(), k.size(), &idx), "building index");
            }
            std::unique_ptr<widx_index, decltype(&widx_index_free)> idx_guard(idx, widx_index_free);
            std::unique_ptr<widx_beta, decltype(&widx_beta_free)> beta_guard(beta, widx_beta_free);
            std::string result;
            Bytes key(width / 8);
            for (const std::string& h : xs) {
                const Bytes x = from_hex(width, h);
                if (beta) {
                    unsigned rank;
                    int fb;
                    check(widx_beta_rank(beta, x.data(), &rank, &fb, nullptr), "rank query");
                    result += "rank " + h + " " + std::to_string(rank) + (fb ? " fallback" : "") + "\n";
                    continue;
                }
                int found;
                unsigned rank;
                check(widx_index_successor(idx, x.data(), &found, &rank, key.data()), "successor query");
                result += "successor " + h + " " +
                          (found ? std::to_string(rank) + " " + to_hex(width, key) : std::string("none")) + "\n";
            }
            for (const std::string& p : prefixes) {
                if (!idx) throw CliError("prefix queries need the index structure");
                Bytes word(width / 8);
                unsigned len = 0;
                for (char c : p) {
                    if ((c != '0' && c != '1') || len >= width) throw CliError("bad prefix '" + p + "'");
                    set_bit(word, len++, c == '1');
                }
                int found;
                unsigned a, b;
                check(widx_index_weak_prefix(idx, word.data(), len, &found, &a, &b), "prefix query");
                result += "prefix " + (p.empty() ? std::string("-") : p) + " " +
                          (found ? std::to_string(a) + " " + std::to_string(b) : std::string("none")) + "\n";
            }
            std::cout << result;
            return exit_pass;
        }

        if (verify->parsed()) {
            const KeySet k = load_or_generate(keys, width, seed, format);
            VerifyOptions opt;
            opt.queries = queries ? queries : 10000;
            opt.seed = seed;
            opt.structure = structure;
            opt.inject_fault = inject_fault;
            opt.jobs = jobs;
            Outcome o = run_verify(k, opt);
            if (!keys.path.empty()) o.report["config"]["key_file"] = keys.path;
            emit(dump(o.report), out);
            if (o.code != exit_pass) {
                std::cerr << "verify failed: " << o.report["mismatches"].get<std::uint64_t>() << " mismatches, "
                          << o.report["invariant_violations"].get<std::uint64_t>() << " invariant violations\n";
                if (!o.report["counterexample"].is_null())
                    std::cerr << "first counterexample: " << o.report["counterexample"].dump() << "\n";
            }
            return o.code;
        }

        if (bench->parsed()) {
            const KeySet k = load_or_generate(keys, width, seed, format);
            BenchOptions opt;
            opt.queries = queries ? queries : 2000;
            opt.seed = seed;
            opt.widths = scaling;
            Json r = run_bench(k, opt);
            if (!keys.path.empty()) r["config"]["key_file"] = keys.path;
            emit(text ? bench_text(r) : dump(r), out);
            return exit_pass;
        }

        if (trace->parsed()) {
            width = trace_width;
            std::vector<unsigned> idx;
            std::stringstream ss(index_list);
            for (std::string part; std::getline(ss, part, ',');) {
                if (part.empty() || part.find_first_not_of("0123456789 ") != std::string::npos)
                    throw CliError("bad index list '" + index_list + "'");
                idx.push_back(static_cast<unsigned>(std::stoul(part)));
            }
            const Bytes x = !x_bits.empty() ? parse_bits(width, x_bits)
                            : !x_hex.empty() ? from_hex(width, x_hex)
                                             : Bytes(width / 8);
            widx_selector* sel = nullptr;
            check(widx_selector_new(width, idx.data(), idx.size(), &sel), "building selector");
            std::unique_ptr<widx_selector, decltype(&widx_selector_free)> guard(sel, widx_selector_free);
            const std::size_t wb = width / 8;
            Bytes phases(8 * wb), masks(8 * wb);
            check(widx_selector_trace(sel, x.data(), phases.data(), masks.data()), "tracing");
            std::string s;
            for (unsigned p = 0; p < 8; ++p) {
                const Bytes xp(phases.begin() + p * wb, phases.begin() + (p + 1) * wb);
                const Bytes mp(masks.begin() + p * wb, masks.begin() + (p + 1) * wb);
                s += "phase " + std::to_string(p) + " x " + to_hex(width, xp) + " mask " + to_hex(width, mp);
                if (width == 16) s += "  [" + bits_of(xp) + "] [" + bits_of(mp) + "]";
                s += "\n";
            }
            if (show_plan) {
                Bytes words(widx_selector_word_count(sel) * wb);
                check(widx_selector_words(sel, words.data()), "plan words");
                for (unsigned i = 0; i < widx_selector_word_count(sel); ++i)
                    s += "plan " + std::to_string(i) + " " + to_hex(width, words.data() + i * wb) + "\n";
            }
            std::cout << s;
            return exit_pass;
        }
    } catch (const CliError& e) {
        std::cerr << "widx: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "widx: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
