#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "fsi/companion.hpp"
#include "fsi/pairbuilder.hpp"
#include "selfcheck.hpp"

using namespace fsi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitBudget = 2;
constexpr int kExitUsage = 64;

struct ConfigDefaults {
    std::optional<int> k;
    std::optional<long> m0;
    std::optional<long> n0;
    std::optional<int> eps_bits;
};

// plain key=value lines; '#' starts a comment, blank lines ignored
ConfigDefaults load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw domain_error("cannot open config file: " + path);
    ConfigDefaults cfg;
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            s.erase(0, s.find_first_not_of(ws));
            const size_t last = s.find_last_not_of(ws);
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;
        if (key == "k")
            cfg.k = std::stoi(value);
        else if (key == "m0")
            cfg.m0 = std::stol(value);
        else if (key == "n0")
            cfg.n0 = std::stol(value);
        else if (key == "eps_bits")
            cfg.eps_bits = std::stoi(value);
        else
            throw domain_error("unknown config key: " + key);
    }
    return cfg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw domain_error("cannot open output file: " + path);
    out << content;
    if (!out) throw domain_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw domain_error("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// flags shared by the schedule-driven subcommands
struct ScheduleFlags {
    int k = 2;
    long m0 = -1;
    bool auto_m0 = false;
    long n0 = 1;
    int eps_bits = 64;

    void attach(CLI::App* cmd) {
        cmd->add_option("--k", k, "alphabet size");
        cmd->add_option("--m0", m0, "checkpoint offset (fixed)");
        cmd->add_flag("--auto-m0", auto_m0, "derive the least feasible m0 from --n0");
        cmd->add_option("--n0", n0, "lower bound for the first checkpoint length");
        cmd->add_option("--eps-bits", eps_bits, "fractional bits of the stored tolerance");
    }

    void apply(const ConfigDefaults& cfg, const CLI::App* cmd) {
        if (cfg.k && cmd->count("--k") == 0) k = *cfg.k;
        if (cfg.m0 && cmd->count("--m0") == 0 && !auto_m0) m0 = *cfg.m0;
        if (cfg.n0 && cmd->count("--n0") == 0) n0 = *cfg.n0;
        if (cfg.eps_bits && cmd->count("--eps-bits") == 0) eps_bits = *cfg.eps_bits;
    }

    Schedule build() const {
        check_text_alphabet(k);
        const long effective = (m0 >= 0 && !auto_m0) ? m0 : Schedule::choose_m0(n0);
        return Schedule(k, effective, n0, eps_bits);
    }

    static void check_text_alphabet(int k) {
        Alphabet alphabet(k);
        if (alphabet.k > 36)
            throw domain_error("text serialization supports alphabets up to 36 symbols");
    }
};

std::string checkpoint_lines(const std::vector<CheckpointRecord>& records) {
    std::ostringstream out;
    for (const CheckpointRecord& cp : records) {
        out << "CHECKPOINT " << cp.j << ' ' << (cp.pass ? "pass" : "fail");
        for (const Violation& v : cp.violations)
            out << ' ' << v.i << ':' << v.r << ':' << v.w.str() << ':' << v.count;
        out << '\n';
    }
    return out.str();
}

int dispatch(int argc, char** argv) {
    // the config file provides defaults only; explicit flags win
    ConfigDefaults cfg;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") cfg = load_config(argv[i + 1]);

    CLI::App app{"exact constructions of finite-state independent normal words"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value defaults (k, m0, n0, eps_bits)");
    int threads = 1;
    app.add_option("--threads", threads, "worker threads (results are identical)");

    // ---- shuffler ----
    auto* shuffler_cmd = app.add_subcommand("shuffler", "inspect and run machines");
    shuffler_cmd->require_subcommand(1);

    auto* sh_list = shuffler_cmd->add_subcommand("list", "enumerate machines by index");
    int list_k = 2;
    uint64_t list_from = 1, list_to = 16;
    sh_list->add_option("--k", list_k, "alphabet size");
    sh_list->add_option("--from", list_from, "first index");
    sh_list->add_option("--to", list_to, "last index");

    auto* sh_decode = shuffler_cmd->add_subcommand("decode", "decode a canonical bit string");
    std::string decode_bits;
    int decode_k = 2;
    sh_decode->add_option("bits", decode_bits, "encoding ('-' for the empty string)")
        ->required();
    sh_decode->add_option("--k", decode_k, "alphabet size");

    auto* sh_run = shuffler_cmd->add_subcommand("run", "shuffle two word sources");
    std::string run_machine, run_x, run_y;
    uint64_t run_len = 0;
    sh_run->add_option("--shuffler", run_machine, "machine text file")->required();
    sh_run->add_option("--x", run_x, "tape 1 source")->required();
    sh_run->add_option("--y", run_y, "tape 2 source")->required();
    sh_run->add_option("--n", run_len, "output length")->required();

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "block statistics of word prefixes");
    stats_cmd->require_subcommand(1);
    std::string stats_source;
    int stats_k = 2;
    uint64_t stats_n = 0;
    uint64_t stats_m = 1;
    std::string stats_eps;

    auto* st_freq = stats_cmd->add_subcommand("freq", "per-block counts and max deviation");
    st_freq->add_option("--source", stats_source, "word source")->required();
    st_freq->add_option("--k", stats_k, "alphabet size");
    st_freq->add_option("--n", stats_n, "prefix length")->required()->check(CLI::Range(uint64_t{1}, std::numeric_limits<uint64_t>::max()));
    st_freq->add_option("--m", stats_m, "block length");

    auto* st_test = stats_cmd->add_subcommand("test", "deviation test at a tolerance");
    st_test->add_option("--source", stats_source, "word source")->required();
    st_test->add_option("--k", stats_k, "alphabet size");
    st_test->add_option("--n", stats_n, "prefix length")->required()->check(CLI::Range(uint64_t{1}, std::numeric_limits<uint64_t>::max()));
    st_test->add_option("--m", stats_m, "block length");
    st_test->add_option("--eps", stats_eps, "tolerance (rational)")->required();

    // ---- prob ----
    auto* prob_cmd = app.add_subcommand("prob", "exact conditional count laws");
    prob_cmd->require_subcommand(1);
    std::string prob_machine, prob_w, prob_px, prob_py, prob_out;
    long prob_n = 0, prob_r = 1;
    uint64_t prob_budget = uint64_t{1} << 24;

    auto add_prob_flags = [&](CLI::App* cmd) {
        cmd->add_option("--shuffler", prob_machine, "machine text file")->required();
        cmd->add_option("--n", prob_n, "output length")->required();
        cmd->add_option("--r", prob_r, "block length");
        cmd->add_option("--w", prob_w, "block (length r)")->required();
        cmd->add_option("--prefix-x", prob_px, "fixed prefix of tape 1");
        cmd->add_option("--prefix-y", prob_py, "fixed prefix of tape 2");
        cmd->add_option("--out", prob_out, "also write the raw-numerator form here");
    };
    auto* pr_dp = prob_cmd->add_subcommand("dp", "dynamic program");
    add_prob_flags(pr_dp);
    auto* pr_oracle = prob_cmd->add_subcommand("oracle", "exhaustive enumeration");
    add_prob_flags(pr_oracle);
    pr_oracle->add_option("--max-enum", prob_budget, "largest tape-extension count");

    auto* pr_bound = prob_cmd->add_subcommand("bound", "binomial tail upper bound");
    long bound_m = 0;
    std::string bound_p, bound_delta;
    pr_bound->add_option("--M", bound_m, "trial count")->required();
    pr_bound->add_option("--p", bound_p, "success probability (rational)")->required();
    pr_bound->add_option("--delta", bound_delta, "relative deviation (rational)")->required();

    // ---- pair ----
    auto* pair_cmd = app.add_subcommand("pair", "greedy independent-pair construction");
    pair_cmd->require_subcommand(1);

    auto* pb = pair_cmd->add_subcommand("build", "emit prefixes of the pair");
    long build_n = 0;
    long build_budget = -1;
    std::string out_x, out_y, out_report;
    pb->add_option("--N", build_n, "output length")->required();
    ScheduleFlags pb_sched;
    pb_sched.attach(pb);
    pb->add_option("--max-checkpoint", build_budget, "largest checkpoint length evaluated");
    pb->add_option("--out-x", out_x, "tape 1 output file")->required();
    pb->add_option("--out-y", out_y, "tape 2 output file")->required();
    pb->add_option("--report", out_report, "step/event report file")->required();

    auto* pv = pair_cmd->add_subcommand("verify", "recount checkpoint constraints");
    std::string verify_x, verify_y;
    pv->add_option("--x", verify_x, "tape 1 word file")->required();
    pv->add_option("--y", verify_y, "tape 2 word file")->required();
    ScheduleFlags pv_sched;
    pv_sched.attach(pv);

    // ---- companion ----
    auto* comp_cmd = app.add_subcommand("companion", "computable companion construction");
    comp_cmd->require_subcommand(1);
    auto* cb = comp_cmd->add_subcommand("build", "choose cutoffs and extract a prefix");
    std::string comp_source = "champernowne", comp_out, comp_report;
    int comp_k = 2;
    long comp_stages = 1;
    uint64_t comp_length = 0;
    Caps comp_caps;
    cb->add_option("--source", comp_source, "word source for the fixed input");
    cb->add_option("--k", comp_k, "alphabet size");
    cb->add_option("--stages", comp_stages, "number of slice stages");
    cb->add_option("--length", comp_length, "companion prefix length")->required();
    cb->add_option("--max-window", comp_caps.max_window, "largest window start tried");
    cb->add_option("--max-enum", comp_caps.max_enum, "largest enumeration size");
    cb->add_option("--out", comp_out, "companion word file")->required();
    cb->add_option("--report", comp_report, "cutoff/trace report file")->required();

    // ---- verify ----
    auto* verify_cmd = app.add_subcommand("verify", "built-in invariant sweeps");
    verify_cmd->require_subcommand(1);
    auto* verify_all = verify_cmd->add_subcommand("all", "run every suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    if (sh_list->parsed()) {
        ScheduleFlags::check_text_alphabet(list_k);
        for (uint64_t i = list_from; i <= list_to; ++i) {
            const std::string bits = index_bits(i);
            const bool valid = decode(bits, list_k).has_value();
            std::cout << i << ' ' << (bits.empty() ? "-" : bits) << ' '
                      << (valid ? "valid" : "trivial") << " enc="
                      << encode(enumerate_shuffler(i, list_k)) << '\n';
        }
        return kExitOk;
    }
    if (sh_decode->parsed()) {
        ScheduleFlags::check_text_alphabet(decode_k);
        const std::string bits = decode_bits == "-" ? "" : decode_bits;
        auto s = decode(bits, decode_k);
        if (!s) throw domain_error("not a canonical machine encoding: '" + bits + "'");
        std::cout << s->text();
        return kExitOk;
    }
    if (sh_run->parsed()) {
        Shuffler s = Shuffler::parse_text(read_file(run_machine));
        auto xs = WordSource::from_spec(run_x, s.k);
        auto ys = WordSource::from_spec(run_y, s.k);
        std::cout << run_n(s, xs->prefix(run_len), ys->prefix(run_len), run_len).out.str()
                  << '\n';
        return kExitOk;
    }
    if (st_freq->parsed() || st_test->parsed()) {
        ScheduleFlags::check_text_alphabet(stats_k);
        auto src = WordSource::from_spec(stats_source, stats_k);
        Word u = src->prefix(stats_n);
        if (st_freq->parsed()) {
            const uint64_t words = mpz_get_ui(pow_int(stats_k, static_cast<long>(stats_m)).get_mpz_t());
            for (uint64_t wi = 0; wi < words; ++wi) {
                Word w = word_from_index(wi, stats_m, stats_k);
                const uint64_t c = occ_overlapping(u, w);
                std::cout << w.str() << ' ' << c << ' '
                          << fraction_str(make_rational(c, stats_n)) << '\n';
            }
            std::cout << "delta " << fraction_str(max_deviation(u, stats_m, stats_k)) << '\n';
        } else {
            const bool pass = run_test(u, stats_m, parse_rational(stats_eps), stats_k);
            std::cout << (pass ? "pass" : "fail") << '\n';
        }
        return kExitOk;
    }
    if (pr_dp->parsed() || pr_oracle->parsed()) {
        Shuffler s = Shuffler::parse_text(read_file(prob_machine));
        Word w = Word::parse(prob_w, s.k);
        Word up = Word::parse(prob_px, s.k);
        Word vp = Word::parse(prob_py, s.k);
        CountDistribution dist =
            pr_dp->parsed() ? dp_count_distribution(s, prob_n, prob_r, w, up, vp)
                            : brute_force_distribution(s, prob_n, prob_r, w, up, vp, prob_budget);
        for (long c = 0; c <= dist.block_count(); ++c)
            std::cout << c << ' ' << fraction_str(dist.prob(c)) << '\n';
        if (!prob_out.empty()) write_file(prob_out, dist.serialize());
        return kExitOk;
    }
    if (pr_bound->parsed()) {
        const double b = chernoff_bound(bound_m, parse_rational(bound_p),
                                        parse_rational(bound_delta));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", b);
        std::cout << buf << '\n';
        return kExitOk;
    }
    if (pb->parsed()) {
        pb_sched.apply(cfg, pb);
        Schedule sched = pb_sched.build();
        BuildOptions opts;
        opts.max_checkpoint = build_budget;
        opts.threads = threads;
        GreedyResult res = greedy_build(build_n, sched, opts);
        write_file(out_x, res.x.str());
        write_file(out_y, res.y.str());
        write_file(out_report, res.report.render());
        std::cerr << "dp-evals " << res.report.dp_evals << " cache-hits "
                  << res.report.cache_hits << '\n';
        return kExitOk;
    }
    if (pv->parsed()) {
        pv_sched.apply(cfg, pv);
        Schedule sched = pv_sched.build();
        Word x = Word::parse(read_file(verify_x), sched.k());
        Word y = Word::parse(read_file(verify_y), sched.k());
        auto records = verify_checkpoints(x, y, sched);
        if (records.empty())
            std::cout << "no checkpoint fits within prefix length " << x.size() << '\n';
        else
            std::cout << checkpoint_lines(records);
        return kExitOk;
    }
    if (cb->parsed()) {
        ScheduleFlags::check_text_alphabet(comp_k);
        auto src = WordSource::from_spec(comp_source, comp_k);
        CompanionResult res =
            build_companion(*src, comp_stages, comp_length, comp_k, comp_caps, threads);
        write_file(comp_out, res.y.str());
        write_file(comp_report, res.report.render());
        return kExitOk;
    }
    if (verify_all->parsed()) {
        return fsi_cli::run_selfcheck(threads) ? kExitOk : kExitDomain;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const budget_error& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return kExitBudget;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}
