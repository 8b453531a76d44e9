#include "selfcheck.hpp"

#include <functional>
#include <iostream>
#include <random>

#include "fsi/companion.hpp"
#include "fsi/pairbuilder.hpp"

namespace fsi_cli {

using namespace fsi;

namespace {

Word random_word(std::mt19937& rng, size_t len, int k) {
    std::vector<uint8_t> s(len);
    for (auto& c : s) c = static_cast<uint8_t>(rng() % static_cast<uint32_t>(k));
    return Word(std::move(s));
}

Shuffler random_shuffler(std::mt19937& rng, int k, uint32_t max_states) {
    Shuffler s;
    s.k = k;
    s.num_states = 1 + rng() % max_states;
    s.start = rng() % s.num_states;
    s.tau.resize(s.num_states);
    for (auto& t : s.tau) t = static_cast<uint8_t>(1 + rng() % 2);
    s.delta.resize(static_cast<size_t>(s.num_states) * static_cast<size_t>(k));
    for (auto& d : s.delta) d = rng() % s.num_states;
    return s;
}

bool check_words() {
    std::mt19937 rng(101);
    if (champernowne_prefix(10, 10).str() != "1234567891") return false;
    if (champernowne_prefix(2, 6).str() != "110111") return false;
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 2);
        const size_t len = 1 + rng() % 30;
        const size_t r = 1 + rng() % 3;
        Word u = random_word(rng, len, k);
        uint64_t words = 1, total = 0;
        for (size_t i = 0; i < r; ++i) words *= static_cast<uint64_t>(k);
        for (uint64_t wi = 0; wi < words; ++wi)
            total += occ_aligned(u, word_from_index(wi, r, k), r);
        if (total != len / r) return false;
    }
    return true;
}

bool check_shuffler() {
    std::mt19937 rng(102);
    for (int trial = 0; trial < 200; ++trial) {
        Shuffler s = random_shuffler(rng, 2, 8);
        auto back = decode(encode(s), 2);
        if (!back || encode(*back) != encode(s)) return false;
        const size_t n = 1 + rng() % 10;
        Word x1 = random_word(rng, n + 4, 2), y1 = random_word(rng, n + 4, 2);
        std::vector<uint8_t> x2 = x1.symbols(), y2 = y1.symbols();
        for (size_t i = n; i < x2.size(); ++i) x2[i] = static_cast<uint8_t>(rng() % 2);
        for (size_t i = n; i < y2.size(); ++i) y2[i] = static_cast<uint8_t>(rng() % 2);
        if (!(run_n(s, x1, y1, n).out == run_n(s, Word(x2), Word(y2), n).out)) return false;
    }
    return encode(enumerate_shuffler(12, 2)) == "100" &&
           encode(enumerate_shuffler(13, 2)) == "101";
}

bool check_probabilities() {
    std::mt19937 rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        Shuffler s = random_shuffler(rng, 2, 4);
        const long n = 1 + static_cast<long>(rng() % 5);
        const long lp = static_cast<long>(rng() % (n + 1));
        Word up = random_word(rng, static_cast<size_t>(lp), 2);
        Word vp = random_word(rng, static_cast<size_t>(lp), 2);
        Word w = word_from_index(rng() % 2, 1, 2);
        CountDistribution dp = dp_count_distribution(s, n, 1, w, up, vp);
        if (!(dp == brute_force_distribution(s, n, 1, w, up, vp))) return false;
        if (dp.total() != pow_int(2, n)) return false;
    }
    return true;
}

bool check_schedule() {
    Schedule sched(2, 1);
    if (sched.active_set(16) != std::vector<long>{1, 2, 3}) return false;
    if (Schedule::choose_m0(100) != 3) return false;
    for (long n : {3L, 16L, 81L, 625L}) {
        auto [lo, hi] = eps_bounds(2, n, 512);
        const Rational stored = sched.params_of(n).eps;
        const Rational step = make_rational(1, pow_int(2, sched.eps_bits()));
        if (!(stored <= lo && hi < stored + step)) return false;
    }
    return true;
}

bool check_pairbuilder(int threads) {
    Schedule sched(2, 1);
    std::mt19937 rng(104);
    for (int trial = 0; trial < 4; ++trial) {
        const long n = 8 + static_cast<long>(rng() % 3);
        const size_t L = rng() % 3;
        Word u = random_word(rng, L, 2), v = random_word(rng, L, 2);
        Rational rhs(0);
        for (uint8_t a = 0; a < 2; ++a)
            for (uint8_t b = 0; b < 2; ++b)
                rhs += bad_mass(n, {u.appended(a), v.appended(b)}, sched, nullptr, threads);
        if (bad_mass(n, {u, v}, sched, nullptr, threads) != rhs / 4) return false;
    }
    BuildOptions opts;
    opts.max_checkpoint = 16;
    opts.threads = threads;
    GreedyResult res = greedy_build(4, sched, opts);
    return res.report.phi_always_below_one && res.x.size() == 4;
}

bool check_companion(int threads) {
    auto champ = WordSource::champernowne(2);
    const Caps caps{3, 1 << 12};
    const SliceSpec spec{1, 2};
    Rational total = slice_measure(spec, *champ, Word(), 2, caps, threads);
    Rational split(0);
    for (uint8_t a = 0; a < 2; ++a)
        split += slice_measure(spec, *champ, Word().appended(a), 2, caps, threads);
    if (total != split) return false;
    if (tail(2) != tail(1) / 4) return false;
    ExtractResult res = extract(*champ, {spec}, 4, 2, caps, threads);
    return res.y.size() == 4;
}

}  // namespace

bool run_selfcheck(int threads) {
    const std::pair<const char*, std::function<bool()>> suites[] = {
        {"words", [] { return check_words(); }},
        {"shuffler", [] { return check_shuffler(); }},
        {"probabilities", [] { return check_probabilities(); }},
        {"schedule", [] { return check_schedule(); }},
        {"pairbuilder", [&] { return check_pairbuilder(threads); }},
        {"companion", [&] { return check_companion(threads); }},
    };
    bool all = true;
    for (const auto& [name, fn] : suites) {
        bool ok = false;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            std::cout << "FAIL " << name << " (" << e.what() << ")\n";
            all = false;
            continue;
        }
        std::cout << (ok ? "ok " : "FAIL ") << name << '\n';
        if (!ok) all = false;
    }
    return all;
}

}  // namespace fsi_cli
