#include "fsi/companion.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "fsi/parallel.hpp"

namespace fsi {

bool slice_membership(const Shuffler& s, long n, long m, const Rational& eps, const Word& xp,
                      const Word& yp) {
    if (static_cast<long>(xp.size()) < n || static_cast<long>(yp.size()) < n)
        throw domain_error("slice_membership: need prefixes of length >= n");
    if (m < 1) throw domain_error("slice_membership: need m >= 1");
    Word out = run_n(s, xp, yp, static_cast<size_t>(n)).out;
    return block_test(out, static_cast<size_t>(m), eps, s.k);
}

Rational tail(long L) {
    if (L < 0) throw domain_error("tail: need L >= 0");
    return make_rational(1, 3 * pow_int(4, L));
}

namespace {

std::vector<Shuffler> distinct_machines(long t, int k) {
    std::vector<Shuffler> machines;
    std::vector<std::string> encs;
    for (long i = 1; i <= t; ++i) {
        Shuffler s = enumerate_shuffler(static_cast<uint64_t>(i), k);
        std::string enc = encode(s);
        if (std::find(encs.begin(), encs.end(), enc) == encs.end()) {
            encs.push_back(std::move(enc));
            machines.push_back(std::move(s));
        }
    }
    return machines;
}

// All tests of one slice against a fixed y (|y| >= N^2), with incremental
// block counts per (machine, ell) so the n-sweep stays linear.
bool slice_pass(const std::vector<Shuffler>& machines, const SliceSpec& spec, const Word& xp,
                const Word& y, int k) {
    const long d = spec.deciding_length();
    if (spec.t > 62) throw domain_error("slice test: stage index too large");
    const uint64_t tol_den = uint64_t{1} << spec.t;  // eps = 1/tol_den
    for (const Shuffler& s : machines) {
        const Word out = run_n(s, xp, y, static_cast<size_t>(d)).out;
        for (long ell = 1; ell <= spec.t; ++ell) {
            uint64_t span = 1;
            for (long i = 0; i < ell; ++i) {
                span *= static_cast<uint64_t>(k);
                if (span > (uint64_t{1} << 24))
                    throw domain_error("slice test: k^ell too large");
            }
            std::vector<uint32_t> counts(span, 0);
            uint64_t code = 0;
            uint64_t mod = 1;
            for (long i = 0; i + 1 < ell; ++i) mod *= static_cast<uint64_t>(k);
            for (long n = 1; n <= d; ++n) {
                const uint8_t sym = out[static_cast<size_t>(n - 1)];
                if (n > ell) code -= mod * out[static_cast<size_t>(n - 1 - ell)];
                code = code * static_cast<uint64_t>(k) + sym;
                if (n >= ell) ++counts[code];
                if (n < spec.N) continue;
                if (n < ell) {
                    // no window fits: the test reads k^-ell <= eps
                    if (tol_den > span) return false;
                    continue;
                }
                // |c*k^ell - n| * 2^t <= n * k^ell for every block
                const uint64_t rhs = static_cast<uint64_t>(n) * span;
                bool ok = true;
                for (uint32_t c : counts) {
                    const uint64_t scaled = static_cast<uint64_t>(c) * span;
                    const uint64_t diff =
                        scaled > static_cast<uint64_t>(n) ? scaled - n : n - scaled;
                    if (static_cast<unsigned __int128>(diff) * tol_den > rhs) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) return false;
            }
        }
    }
    return true;
}

// k^e, saturating above the limit
uint64_t checked_pow(int k, long e, uint64_t limit) {
    unsigned __int128 p = 1;
    for (long i = 0; i < e; ++i) {
        p *= static_cast<unsigned>(k);
        if (p > limit) return std::numeric_limits<uint64_t>::max();
    }
    return static_cast<uint64_t>(p);
}

}  // namespace

Rational slice_measure(const SliceSpec& spec, WordSource& x, const Word& v, int k,
                       const Caps& caps, int threads) {
    if (spec.N < 2) throw domain_error("slice: window start must be >= 2");
    if (spec.t < 1) throw domain_error("slice: stage index must be >= 1");
    const long d = spec.deciding_length();
    if (static_cast<long>(v.size()) > d)
        throw domain_error("slice_measure: cylinder deeper than the deciding length");
    const auto machines = distinct_machines(spec.t, k);
    const Word xp = x.prefix(static_cast<size_t>(d));

    if (static_cast<long>(v.size()) == d) {
        return slice_pass(machines, spec, xp, v, k) ? make_rational(1, pow_int(k, d))
                                                    : Rational(0);
    }

    const long free = d - static_cast<long>(v.size());
    const uint64_t total = checked_pow(k, free, caps.max_enum);
    if (total > caps.max_enum)
        throw budget_error("slice_measure: needs " + pow_int(k, free).get_str() +
                           " enumerations, budget " + std::to_string(caps.max_enum));

    auto chunk = [&](size_t lo, size_t hi) -> uint64_t {
        uint64_t passes = 0;
        for (uint64_t idx = lo; idx < hi; ++idx) {
            std::vector<uint8_t> syms = v.symbols();
            Word ext = word_from_index(idx, static_cast<size_t>(free), k);
            syms.insert(syms.end(), ext.symbols().begin(), ext.symbols().end());
            if (slice_pass(machines, spec, xp, Word(std::move(syms)), k)) ++passes;
        }
        return passes;
    };
    const uint64_t passes = parallel_sum<uint64_t>(total, threads, 0, chunk);
    return make_rational(BigInt(static_cast<unsigned long>(passes)), pow_int(k, d));
}

namespace {

Rational stage_threshold(long t) {
    // 1 - 2^-2t
    return Rational(1) - make_rational(1, pow_int(4, t));
}

struct MeasureOracle {
    WordSource& x;
    int k;
    const Caps& caps;
    int threads;
    std::map<std::pair<long, long>, Rational> memo;  // (t, N) -> measure of the full slice

    Rational full_measure(long t, long N) {
        auto key = std::make_pair(t, N);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        Rational mu = slice_measure({t, N}, x, Word(), k, caps, threads);
        memo.emplace(key, mu);
        return mu;
    }
};

}  // namespace

std::vector<SliceSpec> choose_cutoffs(WordSource& x, long T, int k, const Caps& caps,
                                      std::vector<Rational>* stage_measures, int threads) {
    if (T < 0) throw domain_error("choose_cutoffs: need T >= 0");
    std::vector<SliceSpec> specs;
    std::vector<Rational> measures;
    if (T == 0) {
        if (stage_measures) stage_measures->clear();
        return specs;
    }

    MeasureOracle oracle{x, k, caps, threads, {}};

    // one-step lookahead: a candidate cutoff for stage t is acceptable only
    // if stage t+1 (when it exists) has a witness within the quadratic range
    auto has_witness = [&](long stage, long lo_excl, long hi) -> bool {
        if (stage > T) return true;
        for (long m = lo_excl + 1; m <= hi; ++m) {
            if (m > caps.max_window) return false;
            if (checked_pow(k, m * m, caps.max_enum) > caps.max_enum) return false;
            if (oracle.full_measure(stage, m) >= stage_threshold(stage)) return true;
        }
        return false;
    };

    auto search_fail = [&](long stage, long best_n, const Rational& best_mu) {
        std::ostringstream msg;
        msg << "choose_cutoffs: stage " << stage << " exhausted caps (max window "
            << caps.max_window << ", max enumeration " << caps.max_enum << "); ";
        if (best_n > 0)
            msg << "best measure " << fraction_str(best_mu) << " at N=" << best_n;
        else
            msg << "no candidate window reached a positive measure";
        throw budget_error(msg.str());
    };

    // stage 1 fixes N_1 (and N_2 when T >= 2) through the nested search
    long n1 = -1, n2 = -1;
    {
        Rational best_mu(0);
        long best_n = 0;
        for (long n = 2;; ++n) {
            if (n > caps.max_window || checked_pow(k, n * n, caps.max_enum) > caps.max_enum)
                search_fail(1, best_n, best_mu);
            Rational mu = oracle.full_measure(1, n);
            if (mu > best_mu) {
                best_mu = mu;
                best_n = n;
            }
            if (mu < stage_threshold(1)) continue;
            if (T >= 2) {
                bool found = false;
                for (long m = n + 1; m <= n * n && !found; ++m) {
                    if (m > caps.max_window ||
                        checked_pow(k, m * m, caps.max_enum) > caps.max_enum)
                        break;
                    if (oracle.full_measure(2, m) >= stage_threshold(2) &&
                        has_witness(3, m, m * m)) {
                        n2 = m;
                        found = true;
                    }
                }
                if (!found) continue;
            }
            n1 = n;
            break;
        }
    }
    specs.push_back({1, n1});
    measures.push_back(oracle.full_measure(1, n1));
    if (T >= 2) {
        specs.push_back({2, n2});
        measures.push_back(oracle.full_measure(2, n2));
    }

    // each further stage extends by one-step lookahead from the previous cutoff
    for (long t = 3; t <= T; ++t) {
        const long prev = specs.back().N;
        long chosen = -1;
        Rational best_mu(0);
        long best_n = 0;
        for (long m = prev + 1; m <= prev * prev; ++m) {
            if (m > caps.max_window || checked_pow(k, m * m, caps.max_enum) > caps.max_enum)
                break;
            Rational mu = oracle.full_measure(t, m);
            if (mu > best_mu) {
                best_mu = mu;
                best_n = m;
            }
            if (mu >= stage_threshold(t) && has_witness(t + 1, m, m * m)) {
                chosen = m;
                break;
            }
        }
        if (chosen < 0) search_fail(t, best_n, best_mu);
        specs.push_back({t, chosen});
        measures.push_back(oracle.full_measure(t, chosen));
    }

    if (stage_measures) *stage_measures = measures;
    return specs;
}

namespace {

// Exact measure of [v] within the intersection of the first `stages` slices.
// Decided by the largest deciding length among those slices.
class IntersectionMeasure {
  public:
    IntersectionMeasure(WordSource& x, const std::vector<SliceSpec>& specs, int k,
                        const Caps& caps, int threads)
        : x_(x), specs_(specs), k_(k), caps_(caps), threads_(threads) {
        for (const SliceSpec& s : specs_)
            machines_.push_back(distinct_machines(s.t, k_));
    }

    long deciding_length(size_t stages) const {
        long d = 0;
        for (size_t t = 0; t < stages; ++t) d = std::max(d, specs_[t].deciding_length());
        return d;
    }

    Rational measure(size_t stages, const Word& v) {
        stages = std::min(stages, specs_.size());
        const std::string key = std::to_string(stages) + "|" + v.str();
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        Rational mu = compute(stages, v);
        memo_.emplace(key, mu);
        return mu;
    }

    bool member(size_t stages, const Word& y) {
        const long d = deciding_length(stages);
        const Word xp = x_.prefix(static_cast<size_t>(std::max<long>(d, 0)));
        for (size_t t = 0; t < stages; ++t)
            if (!slice_pass(machines_[t], specs_[t], xp, y, k_)) return false;
        return true;
    }

  private:
    Rational compute(size_t stages, const Word& v) {
        const long d = deciding_length(stages);
        if (static_cast<long>(v.size()) >= d) {
            // the cylinder decides every stage
            return member(stages, v) ? make_rational(1, pow_int(k_, static_cast<long>(v.size())))
                                     : Rational(0);
        }
        const long free = d - static_cast<long>(v.size());
        const uint64_t total = checked_pow(k_, free, caps_.max_enum);
        if (total > caps_.max_enum)
            throw budget_error("extract: intersection measure needs " +
                               pow_int(k_, free).get_str() + " enumerations, budget " +
                               std::to_string(caps_.max_enum));
        auto chunk = [&](size_t lo, size_t hi) -> uint64_t {
            uint64_t passes = 0;
            for (uint64_t idx = lo; idx < hi; ++idx) {
                std::vector<uint8_t> syms = v.symbols();
                Word ext = word_from_index(idx, static_cast<size_t>(free), k_);
                syms.insert(syms.end(), ext.symbols().begin(), ext.symbols().end());
                if (member(stages, Word(std::move(syms)))) ++passes;
            }
            return passes;
        };
        const uint64_t passes = parallel_sum<uint64_t>(total, threads_, 0, chunk);
        return make_rational(BigInt(static_cast<unsigned long>(passes)), pow_int(k_, d));
    }

    WordSource& x_;
    const std::vector<SliceSpec>& specs_;
    int k_;
    const Caps& caps_;
    int threads_;
    std::vector<std::vector<Shuffler>> machines_;
    std::map<std::string, Rational> memo_;
};

}  // namespace

Rational intersection_measure(WordSource& x, const std::vector<SliceSpec>& specs, size_t stages,
                              const Word& v, int k, const Caps& caps, int threads) {
    IntersectionMeasure meas(x, specs, k, caps, threads);
    return meas.measure(stages, v);
}

ExtractResult extract(WordSource& x, const std::vector<SliceSpec>& specs, size_t length, int k,
                      const Caps& caps, int threads) {
    for (size_t t = 0; t < specs.size(); ++t) {
        if (specs[t].t != static_cast<long>(t) + 1)
            throw domain_error("extract: stage indices must be 1..T in order");
        if (specs[t].N < 2) throw domain_error("extract: window start must be >= 2");
        if (t > 0) {
            if (specs[t].N <= specs[t - 1].N)
                throw domain_error("extract: cutoffs must increase strictly");
            if (specs[t].N > specs[t - 1].N * specs[t - 1].N)
                throw domain_error("extract: cutoff grows past the previous square");
        }
    }
    const long T = static_cast<long>(specs.size());
    IntersectionMeasure meas(x, specs, k, caps, threads);

    ExtractResult res;
    for (size_t ell = 0; ell < length; ++ell) {
        // least L whose threshold the current cylinder clears; beyond the
        // last stage only the tail keeps shrinking, so the search is capped
        // by the length at which even a single surviving point suffices
        const long deep = std::max<long>(meas.deciding_length(static_cast<size_t>(T)),
                                         static_cast<long>(res.y.size()));
        long l_max = T;
        while (Rational(k) * tail(l_max) >= make_rational(1, pow_int(k, deep))) ++l_max;

        long chosen_l = -1;
        Rational mu;
        for (long L = 0; L <= l_max; ++L) {
            mu = meas.measure(static_cast<size_t>(std::min(L, T)), res.y);
            if (mu > Rational(k) * tail(L)) {
                chosen_l = L;
                break;
            }
        }
        if (chosen_l < 0) {
            std::ostringstream msg;
            msg << "extract: no admissible stage at prefix length " << res.y.size()
                << "; surviving measure " << fraction_str(mu) << " with " << T
                << " stages intersected";
            throw budget_error(msg.str());
        }

        ExtractStep step;
        step.ell = ell;
        step.L = chosen_l;
        step.mu = mu;
        step.tail_val = tail(chosen_l);
        bool appended = false;
        for (uint8_t a = 0; a < k; ++a) {
            Rational child = meas.measure(static_cast<size_t>(std::min(chosen_l, T)),
                                          res.y.appended(a));
            step.child_mu.push_back(child);
            if (!appended && child > step.tail_val) {
                step.chose = a;
                appended = true;
            }
        }
        if (!appended) throw domain_error("extract: no symbol clears the tail threshold");
        res.y.push_back(step.chose);
        res.trace.push_back(std::move(step));
    }
    return res;
}

CompanionResult build_companion(WordSource& x, long T, size_t length, int k, const Caps& caps,
                                int threads) {
    CompanionResult res;
    res.report.specs = choose_cutoffs(x, T, k, caps, &res.report.stage_measures, threads);
    ExtractResult ext = extract(x, res.report.specs, length, k, caps, threads);
    res.y = ext.y;
    res.report.trace = std::move(ext.trace);

    for (const SliceSpec& spec : res.report.specs) {
        if (spec.deciding_length() <= static_cast<long>(res.y.size())) {
            const auto machines = distinct_machines(spec.t, k);
            const Word xp = x.prefix(static_cast<size_t>(spec.deciding_length()));
            res.report.recount.push_back(slice_pass(machines, spec, xp, res.y, k) ? 1 : 0);
        } else {
            res.report.recount.push_back(-1);
        }
    }
    return res;
}

std::string CompanionReport::render() const {
    std::ostringstream out;
    out << "# shuffler-encoding v1\n";
    for (size_t t = 0; t < specs.size(); ++t) {
        out << "CUTOFF " << specs[t].t << " N=" << specs[t].N;
        if (t < stage_measures.size()) out << " mu=" << fraction_str(stage_measures[t]);
        out << '\n';
    }
    for (const ExtractStep& step : trace) {
        out << step.ell << ' ' << step.L << " mu=" << fraction_str(step.mu)
            << " tail=" << fraction_str(step.tail_val) << " chose "
            << Word({step.chose}).str() << '\n';
    }
    for (size_t t = 0; t < recount.size(); ++t) {
        out << "RECOUNT " << specs[t].t << ' '
            << (recount[t] == 1 ? "member" : recount[t] == 0 ? "nonmember" : "undecided")
            << '\n';
    }
    return out.str();
}

}  // namespace fsi
