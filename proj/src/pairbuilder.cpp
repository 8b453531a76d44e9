#include "fsi/pairbuilder.hpp"

#include <map>
#include <sstream>

#include "fsi/parallel.hpp"

namespace fsi {

namespace {

struct MachineGroup {
    Shuffler machine;
    std::string enc;
    uint64_t multiplicity = 0;
};

// Group the enumeration S_1..S_t by canonical encoding; duplicates (mostly
// the trivial fallback) collapse to one machine with a multiplicity.
std::vector<MachineGroup> group_machines(long t, int k) {
    std::vector<MachineGroup> groups;
    std::map<std::string, size_t> by_enc;
    for (long i = 1; i <= t; ++i) {
        Shuffler s = enumerate_shuffler(static_cast<uint64_t>(i), k);
        std::string enc = encode(s);
        auto it = by_enc.find(enc);
        if (it == by_enc.end()) {
            by_enc.emplace(enc, groups.size());
            groups.push_back({std::move(s), std::move(enc), 1});
        } else {
            ++groups[it->second].multiplicity;
        }
    }
    return groups;
}

struct Term {
    size_t group;
    long r;
    uint64_t w_idx;
};

std::vector<Term> family_terms(const std::vector<MachineGroup>& groups, long ell, int k) {
    std::vector<Term> terms;
    for (size_t g = 0; g < groups.size(); ++g) {
        for (long r = 1; r <= ell; ++r) {
            const uint64_t words = static_cast<uint64_t>(mpz_get_ui(pow_int(k, r).get_mpz_t()));
            for (uint64_t wi = 0; wi < words; ++wi) terms.push_back({g, r, wi});
        }
    }
    return terms;
}

Rational checkpoint_bound(long nj) {
    return make_rational(1, BigInt(nj) * BigInt(nj));
}

}  // namespace

Rational bad_mass(long n, const PrefixPair& pair, const Schedule& sched, ProbCache* cache,
                  int threads) {
    if (static_cast<long>(pair.length()) > n)
        throw domain_error("bad_mass: prefix longer than n");
    const LengthParams params = sched.params_of(n);
    const int k = sched.k();
    if (params.ell_n == 0) return Rational(0);

    const auto groups = group_machines(params.t_n, k);
    const auto terms = family_terms(groups, params.ell_n, k);

    ProbCache local;
    ProbCache& probs = cache ? *cache : local;

    auto chunk = [&](size_t lo, size_t hi) {
        Rational sum(0);
        for (size_t idx = lo; idx < hi; ++idx) {
            const Term& t = terms[idx];
            const MachineGroup& g = groups[t.group];
            const Word w = word_from_index(t.w_idx, static_cast<size_t>(t.r), k);
            Rational p = probs.get_or_compute(
                ProbCache::key(g.enc, k, params.eps, n, t.r, w, pair.u, pair.v), [&] {
                    return failure_probability(
                        dp_count_distribution(g.machine, n, t.r, w, pair.u, pair.v), params.eps);
                });
            sum += p * Rational(static_cast<unsigned long>(g.multiplicity));
        }
        return sum;
    };
    return parallel_sum(terms.size(), threads, Rational(0), chunk);
}

Rational potential(long L, const PrefixPair& pair, const Schedule& sched, long max_checkpoint,
                   ProbCache* cache, int threads) {
    if (static_cast<long>(pair.length()) != L)
        throw domain_error("potential: prefix length must equal L");
    Rational phi(0);
    for (long j : sched.active_set(L)) {
        const long nj = sched.checkpoints(j).first;
        if (max_checkpoint >= 0 && nj > max_checkpoint) continue;
        phi += bad_mass(nj, pair, sched, cache, threads);
    }
    return phi;
}

namespace {

// Recount one constraint family directly on fixed prefixes. Runs every
// machine on the words and compares aligned counts against the strict
// tolerance; no probabilities involved.
CheckpointRecord recount_family(const Word& x, const Word& y, long j, long nj,
                                const Schedule& sched) {
    const LengthParams params = sched.params_of(nj);
    const int k = sched.k();
    CheckpointRecord rec;
    rec.j = j;
    rec.nj = nj;
    rec.pass = true;

    std::map<std::string, Word> output_cache;
    for (long i = 1; i <= params.t_n; ++i) {
        Shuffler s = enumerate_shuffler(static_cast<uint64_t>(i), k);
        const std::string enc = encode(s);
        auto it = output_cache.find(enc);
        if (it == output_cache.end())
            it = output_cache.emplace(enc, run_n(s, x, y, static_cast<size_t>(nj)).out).first;
        const Word& out = it->second;
        for (long r = 1; r <= params.ell_n; ++r) {
            const long m = nj / r;
            const BigInt kr = pow_int(k, r);
            const BigInt rhs = params.eps.get_num() * m * kr;
            const uint64_t words = mpz_get_ui(pow_int(k, r).get_mpz_t());
            for (uint64_t wi = 0; wi < words; ++wi) {
                Word w = word_from_index(wi, static_cast<size_t>(r), k);
                const uint64_t c = occ_aligned(out, w, static_cast<size_t>(r));
                // good event: |c - m/k^r| < eps*m, strict
                BigInt lhs = abs(BigInt(static_cast<unsigned long>(c)) * kr - m) * params.eps.get_den();
                if (!(lhs < rhs)) {
                    rec.pass = false;
                    rec.violations.push_back({static_cast<uint64_t>(i), r, std::move(w), c});
                }
            }
        }
    }
    return rec;
}

}  // namespace

GreedyResult greedy_build(long N, const Schedule& sched, const BuildOptions& opts) {
    if (N < 0) throw domain_error("greedy_build: need N >= 0");
    const int k = sched.k();
    GreedyResult res;
    ProbCache cache;

    for (long L = 0; L < N; ++L) {
        // certificates for checkpoints activating at length L+1
        for (long j = 1;; ++j) {
            auto [nj, aj] = sched.checkpoints(j);
            if (aj > L + 1) break;
            if (aj != L + 1) continue;
            ActivationRecord act;
            act.j = j;
            act.nj = nj;
            act.at_length = aj;
            act.eps_vacuous = sched.params_of(nj).eps >= 1;
            act.bound = checkpoint_bound(nj);
            if (opts.max_checkpoint >= 0 && nj > opts.max_checkpoint) {
                act.skipped = true;
                act.bad = Rational(0);
                act.ok = false;
            } else {
                act.skipped = false;
                act.bad = bad_mass(nj, {res.x, res.y}, sched, &cache, opts.threads);
                act.ok = act.bad <= act.bound;
            }
            res.report.activations.push_back(std::move(act));
        }

        // greedy choice over all one-symbol extensions, lexicographic ties
        bool have_best = false;
        Rational best_phi;
        uint8_t best_a = 0, best_b = 0;
        for (uint8_t a = 0; a < k; ++a) {
            for (uint8_t b = 0; b < k; ++b) {
                PrefixPair cand(res.x.appended(a), res.y.appended(b));
                Rational phi = potential(L + 1, cand, sched, opts.max_checkpoint, &cache,
                                         opts.threads);
                if (!have_best || phi < best_phi) {
                    have_best = true;
                    best_phi = phi;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        res.x.push_back(best_a);
        res.y.push_back(best_b);
        if (best_phi >= 1) res.report.phi_always_below_one = false;
        res.report.steps.push_back({L, best_a, best_b, best_phi});

        // full recount at checkpoint lengths
        for (long j = 1;; ++j) {
            auto [nj, aj] = sched.checkpoints(j);
            if (nj > L + 1) break;
            if (nj != L + 1) continue;
            res.report.checkpoints.push_back(recount_family(res.x, res.y, j, nj, sched));
        }
    }

    res.report.dp_evals = cache.misses();
    res.report.cache_hits = cache.hits();
    return res;
}

std::vector<CheckpointRecord> verify_checkpoints(const Word& x, const Word& y,
                                                 const Schedule& sched) {
    if (x.size() != y.size()) throw domain_error("verify_checkpoints: prefix lengths differ");
    std::vector<CheckpointRecord> out;
    const long L = static_cast<long>(x.size());
    for (long j = 1;; ++j) {
        auto [nj, aj] = sched.checkpoints(j);
        if (nj > L) break;
        out.push_back(recount_family(x, y, j, nj, sched));
    }
    return out;
}

std::string BuildReport::render() const {
    std::ostringstream out;
    out << "# shuffler-encoding v1\n";
    for (const StepRecord& step : steps) {
        for (const ActivationRecord& act : activations) {
            if (act.at_length != step.L + 1) continue;
            if (act.skipped) {
                out << "SKIP " << act.j << " N=" << act.nj << " over budget\n";
            } else {
                out << "ACTIVATE " << act.j << " B=" << fraction_str(act.bad)
                    << " bound=" << fraction_str(act.bound) << ' '
                    << (act.ok ? "ok" : "violated");
                if (act.eps_vacuous) out << " eps>=1";
                out << '\n';
            }
        }
        out << step.L << ' ' << Word({step.a}).str() << ' ' << Word({step.b}).str() << ' '
            << fraction_str(step.phi);
        if (step.phi >= 1) out << " PHI>=1";
        out << '\n';
        for (const CheckpointRecord& cp : checkpoints) {
            if (cp.nj != step.L + 1) continue;
            out << "CHECKPOINT " << cp.j << ' ' << (cp.pass ? "pass" : "fail");
            for (const Violation& v : cp.violations)
                out << ' ' << v.i << ':' << v.r << ':' << v.w.str() << ':' << v.count;
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace fsi
