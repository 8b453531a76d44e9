#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsi/exactprob.hpp"
#include "fsi/schedule.hpp"

namespace fsi {

struct PrefixPair {
    Word u;
    Word v;
    PrefixPair() = default;
    PrefixPair(Word u_, Word v_) : u(std::move(u_)), v(std::move(v_)) {
        if (u.size() != v.size()) throw domain_error("prefix pair: lengths must match");
    }
    size_t length() const { return u.size(); }
};

struct StepRecord {
    long L;  // prefix length before the step
    uint8_t a;
    uint8_t b;
    Rational phi;  // potential after extending
};

struct ActivationRecord {
    long j;
    long nj;
    long at_length;  // prefix length A_j at which the checkpoint activates
    bool skipped;    // over the checkpoint budget, excluded from the potential
    bool eps_vacuous;  // tolerance at N_j is >= 1, so every constraint holds
    Rational bad;
    Rational bound;  // 1/N_j^2
    bool ok;
};

struct Violation {
    uint64_t i;
    long r;
    Word w;
    uint64_t count;
};

struct CheckpointRecord {
    long j;
    long nj;
    bool pass;
    std::vector<Violation> violations;
};

struct BuildReport {
    std::vector<StepRecord> steps;
    std::vector<ActivationRecord> activations;
    std::vector<CheckpointRecord> checkpoints;
    bool phi_always_below_one = true;
    uint64_t dp_evals = 0;    // cache misses; each one ran the full DP
    uint64_t cache_hits = 0;

    std::string render() const;
};

struct BuildOptions {
    long max_checkpoint = -1;  // largest N_j evaluated; -1 = unlimited
    int threads = 1;
};

struct GreedyResult {
    Word x;
    Word y;
    BuildReport report;
};

// Total conditional failure probability of every constraint enforced at
// output length n, given the current prefixes. Exact.
Rational bad_mass(long n, const PrefixPair& pair, const Schedule& sched,
                  ProbCache* cache = nullptr, int threads = 1);

// Sum of bad_mass over the active checkpoints at length L. Checkpoints with
// N_j above max_checkpoint (when >= 0) are excluded.
Rational potential(long L, const PrefixPair& pair, const Schedule& sched,
                   long max_checkpoint = -1, ProbCache* cache = nullptr, int threads = 1);

// Greedy loop: extend both prefixes one symbol at a time, choosing the pair
// of next symbols that minimizes the potential; ties break to the
// lexicographically least (a, b). Activation certificates and checkpoint
// recounts are recorded, never enforced silently.
GreedyResult greedy_build(long N, const Schedule& sched, const BuildOptions& opts = {});

// Independent recount of every checkpoint constraint family within the
// prefix length: rerun each machine, count aligned blocks, compare against
// the strict tolerance. Does not touch the dynamic program.
std::vector<CheckpointRecord> verify_checkpoints(const Word& x, const Word& y,
                                                 const Schedule& sched);

}  // namespace fsi
