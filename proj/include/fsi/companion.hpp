#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fsi/exactprob.hpp"
#include "fsi/schedule.hpp"

namespace fsi {

// Quadratic-window test family: all machines i <= t, block lengths ell <= t,
// and output lengths n in [N, N^2], at tolerance exactly 2^-t. Membership of
// a companion word is decided by its first N^2 symbols.
struct SliceSpec {
    long t;
    long N;

    Rational tolerance() const { return make_rational(1, pow_int(2, t)); }
    long deciding_length() const { return N * N; }
};

struct Caps {
    long max_window = 64;
    uint64_t max_enum = uint64_t{1} << 24;
};

struct ExtractStep {
    size_t ell;  // prefix length before the step
    long L;
    Rational mu;        // measure of [v] within F_L
    Rational tail_val;  // tail(L)
    uint8_t chose;
    std::vector<Rational> child_mu;  // per symbol, measure of [v a] within F_L
};

struct CompanionReport {
    std::vector<SliceSpec> specs;
    std::vector<Rational> stage_measures;
    std::vector<ExtractStep> trace;
    // per stage: 1 = recounted member, 0 = recounted non-member, -1 = undecided
    std::vector<int> recount;

    std::string render() const;
};

// Membership of fixed input prefixes in one block-frequency test set.
bool slice_membership(const Shuffler& s, long n, long m, const Rational& eps, const Word& xp,
                      const Word& yp);

// Exact measure of the slice intersected with the cylinder [v], by
// enumerating every y-extension of v to the deciding length N^2.
Rational slice_measure(const SliceSpec& spec, WordSource& x, const Word& v, int k,
                       const Caps& caps, int threads = 1);

// Remaining error budget past stage L: sum of 4^-t for t > L, = (1/3)*4^-L.
Rational tail(long L);

// Exact measure of [v] within the intersection of the first `stages` slices
// (the full space when stages = 0). Decided by the deepest deciding length.
Rational intersection_measure(WordSource& x, const std::vector<SliceSpec>& specs, size_t stages,
                              const Word& v, int k, const Caps& caps, int threads = 1);

// Increasing cutoffs N_1 < ... < N_T with measure(H_t(N_t)) >= 1 - 4^-t and
// N_{t+1} <= N_t^2, found by ascending search with one-step lookahead.
// Lookahead conditions referring to stages beyond T are dropped.
std::vector<SliceSpec> choose_cutoffs(WordSource& x, long T, int k, const Caps& caps,
                                      std::vector<Rational>* stage_measures = nullptr,
                                      int threads = 1);

struct ExtractResult {
    Word y;
    std::vector<ExtractStep> trace;
};

// Symbol-by-symbol extraction: at each prefix v find the least L with
// measure([v] within F_L) > k*tail(L), then append the least symbol whose
// refined measure exceeds tail(L). F_L intersects the first min(L, T) slices.
ExtractResult extract(WordSource& x, const std::vector<SliceSpec>& specs, size_t length, int k,
                      const Caps& caps, int threads = 1);

struct CompanionResult {
    Word y;
    CompanionReport report;
};

// choose_cutoffs + extract + final recount of every decided slice membership.
CompanionResult build_companion(WordSource& x, long T, size_t length, int k, const Caps& caps,
                                int threads = 1);

}  // namespace fsi
