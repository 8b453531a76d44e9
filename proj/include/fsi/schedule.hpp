#pragma once

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "fsi/rational.hpp"

namespace fsi {

struct LengthParams {
    long t_n;        // number of enumerated machines tested at length n
    long ell_n;      // largest block length tested at length n
    Rational eps;    // dyadic tolerance, rounded down at eps_bits fractional bits
};

// Checkpoint/activation scheduling: N_j = (j+m0)^4, A_j = (j+m0)^2, with m0
// certified so that the checkpoint error budget sums below 1/4.
class Schedule {
  public:
    Schedule(int k, long m0, long n0 = 1, int eps_bits = 64);

    static long choose_m0(long n0);
    static bool budget_sum_certificate(long m0);  // sum_j (j+m0)^-8 < 1/4

    LengthParams params_of(long n) const;
    static long block_count(long n, long r);

    std::pair<long, long> checkpoints(long j) const;  // (N_j, A_j)
    std::vector<long> active_set(long L) const;       // all j with A_j <= L <= N_j

    int k() const { return k_; }
    long m0() const { return m0_; }
    long n0() const { return n0_; }
    int eps_bits() const { return eps_bits_; }

  private:
    int k_;
    long m0_;
    long n0_;
    int eps_bits_;
    mutable std::mutex mu_;
    mutable std::map<long, Rational> eps_cache_;
};

// Certified enclosure of 2*sqrt(ln n * log_k n / n) = 2*ln(n)/sqrt(n*ln k),
// lower and upper bounds at the given working precision.
std::pair<Rational, Rational> eps_bounds(int k, long n, int precision_bits);

}  // namespace fsi
