#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsi/shuffler.hpp"

namespace fsi {

// Nonnegative numerator over the implicit denominator k^steps. Additions in
// the dynamic program never reduce; conversion to Rational happens once.
struct BaseKProb {
    BigInt num;
    long steps = 0;

    void add(const BaseKProb& other) {
        if (steps != other.steps)
            throw domain_error("base-k probability: addition requires equal steps");
        num += other.num;
    }
    Rational to_rational(int k) const { return make_rational(num, pow_int(k, steps)); }
};

// Exact law of the aligned block count C = occ_aligned(S(X,Y)[1..n], w, r)
// under prefix conditioning. mass[c] is the numerator at denominator k^n.
struct CountDistribution {
    long n = 0;
    long r = 1;
    int k = 2;
    Word w;
    std::vector<BigInt> mass;  // size m+1, m = n/r

    long block_count() const { return static_cast<long>(mass.size()) - 1; }
    BaseKProb mass_of(long c) const;
    Rational prob(long c) const;
    BigInt total() const;

    std::string serialize() const;  // header "n r w k", then "c numerator" lines
    static CountDistribution parse(const std::string& text);

    bool operator==(const CountDistribution& o) const = default;
};

// Forward DP over the first n output steps; states (q, a, b, s, sigma, c)
// with b = t - a and s = t mod r kept implicit. Exact, integer-only.
CountDistribution dp_count_distribution(const Shuffler& s, long n, long r, const Word& w,
                                        const Word& up, const Word& vp);

// Validation oracle: enumerate all length-n tape extensions with uniform
// weight and count aligned blocks. Cost k^(2(n-L')) pairs.
CountDistribution brute_force_distribution(const Shuffler& s, long n, long r, const Word& w,
                                           const Word& up, const Word& vp,
                                           uint64_t max_pairs = uint64_t{1} << 24);

// Pr[|C - m/k^r| >= eps*m], the complement of the strict good event.
Rational failure_probability(const CountDistribution& dist, const Rational& eps);

// Upper bound 2*exp(-delta^2*M*p/3) for the Bin(M,p) tail, rounded upward.
double chernoff_bound(long M, const Rational& p, const Rational& delta);

// Shared memo for conditional failure probabilities, keyed by the canonical
// shuffler encoding plus (n, r, w, up, vp). Get-or-compute is atomic: under
// concurrent lookups one caller computes, the rest wait on the same future.
class ProbCache {
  public:
    Rational get_or_compute(const std::string& key, const std::function<Rational()>& fn);

    uint64_t hits() const { return hits_; }
    uint64_t misses() const { return misses_; }

    static std::string key(const std::string& enc, int k, const Rational& eps, long n, long r,
                           const Word& w, const Word& up, const Word& vp);

  private:
    std::mutex mu_;
    std::unordered_map<std::string, std::shared_future<Rational>> map_;
    std::atomic<uint64_t> hits_{0};
    std::atomic<uint64_t> misses_{0};
};

}  // namespace fsi
