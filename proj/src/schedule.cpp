#include "fsi/schedule.hpp"

#include <mpfr.h>

namespace fsi {

namespace {

Rational mpfr_to_rational(mpfr_t x) {
    if (mpfr_zero_p(x)) return Rational(0);
    mpz_class mant;
    mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), x);
    Rational q(mant);
    if (e >= 0) {
        mpz_mul_2exp(q.get_num().get_mpz_t(), q.get_num().get_mpz_t(),
                     static_cast<mp_bitcnt_t>(e));
    } else {
        mpz_mul_2exp(q.get_den().get_mpz_t(), q.get_den().get_mpz_t(),
                     static_cast<mp_bitcnt_t>(-e));
    }
    q.canonicalize();
    return q;
}

// one directed evaluation of 2*ln(n)/sqrt(n*ln k)
void eval_eps(mpfr_t out, int k, long n, mpfr_prec_t prec, bool lower) {
    const mpfr_rnd_t down = MPFR_RNDD, up = MPFR_RNDU;
    const mpfr_rnd_t num_rnd = lower ? down : up;
    const mpfr_rnd_t den_rnd = lower ? up : down;
    mpfr_t num, den;
    mpfr_init2(num, prec);
    mpfr_init2(den, prec);
    mpfr_set_ui(num, static_cast<unsigned long>(n), MPFR_RNDZ);
    mpfr_log(num, num, num_rnd);
    mpfr_mul_2ui(num, num, 1, num_rnd);
    mpfr_set_ui(den, static_cast<unsigned long>(k), MPFR_RNDZ);
    mpfr_log(den, den, den_rnd);
    mpfr_mul_ui(den, den, static_cast<unsigned long>(n), den_rnd);
    mpfr_sqrt(den, den, den_rnd);
    mpfr_div(out, num, den, lower ? down : up);
    mpfr_clear(num);
    mpfr_clear(den);
}

}  // namespace

std::pair<Rational, Rational> eps_bounds(int k, long n, int precision_bits) {
    mpfr_t lo, hi;
    mpfr_init2(lo, precision_bits);
    mpfr_init2(hi, precision_bits);
    eval_eps(lo, k, n, precision_bits, true);
    eval_eps(hi, k, n, precision_bits, false);
    auto result = std::make_pair(mpfr_to_rational(lo), mpfr_to_rational(hi));
    mpfr_clear(lo);
    mpfr_clear(hi);
    return result;
}

bool Schedule::budget_sum_certificate(long m0) {
    if (m0 < 0) throw domain_error("schedule: m0 must be >= 0");
    // Upper-bound every quantity at denominator 2^128: partial sum through
    // j = 10^4 with per-term ceilings, plus the integral tail bound
    // 1/(7*(J+m0)^7).
    constexpr long kPartialTerms = 10'000;
    const BigInt scale = pow_int(2, 128);
    BigInt sum_up = 0;
    for (long j = 1; j <= kPartialTerms; ++j) {
        BigInt den;
        mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(j + m0), 8);
        BigInt term;
        mpz_cdiv_q(term.get_mpz_t(), scale.get_mpz_t(), den.get_mpz_t());
        sum_up += term;
    }
    BigInt tail_den;
    mpz_ui_pow_ui(tail_den.get_mpz_t(), static_cast<unsigned long>(kPartialTerms + m0), 7);
    tail_den *= 7;
    BigInt tail;
    mpz_cdiv_q(tail.get_mpz_t(), scale.get_mpz_t(), tail_den.get_mpz_t());
    sum_up += tail;
    return sum_up < pow_int(2, 126);  // scale / 4
}

long Schedule::choose_m0(long n0) {
    if (n0 < 1) throw domain_error("schedule: n0 must be >= 1");
    for (long m0 = 0;; ++m0) {
        BigInt n1;
        mpz_ui_pow_ui(n1.get_mpz_t(), static_cast<unsigned long>(1 + m0), 4);
        if (n1 >= n0 && budget_sum_certificate(m0)) return m0;
    }
}

Schedule::Schedule(int k, long m0, long n0, int eps_bits)
    : k_(k), m0_(m0), n0_(n0), eps_bits_(eps_bits) {
    if (k < 2) throw domain_error("schedule: alphabet size must be >= 2");
    if (eps_bits < 1 || eps_bits > 4096) throw domain_error("schedule: eps_bits out of range");
    if (n0 < 1) throw domain_error("schedule: n0 must be >= 1");
    if (!budget_sum_certificate(m0))
        throw domain_error("schedule: checkpoint budget sum certificate fails for m0 = " +
                           std::to_string(m0));
    auto [n1, a1] = checkpoints(1);
    (void)a1;
    if (n1 < n0)
        throw domain_error("schedule: N_1 = " + std::to_string(n1) + " below n0 = " +
                           std::to_string(n0));
}

LengthParams Schedule::params_of(long n) const {
    if (n < 3) throw domain_error("schedule: length parameters need n >= 3");
    LengthParams p;
    p.t_n = n;
    // largest ell with k^(3*ell) <= n
    p.ell_n = 0;
    BigInt power = 1;
    const BigInt step = pow_int(k_, 3);
    while (power * step <= n) {
        power *= step;
        ++p.ell_n;
    }
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = eps_cache_.find(n);
        if (it != eps_cache_.end()) {
            p.eps = it->second;
            return p;
        }
    }
    // Floor at eps_bits fractional bits, never above the true value: tighten
    // the enclosure until both endpoints agree on the floor.
    const BigInt scale = pow_int(2, eps_bits_);
    Rational stored;
    bool settled = false;
    for (int prec = 192; prec <= 4096; prec *= 2) {
        auto [lo, hi] = eps_bounds(k_, n, prec);
        Rational lo_scaled = lo * scale;
        Rational hi_scaled = hi * scale;
        BigInt floor_lo, floor_hi;
        mpz_fdiv_q(floor_lo.get_mpz_t(), lo_scaled.get_num().get_mpz_t(),
                   lo_scaled.get_den().get_mpz_t());
        mpz_fdiv_q(floor_hi.get_mpz_t(), hi_scaled.get_num().get_mpz_t(),
                   hi_scaled.get_den().get_mpz_t());
        if (floor_lo == floor_hi) {
            stored = make_rational(floor_lo, scale);
            settled = true;
            break;
        }
    }
    if (!settled)
        throw domain_error("schedule: tolerance enclosure did not settle for n = " +
                           std::to_string(n));
    std::lock_guard<std::mutex> lock(mu_);
    eps_cache_.emplace(n, stored);
    p.eps = stored;
    return p;
}

long Schedule::block_count(long n, long r) {
    if (r < 1 || r > n) throw domain_error("schedule: block count needs 1 <= r <= n");
    return n / r;
}

std::pair<long, long> Schedule::checkpoints(long j) const {
    if (j < 1) throw domain_error("schedule: checkpoint index starts at 1");
    const long base = j + m0_;
    if (base > 55000) throw domain_error("schedule: checkpoint index too large");
    const long a = base * base;
    return {a * a, a};
}

std::vector<long> Schedule::active_set(long L) const {
    std::vector<long> out;
    if (L < 0) throw domain_error("schedule: active set needs L >= 0");
    for (long j = 1;; ++j) {
        auto [nj, aj] = checkpoints(j);
        if (aj > L) break;
        if (L <= nj) out.push_back(j);
    }
    return out;
}

}  // namespace fsi
