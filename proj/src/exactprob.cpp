#include "fsi/exactprob.hpp"

#include <mpfr.h>

#include <sstream>

namespace fsi {

BaseKProb CountDistribution::mass_of(long c) const {
    if (c < 0 || c > block_count()) return {BigInt(0), n};
    return {mass[static_cast<size_t>(c)], n};
}

Rational CountDistribution::prob(long c) const { return mass_of(c).to_rational(k); }

BigInt CountDistribution::total() const {
    BigInt t = 0;
    for (const BigInt& m : mass) t += m;
    return t;
}

std::string CountDistribution::serialize() const {
    std::ostringstream out;
    out << n << ' ' << r << ' ' << w.str() << ' ' << k << '\n';
    for (size_t c = 0; c < mass.size(); ++c) out << c << ' ' << mass[c].get_str() << '\n';
    return out.str();
}

CountDistribution CountDistribution::parse(const std::string& text) {
    std::istringstream in(text);
    CountDistribution d;
    std::string wtext;
    if (!(in >> d.n >> d.r >> wtext >> d.k))
        throw domain_error("distribution: expected header 'n r w k'");
    d.w = Word::parse(wtext, d.k);
    d.mass.assign(static_cast<size_t>(d.n / d.r) + 1, BigInt(0));
    long c;
    std::string num;
    while (in >> c >> num) {
        if (c < 0 || c > d.block_count()) throw domain_error("distribution: count out of range");
        d.mass[static_cast<size_t>(c)] = BigInt(num);
    }
    return d;
}

CountDistribution dp_count_distribution(const Shuffler& s, long n, long r, const Word& w,
                                        const Word& up, const Word& vp) {
    s.validate();
    if (r < 1 || static_cast<long>(w.size()) != r)
        throw domain_error("dp_count_distribution: need |w| = r >= 1");
    if (n < 0) throw domain_error("dp_count_distribution: need n >= 0");
    if (static_cast<long>(up.size()) > n || static_cast<long>(vp.size()) > n)
        throw domain_error("dp_count_distribution: prefix longer than n");

    const long m = n / r;
    const uint32_t q_count = s.num_states;
    const size_t a_span = static_cast<size_t>(n) + 1;
    const size_t c_span = static_cast<size_t>(m) + 1;
    const size_t slice_size = static_cast<size_t>(q_count) * a_span * 2 * c_span;
    auto idx = [&](uint32_t q, size_t a, int sigma, size_t c) {
        return ((static_cast<size_t>(q) * a_span + a) * 2 + static_cast<size_t>(sigma)) * c_span + c;
    };

    std::vector<BigInt> cur(slice_size, BigInt(0));
    std::vector<BigInt> nxt(slice_size, BigInt(0));
    cur[idx(s.start, 0, 1, 0)] = 1;

    const unsigned long kf = static_cast<unsigned long>(s.k);
    for (long t = 0; t < n; ++t) {
        const long blk_pos = t % r;  // position inside the current aligned block
        const bool completes = blk_pos + 1 == r;
        for (auto& z : nxt) z = 0;
        for (uint32_t q = 0; q < q_count; ++q) {
            const int tape = s.tau[q];
            const size_t a_max = std::min<size_t>(static_cast<size_t>(t), a_span - 1);
            for (size_t a = 0; a <= a_max; ++a) {
                const size_t b = static_cast<size_t>(t) - a;
                // fixed iff the next read position lies inside the prefix
                const bool fixed = tape == 1 ? a < up.size() : b < vp.size();
                const uint8_t fixed_sym = fixed ? (tape == 1 ? up[a] : vp[b]) : 0;
                const size_t a_next = tape == 1 ? a + 1 : a;
                for (int sigma = 0; sigma < 2; ++sigma) {
                    for (size_t c = 0; c < c_span; ++c) {
                        const BigInt& src = cur[idx(q, a, sigma, c)];
                        if (mpz_sgn(src.get_mpz_t()) == 0) continue;
                        for (uint8_t alpha = 0; alpha < s.k; ++alpha) {
                            if (fixed && alpha != fixed_sym) continue;
                            const int sigma_next = (sigma == 1 && alpha == w[static_cast<size_t>(blk_pos)]) ? 1 : 0;
                            size_t c_next = c;
                            int sigma_store = sigma_next;
                            if (completes) {
                                c_next = c + static_cast<size_t>(sigma_next);
                                sigma_store = 1;  // next block starts fresh
                            }
                            BigInt& dst = nxt[idx(s.next(q, alpha), a_next, sigma_store, c_next)];
                            if (fixed)
                                mpz_addmul_ui(dst.get_mpz_t(), src.get_mpz_t(), kf);
                            else
                                dst += src;
                        }
                    }
                }
            }
        }
        cur.swap(nxt);
    }

    CountDistribution dist;
    dist.n = n;
    dist.r = r;
    dist.k = s.k;
    dist.w = w;
    dist.mass.assign(c_span, BigInt(0));
    for (uint32_t q = 0; q < q_count; ++q)
        for (size_t a = 0; a < a_span; ++a)
            for (int sigma = 0; sigma < 2; ++sigma)
                for (size_t c = 0; c < c_span; ++c) dist.mass[c] += cur[idx(q, a, sigma, c)];
    return dist;
}

CountDistribution brute_force_distribution(const Shuffler& s, long n, long r, const Word& w,
                                           const Word& up, const Word& vp, uint64_t max_pairs) {
    s.validate();
    if (r < 1 || static_cast<long>(w.size()) != r)
        throw domain_error("brute_force_distribution: need |w| = r >= 1");
    if (static_cast<long>(up.size()) > n || static_cast<long>(vp.size()) > n)
        throw domain_error("brute_force_distribution: prefix longer than n");

    const long free_x = n - static_cast<long>(up.size());
    const long free_y = n - static_cast<long>(vp.size());
    const BigInt pairs = pow_int(s.k, free_x + free_y);
    if (pairs > max_pairs)
        throw budget_error("brute_force_distribution: " + pairs.get_str() +
                           " tape extensions exceed budget " + std::to_string(max_pairs));

    const long m = n / r;
    std::vector<uint64_t> buckets(static_cast<size_t>(m) + 1, 0);

    std::vector<uint8_t> xs(up.symbols());
    xs.resize(static_cast<size_t>(n), 0);
    std::vector<uint8_t> ys(vp.symbols());
    ys.resize(static_cast<size_t>(n), 0);

    auto advance = [&](std::vector<uint8_t>& tape, size_t fixed_len) {
        for (size_t i = tape.size(); i-- > fixed_len;) {
            if (++tape[i] < s.k) return true;
            tape[i] = 0;
        }
        return false;
    };

    do {
        std::fill(ys.begin() + static_cast<long>(vp.size()), ys.end(), 0);
        do {
            Word out = run_n(s, Word(xs), Word(ys), static_cast<size_t>(n)).out;
            ++buckets[occ_aligned(out, w, static_cast<size_t>(r))];
        } while (advance(ys, vp.size()));
    } while (advance(xs, up.size()));

    // rescale counts from denominator k^(free_x+free_y) to k^n
    CountDistribution dist;
    dist.n = n;
    dist.r = r;
    dist.k = s.k;
    dist.w = w;
    dist.mass.assign(static_cast<size_t>(m) + 1, BigInt(0));
    const long shift = n - (free_x + free_y);
    for (size_t c = 0; c < buckets.size(); ++c) {
        BigInt num(static_cast<unsigned long>(buckets[c]));
        if (shift >= 0) {
            num *= pow_int(s.k, shift);
        } else {
            BigInt div = pow_int(s.k, -shift);
            BigInt rem;
            mpz_fdiv_qr(num.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), div.get_mpz_t());
            if (rem != 0)
                throw domain_error("brute_force_distribution: mass not representable at k^n");
        }
        dist.mass[c] = num;
    }
    return dist;
}

Rational failure_probability(const CountDistribution& dist, const Rational& eps) {
    if (eps < 0) throw domain_error("failure_probability: eps must be >= 0");
    const long m = dist.block_count();
    const BigInt kr = pow_int(dist.k, dist.r);
    // |c - m/k^r| >= eps*m  <=>  |c*k^r - m| * eps.den >= eps.num * m * k^r
    const BigInt rhs = eps.get_num() * m * kr;
    BigInt bad = 0;
    for (long c = 0; c <= m; ++c) {
        BigInt lhs = abs(BigInt(c) * kr - m) * eps.get_den();
        if (lhs >= rhs) bad += dist.mass[static_cast<size_t>(c)];
    }
    return make_rational(bad, pow_int(dist.k, dist.n));
}

double chernoff_bound(long M, const Rational& p, const Rational& delta) {
    if (delta <= 0 || delta > 1) throw domain_error("chernoff_bound: need 0 < delta <= 1");
    if (p <= 0 || p > 1) throw domain_error("chernoff_bound: need 0 < p <= 1");
    if (M < 0) throw domain_error("chernoff_bound: need M >= 0");
    // exponent = delta^2 * M * p / 3, exact; round it down so exp(-.) rounds up
    Rational expo = delta * delta * Rational(M) * p / 3;
    mpfr_t x;
    mpfr_init2(x, 128);
    mpfr_set_q(x, expo.get_mpq_t(), MPFR_RNDD);
    mpfr_neg(x, x, MPFR_RNDU);
    mpfr_exp(x, x, MPFR_RNDU);
    mpfr_mul_2ui(x, x, 1, MPFR_RNDU);
    double bound = mpfr_get_d(x, MPFR_RNDU);
    mpfr_clear(x);
    return bound;
}

Rational ProbCache::get_or_compute(const std::string& key, const std::function<Rational()>& fn) {
    std::shared_future<Rational> fut;
    std::promise<Rational> prom;
    bool owner = false;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            fut = it->second;
        } else {
            fut = prom.get_future().share();
            map_.emplace(key, fut);
            owner = true;
        }
    }
    if (!owner) {
        ++hits_;
        return fut.get();
    }
    ++misses_;
    try {
        Rational value = fn();
        prom.set_value(value);
        return value;
    } catch (...) {
        prom.set_exception(std::current_exception());
        throw;
    }
}

std::string ProbCache::key(const std::string& enc, int k, const Rational& eps, long n, long r,
                           const Word& w, const Word& up, const Word& vp) {
    std::string out = enc;
    out += '|';
    out += std::to_string(k);
    out += '|';
    out += fraction_str(eps);
    out += '|';
    out += std::to_string(n);
    out += '|';
    out += std::to_string(r);
    out += '|';
    out += w.str();
    out += '|';
    out += up.str();
    out += '|';
    out += vp.str();
    return out;
}

}  // namespace fsi
