#pragma once

#include <gmpxx.h>

#include <string>

#include "fsi/errors.hpp"

namespace fsi {

using BigInt = mpz_class;
// Exact fraction, kept in lowest terms with positive denominator by GMP.
using Rational = mpq_class;

inline BigInt pow_int(long base, long exp) {
    if (exp < 0) throw domain_error("pow_int: negative exponent");
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base),
                  static_cast<unsigned long>(exp));
    return r;
}

inline Rational make_rational(BigInt num, BigInt den) {
    if (den == 0) throw domain_error("make_rational: zero denominator");
    Rational q(std::move(num), std::move(den));
    q.canonicalize();
    return q;
}

// Canonical "num/den" text, always with the slash ("0/1", "3/4", "-1/2").
inline std::string fraction_str(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

// Accepts "num/den" or a bare integer.
inline Rational parse_rational(const std::string& text) {
    Rational q;
    if (q.set_str(text, 10) != 0)
        throw domain_error("not a rational: '" + text + "'");
    q.canonicalize();
    if (q.get_den() == 0) throw domain_error("zero denominator: '" + text + "'");
    return q;
}

inline Rational abs_diff(const Rational& a, const Rational& b) {
    Rational d = a - b;
    return d < 0 ? Rational(-d) : d;
}

}  // namespace fsi
