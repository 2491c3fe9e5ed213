#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace atsp {

using Rational = mpq_class;

// Accepts "p/q", "p", or a plain decimal such as "0.78". Throws ParseError.
Rational parse_rational(std::string_view text);

// Canonical "p/q" form; integers print without a denominator.
std::string to_string(const Rational& q);

mpz_class floor_of(const Rational& q);
mpz_class ceil_of(const Rational& q);

// mpq_class(num, den) does not canonicalize; always build fractions here.
inline Rational make_rational(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline bool is_integral(const Rational& q) { return q.get_den() == 1; }

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace atsp
