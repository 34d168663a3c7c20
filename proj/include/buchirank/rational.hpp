#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace buchirank {

using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Accepts "a", "-a", "a/b" with optional sign on the numerator.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  try {
    Rational q(text);
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("bad rational literal: " + text);
  }
}

// Canonical form: "n" for integers, "n/d" otherwise (sign on the numerator).
inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

// Best rational approximations of x by continued fractions, capped at
// max_den. Returns the final convergent whose denominator stays in range.
inline Rational rationalize(double x, std::uint64_t max_den) {
  if (max_den == 0) max_den = 1;
  bool neg = x < 0;
  if (neg) x = -x;
  // Convergents p/q of the continued fraction of x.
  std::uint64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    double fl = std::floor(frac);
    if (fl > 9e18) break;
    std::uint64_t a = static_cast<std::uint64_t>(fl);
    if (q0 > 0 && a != 0 && q1 > (max_den - q0) / a) break;  // would overflow cap
    std::uint64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double rem = frac - fl;
    if (rem < 1e-12) break;
    frac = 1.0 / rem;
  }
  if (q1 == 0) return rat(0);
  Rational r(static_cast<unsigned long>(p1), static_cast<unsigned long>(q1));
  r.canonicalize();
  if (neg) r = -r;
  return r;
}

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace buchirank
