#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "pcl/checked.hpp"
#include "pcl/errors.hpp"

namespace pcl {

// Exact rational on checked int64. Used by the local-factor identity
// checker, where floating point would hide off-by-one mismatches.
// Invariant: den > 0, gcd(|num|, den) = 1.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t n, std::int64_t d = 1) {
    if (d == 0) throw DomainError("rational with zero denominator");
    if (d < 0) {
      n = checked_sub(0, n);
      d = checked_sub(0, d);
    }
    std::int64_t g = std::gcd(n < 0 ? checked_abs(n) : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    return Rational{n, d};
  }

  Rational operator+(const Rational& o) const {
    return of(checked_add(checked_mul(num, o.den), checked_mul(o.num, den)),
              checked_mul(den, o.den));
  }
  Rational operator-(const Rational& o) const {
    return of(checked_sub(checked_mul(num, o.den), checked_mul(o.num, den)),
              checked_mul(den, o.den));
  }
  Rational operator*(const Rational& o) const {
    return of(checked_mul(num, o.num), checked_mul(den, o.den));
  }
  Rational operator/(const Rational& o) const {
    if (o.num == 0) throw DomainError("rational division by zero");
    return of(checked_mul(num, o.den), checked_mul(den, o.num));
  }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rational& o) const { return !(*this == o); }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }
};

}  // namespace pcl
