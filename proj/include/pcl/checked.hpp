#pragma once

#include <cstdint>

#include "pcl/errors.hpp"

namespace pcl {

// Checked int64 arithmetic. Every overflow throws instead of wrapping;
// sieve bounds and tuple discriminants must never truncate silently.

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("int64 overflow in addition");
  return r;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("int64 overflow in subtraction");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("int64 overflow in multiplication");
  return r;
}

inline std::int64_t checked_abs(std::int64_t a) {
  if (a == INT64_MIN) throw OverflowError("int64 overflow in abs");
  return a < 0 ? -a : a;
}

// Floored modulus with result in [0, m). m > 0 required.
inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace pcl
