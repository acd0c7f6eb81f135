#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace exactml {

using BigInt = mpz_class;
using Rational = mpq_class;

static_assert(sizeof(long) == sizeof(std::int64_t), "LP64 platform expected");

inline BigInt from_int64(std::int64_t v) { return BigInt(static_cast<long>(v)); }

inline BigInt pow2(std::size_t exponent) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, exponent);
  return r;
}

inline std::string to_string(const BigInt& v) { return v.get_str(); }

// Fixed-point rendering with `places` digits after the point, ties to even.
std::string to_decimal(const Rational& q, unsigned places = 4);

// floor(v / 2^shift), i.e. an arithmetic right shift.
inline BigInt floor_shift(const BigInt& v, unsigned shift) {
  BigInt r;
  mpz_fdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), shift);
  return r;
}

}  // namespace exactml
