#pragma once

// Exact dyadic rationals: sign * numerator * 2^exp2.
//
// This is the reference oracle for the rounding primitives. Everything here
// is computed with integer shifts on an arbitrary-precision numerator and
// shares no code with fp_core's IEEE bit manipulation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace srlab {

using BigInt = boost::multiprecision::cpp_int;

/// Canonical form: numerator odd (or zero), zero has sign 0 and exp2 0.
struct DyadicValue {
  int sign = 0;  // -1, 0, +1
  BigInt numerator = 0;
  std::int64_t exp2 = 0;

  bool is_zero() const { return sign == 0; }
  bool operator==(const DyadicValue&) const = default;
};

/// An exact probability numerator / 2^log2_denominator, reduced.
struct DyadicFraction {
  BigInt numerator = 0;
  int log2_denominator = 0;

  /// numerator * 2^(bits - log2_denominator); throws if not an integer.
  BigInt scaled_to(int bits) const;
  std::string str() const;
  bool operator==(const DyadicFraction&) const = default;
};

DyadicValue dy_from_float(double x);
/// Exact conversion back; throws std::domain_error if v is not a double.
double dy_to_float(const DyadicValue& v);
/// Nearest-ish double (at most one rounding off); used for error reports.
double dy_to_double_approx(const DyadicValue& v);

DyadicValue dy_make(int sign, BigInt numerator, std::int64_t exp2);
DyadicValue dy_neg(DyadicValue v);
DyadicValue dy_abs(DyadicValue v);
DyadicValue dy_add(const DyadicValue& a, const DyadicValue& b);
DyadicValue dy_sub(const DyadicValue& a, const DyadicValue& b);
DyadicValue dy_mul(const DyadicValue& a, const DyadicValue& b);
int dy_compare(const DyadicValue& a, const DyadicValue& b);

/// Exact sum of doubles and of pairwise products, one final normalization.
DyadicValue dy_sum(std::span<const double> values);
DyadicValue dy_sum_abs(std::span<const double> values);
DyadicValue dy_dot(std::span<const double> a, std::span<const double> b);

/// Normalized exponent e with 2^e <= |v| < 2^(e+1). v must be nonzero.
std::int64_t dy_exponent(const DyadicValue& v);
DyadicValue dy_ulp(const DyadicValue& v, int p);
DyadicValue dy_floor(const DyadicValue& v, int p);
DyadicValue dy_ceil(const DyadicValue& v, int p);
DyadicValue dy_truncate(const DyadicValue& v, int width);
DyadicValue dy_round_nearest(const DyadicValue& v, int p);
bool dy_is_representable(const DyadicValue& v, int p);

/// q(x) for r = nullopt, q_r(x) = (fl_{p+r}(x) - floor_p(x)) / ulp_p(x) otherwise.
DyadicFraction dy_q(const DyadicValue& v, int p, std::optional<int> r);

}  // namespace srlab
