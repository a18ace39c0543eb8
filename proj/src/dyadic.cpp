#include "srlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace srlab {
namespace {

namespace mp = boost::multiprecision;

std::int64_t bit_length(const BigInt& n) { return n == 0 ? 0 : static_cast<std::int64_t>(mp::msb(n)) + 1; }

BigInt shifted_left(const BigInt& n, std::int64_t k) { return n << static_cast<unsigned>(k); }

// Signed integer * 2^exp2 to canonical form.
DyadicValue from_signed(BigInt n, std::int64_t exp2) {
  if (n == 0) {
    return {};
  }
  const int sign = n < 0 ? -1 : 1;
  if (sign < 0) {
    n = -n;
  }
  return dy_make(sign, std::move(n), exp2);
}

BigInt signed_numerator(const DyadicValue& v) { return v.sign < 0 ? BigInt(-v.numerator) : v.numerator; }

// Mantissa and exponent of a finite double: |x| = m * 2^e, m < 2^53.
std::pair<std::uint64_t, std::int64_t> integer_parts(double x) {
  int k = 0;
  const double f = std::frexp(std::fabs(x), &k);
  return {static_cast<std::uint64_t>(std::ldexp(f, 53)), static_cast<std::int64_t>(k) - 53};
}

// Keeps the top `width` bits of the magnitude, dropping the rest.
DyadicValue floor_magnitude(const DyadicValue& v, int width) {
  const std::int64_t len = bit_length(v.numerator);
  if (len <= width) {
    return v;
  }
  const auto shift = static_cast<unsigned>(len - width);
  return dy_make(v.sign, (v.numerator >> shift) << shift, v.exp2);
}

DyadicValue ceil_magnitude(const DyadicValue& v, int width) {
  if (dy_is_representable(v, width)) {
    return v;
  }
  const std::int64_t len = bit_length(v.numerator);
  const auto shift = static_cast<unsigned>(len - width);
  BigInt n = ((v.numerator >> shift) + 1) << shift;
  return dy_make(v.sign, std::move(n), v.exp2);
}

void require_width(int width) {
  if (width < 1) {
    throw std::invalid_argument("dyadic oracle: width must be positive");
  }
}

}  // namespace

BigInt DyadicFraction::scaled_to(int bits) const {
  if (numerator == 0) {
    return 0;
  }
  if (log2_denominator > bits) {
    throw std::domain_error("fraction is not a multiple of 2^-" + std::to_string(bits));
  }
  return numerator << static_cast<unsigned>(bits - log2_denominator);
}

std::string DyadicFraction::str() const {
  if (numerator == 0) {
    return "0";
  }
  if (log2_denominator == 0) {
    return numerator.str();
  }
  return numerator.str() + "/" + (BigInt(1) << static_cast<unsigned>(log2_denominator)).str();
}

DyadicValue dy_make(int sign, BigInt numerator, std::int64_t exp2) {
  if (numerator == 0 || sign == 0) {
    return {};
  }
  const auto tz = static_cast<std::int64_t>(mp::lsb(numerator));
  if (tz > 0) {
    numerator >>= static_cast<unsigned>(tz);
  }
  return {sign < 0 ? -1 : 1, std::move(numerator), exp2 + tz};
}

DyadicValue dy_from_float(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("dy_from_float requires a finite value");
  }
  if (x == 0.0) {
    return {};
  }
  const auto [m, e] = integer_parts(x);
  return dy_make(std::signbit(x) ? -1 : 1, BigInt(m), e);
}

double dy_to_float(const DyadicValue& v) {
  if (v.is_zero()) {
    return 0.0;
  }
  if (bit_length(v.numerator) > 53 || v.exp2 > std::numeric_limits<int>::max() ||
      v.exp2 < std::numeric_limits<int>::min()) {
    throw std::domain_error("dyadic value is not representable in binary64");
  }
  const double d = std::ldexp(static_cast<double>(v.numerator.convert_to<std::uint64_t>()), static_cast<int>(v.exp2));
  const double signed_d = v.sign < 0 ? -d : d;
  if (!std::isfinite(d) || d == 0.0 || dy_from_float(signed_d) != v) {
    throw std::domain_error("dyadic value is not representable in binary64");
  }
  return signed_d;
}

double dy_to_double_approx(const DyadicValue& v) {
  if (v.is_zero()) {
    return 0.0;
  }
  const std::int64_t len = bit_length(v.numerator);
  BigInt n = v.numerator;
  std::int64_t e = v.exp2;
  if (len > 62) {
    const auto shift = static_cast<unsigned>(len - 62);
    const bool sticky = mp::lsb(n) < shift;
    n >>= shift;
    if (sticky) {
      n |= 1;
    }
    e += shift;
  }
  const double d = std::ldexp(static_cast<double>(n.convert_to<std::uint64_t>()),
                              static_cast<int>(std::clamp<std::int64_t>(e, -100000, 100000)));
  return v.sign < 0 ? -d : d;
}

DyadicValue dy_neg(DyadicValue v) {
  v.sign = -v.sign;
  return v;
}

DyadicValue dy_abs(DyadicValue v) {
  if (v.sign < 0) {
    v.sign = 1;
  }
  return v;
}

DyadicValue dy_add(const DyadicValue& a, const DyadicValue& b) {
  if (a.is_zero()) {
    return b;
  }
  if (b.is_zero()) {
    return a;
  }
  const std::int64_t e = std::min(a.exp2, b.exp2);
  BigInt n = shifted_left(signed_numerator(a), a.exp2 - e) + shifted_left(signed_numerator(b), b.exp2 - e);
  return from_signed(std::move(n), e);
}

DyadicValue dy_sub(const DyadicValue& a, const DyadicValue& b) { return dy_add(a, dy_neg(b)); }

DyadicValue dy_mul(const DyadicValue& a, const DyadicValue& b) {
  if (a.is_zero() || b.is_zero()) {
    return {};
  }
  return dy_make(a.sign * b.sign, a.numerator * b.numerator, a.exp2 + b.exp2);
}

int dy_compare(const DyadicValue& a, const DyadicValue& b) {
  const DyadicValue d = dy_sub(a, b);
  return d.sign;
}

namespace {

template <typename Term>
DyadicValue exact_accumulate(std::size_t count, Term term) {
  // Terms are (signed mantissa, exponent) pairs; align everything to the
  // smallest exponent and add as integers.
  std::vector<std::pair<BigInt, std::int64_t>> parts;
  parts.reserve(count);
  std::int64_t emin = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < count; ++i) {
    auto part = term(i);
    if (part.first != 0) {
      emin = std::min(emin, part.second);
      parts.push_back(std::move(part));
    }
  }
  if (parts.empty()) {
    return {};
  }
  BigInt total = 0;
  for (const auto& [n, e] : parts) {
    total += shifted_left(n, e - emin);
  }
  return from_signed(std::move(total), emin);
}

std::pair<BigInt, std::int64_t> signed_parts(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("exact accumulation of a non-finite value");
  }
  if (x == 0.0) {
    return {BigInt(0), 0};
  }
  const auto [m, e] = integer_parts(x);
  BigInt n(m);
  return {std::signbit(x) ? BigInt(-n) : n, e};
}

}  // namespace

DyadicValue dy_sum(std::span<const double> values) {
  return exact_accumulate(values.size(), [&](std::size_t i) { return signed_parts(values[i]); });
}

DyadicValue dy_sum_abs(std::span<const double> values) {
  return exact_accumulate(values.size(), [&](std::size_t i) { return signed_parts(std::fabs(values[i])); });
}

DyadicValue dy_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dy_dot: length mismatch");
  }
  return exact_accumulate(a.size(), [&](std::size_t i) {
    auto [na, ea] = signed_parts(a[i]);
    auto [nb, eb] = signed_parts(b[i]);
    return std::pair<BigInt, std::int64_t>{na * nb, ea + eb};
  });
}

std::int64_t dy_exponent(const DyadicValue& v) {
  if (v.is_zero()) {
    throw std::domain_error("exponent of zero");
  }
  return bit_length(v.numerator) - 1 + v.exp2;
}

DyadicValue dy_ulp(const DyadicValue& v, int p) {
  require_width(p);
  return dy_make(1, BigInt(1), dy_exponent(v) - p + 1);
}

bool dy_is_representable(const DyadicValue& v, int p) {
  require_width(p);
  return v.is_zero() || bit_length(v.numerator) <= p;
}

DyadicValue dy_floor(const DyadicValue& v, int p) {
  require_width(p);
  if (v.is_zero()) {
    return v;
  }
  return v.sign > 0 ? floor_magnitude(v, p) : ceil_magnitude(v, p);
}

DyadicValue dy_ceil(const DyadicValue& v, int p) {
  require_width(p);
  if (v.is_zero()) {
    return v;
  }
  return v.sign > 0 ? ceil_magnitude(v, p) : floor_magnitude(v, p);
}

DyadicValue dy_truncate(const DyadicValue& v, int width) {
  require_width(width);
  return v.is_zero() ? v : floor_magnitude(v, width);
}

DyadicValue dy_round_nearest(const DyadicValue& v, int p) {
  require_width(p);
  if (dy_is_representable(v, p)) {
    return v;
  }
  const DyadicValue down = floor_magnitude(v, p);
  const DyadicValue up = ceil_magnitude(v, p);
  const int cmp = dy_compare(dy_sub(dy_abs(v), dy_abs(down)), dy_sub(dy_abs(up), dy_abs(v)));
  if (cmp < 0) {
    return down;
  }
  if (cmp > 0) {
    return up;
  }
  // Tie: keep the candidate whose p-bit significand is even.
  // The odd numerator ends exactly at the p-th bit iff that bit is 1.
  const bool even = down.exp2 > dy_exponent(down) - p + 1;
  return even ? down : up;
}

DyadicFraction dy_q(const DyadicValue& v, int p, std::optional<int> r) {
  require_width(p);
  if (dy_is_representable(v, p)) {
    return {};
  }
  const DyadicValue target = r ? dy_truncate(v, p + *r) : v;
  const DyadicValue gap = dy_sub(target, dy_floor(v, p));
  if (gap.is_zero()) {
    return {};
  }
  // gap / ulp = numerator * 2^(exp2 - (e - p + 1)). It reaches 1 for
  // negative v whose truncation toward zero lands on the value-ceiling.
  const std::int64_t scale = gap.exp2 - (dy_exponent(v) - p + 1);
  if (scale == 0 && gap.numerator == 1) {
    return {1, 0};
  }
  if (scale >= 0) {
    throw std::logic_error("dy_q: gap exceeds one ulp");
  }
  return {gap.numerator, static_cast<int>(-scale)};
}

}  // namespace srlab
