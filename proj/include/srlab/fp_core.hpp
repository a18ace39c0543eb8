#pragma once

// Rounding primitives for a precision-p binary format emulated on binary64.
//
// Every value lives in an IEEE-754 double. A precision-p number is a double
// whose significand has at most p significant bits. The exponent range is
// unbounded inside the substrate's normal range: an operation that would
// produce a subnormal or an infinity throws std::range_error instead of
// flushing. NaN and infinite inputs throw std::domain_error.

#include <cstdint>

namespace srlab {

inline constexpr int kSubstrateWidth = 53;

/// Target precision p (significand bits, leading one included) on a
/// binary64 substrate.
struct FpFormat {
  int p = kSubstrateWidth;
  int substrate_width = kSubstrateWidth;

  FpFormat() = default;
  /// Throws std::invalid_argument unless 2 <= precision <= 53.
  explicit FpFormat(int precision);

  /// u_p = 2^(1-p).
  double unit_roundoff() const;

  bool operator==(const FpFormat&) const = default;
};

/// x = (-1)^sign * 2^exponent * significand with significand in [1, 2).
struct Decomposition {
  int sign = 0;
  int exponent = 0;
  double significand = 1.0;
};

/// An exact real known through its binary64 rounding `head` and the sign of
/// the residual (exact - head). The residual is always smaller than half an
/// ulp of `head` at 53 bits, which is all the rounding primitives need.
struct Unrounded {
  double head = 0.0;
  int tail = 0;  // -1, 0 or +1

  Unrounded() = default;
  Unrounded(double value) : head(value) {}  // NOLINT: exact doubles convert implicitly
  Unrounded(double h, int tail_sign) : head(h), tail(tail_sign) {}
};

Decomposition decompose(double x);

/// 2^(e-p+1) for the normalized exponent e of x. ulp(0) is a domain error.
double ulp(double x, FpFormat fmt);
double ulp(const Unrounded& x, FpFormat fmt);

double round_down(double x, FpFormat fmt);
double round_down(const Unrounded& x, FpFormat fmt);
double round_up(double x, FpFormat fmt);
double round_up(const Unrounded& x, FpFormat fmt);

/// Drops significand bits past position `width` (round toward zero).
/// fl_{p+r}(x) is truncate(x, p + r).
double truncate(double x, int width);
double truncate(const Unrounded& x, int width);

/// Round to nearest, ties to even.
double round_nearest(double x, FpFormat fmt);
double round_nearest(const Unrounded& x, FpFormat fmt);

bool is_representable(double x, FpFormat fmt);
bool is_representable(const Unrounded& x, FpFormat fmt);

namespace detail {

/// |x| = significand * 2^(exponent - 52), significand in [2^52, 2^53).
struct Magnitude {
  std::uint64_t significand = 0;
  int exponent = 0;
};

/// Validates a nonzero Unrounded and returns the magnitude of its head.
/// `tail_dir` receives the residual direction relative to |head|.
Magnitude split(const Unrounded& x, int& tail_dir);

/// Largest width-bit magnitude not above |x| (x given by m and tail_dir).
Magnitude floor_magnitude(Magnitude m, int tail_dir, int width);
Magnitude ceil_magnitude(Magnitude m, int tail_dir, int width);

/// Assembles +/- m as a double; throws std::range_error outside the normal range.
double assemble(bool negative, Magnitude m);

}  // namespace detail
}  // namespace srlab
