#include "srlab/fp_core.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace srlab {
namespace {

constexpr std::uint64_t kHidden = std::uint64_t{1} << 52;
constexpr std::uint64_t kFractionMask = kHidden - 1;
constexpr std::uint64_t kSignBit = std::uint64_t{1} << 63;
constexpr int kMinExponent = -1022;
constexpr int kMaxExponent = 1023;

void require_width(int width) {
  if (width < 1 || width > kSubstrateWidth) {
    throw std::invalid_argument("width must lie in [1, 53], got " + std::to_string(width));
  }
}

void require_finite(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("rounding of a non-finite value");
  }
}

std::uint64_t grid_step(int width) { return std::uint64_t{1} << (kSubstrateWidth - width); }

detail::Magnitude normalized(std::uint64_t significand, int exponent) {
  if (significand == (kHidden << 1)) {
    return {kHidden, exponent + 1};
  }
  return {significand, exponent};
}

}  // namespace

FpFormat::FpFormat(int precision) : p(precision) {
  if (precision < 2 || precision > kSubstrateWidth) {
    throw std::invalid_argument("precision must lie in [2, 53], got " + std::to_string(precision));
  }
}

double FpFormat::unit_roundoff() const { return std::ldexp(1.0, 1 - p); }

namespace detail {

Magnitude split(const Unrounded& x, int& tail_dir) {
  require_finite(x.head);
  if (x.head == 0.0) {
    throw std::range_error("exact value underflows the substrate");
  }
  const auto bits = std::bit_cast<std::uint64_t>(x.head);
  const int biased = static_cast<int>((bits >> 52) & 0x7ff);
  if (biased == 0) {
    throw std::range_error("subnormal value outside the emulated exponent range");
  }
  Magnitude m{(bits & kFractionMask) | kHidden, biased - 1023};
  tail_dir = x.head > 0 ? x.tail : -x.tail;
  if (m.significand == kHidden && tail_dir < 0 && m.exponent == kMinExponent) {
    throw std::range_error("exact value lies below the normal range");
  }
  return m;
}

Magnitude floor_magnitude(Magnitude m, int tail_dir, int width) {
  const std::uint64_t step = grid_step(width);
  const std::uint64_t low = m.significand & (step - 1);
  if (low != 0) {
    return {m.significand - low, m.exponent};
  }
  if (tail_dir >= 0) {
    return m;
  }
  // On the grid but the exact value sits just below it.
  if (m.significand == kHidden) {
    return {(kHidden << 1) - step, m.exponent - 1};
  }
  return {m.significand - step, m.exponent};
}

Magnitude ceil_magnitude(Magnitude m, int tail_dir, int width) {
  const std::uint64_t step = grid_step(width);
  const std::uint64_t low = m.significand & (step - 1);
  if (low != 0) {
    return normalized(m.significand - low + step, m.exponent);
  }
  if (tail_dir <= 0) {
    return m;
  }
  return normalized(m.significand + step, m.exponent);
}

double assemble(bool negative, Magnitude m) {
  if (m.exponent > kMaxExponent) {
    throw std::range_error("result overflows the substrate");
  }
  if (m.exponent < kMinExponent) {
    throw std::range_error("result underflows into the subnormal range");
  }
  std::uint64_t bits = (static_cast<std::uint64_t>(m.exponent + 1023) << 52) | (m.significand & kFractionMask);
  if (negative) {
    bits |= kSignBit;
  }
  return std::bit_cast<double>(bits);
}

}  // namespace detail

Decomposition decompose(double x) {
  if (x == 0.0 || !std::isfinite(x)) {
    throw std::domain_error("decompose requires a nonzero finite value");
  }
  int k = 0;
  const double f = std::frexp(std::fabs(x), &k);
  return {std::signbit(x) ? 1 : 0, k - 1, 2.0 * f};
}

double ulp(const Unrounded& x, FpFormat fmt) {
  if (x.head == 0.0 && x.tail == 0) {
    throw std::domain_error("ulp is undefined at zero");
  }
  int dir = 0;
  const auto m = detail::split(x, dir);
  const int e = (m.significand == kHidden && dir < 0) ? m.exponent - 1 : m.exponent;
  return std::ldexp(1.0, e - fmt.p + 1);
}

double ulp(double x, FpFormat fmt) { return ulp(Unrounded{x}, fmt); }

double round_down(const Unrounded& x, FpFormat fmt) {
  require_finite(x.head);
  if (x.head == 0.0 && x.tail == 0) {
    return 0.0;
  }
  int dir = 0;
  const auto m = detail::split(x, dir);
  const bool negative = x.head < 0;
  return detail::assemble(negative, negative ? detail::ceil_magnitude(m, dir, fmt.p)
                                             : detail::floor_magnitude(m, dir, fmt.p));
}

double round_down(double x, FpFormat fmt) { return round_down(Unrounded{x}, fmt); }

double round_up(const Unrounded& x, FpFormat fmt) {
  require_finite(x.head);
  if (x.head == 0.0 && x.tail == 0) {
    return 0.0;
  }
  int dir = 0;
  const auto m = detail::split(x, dir);
  const bool negative = x.head < 0;
  return detail::assemble(negative, negative ? detail::floor_magnitude(m, dir, fmt.p)
                                             : detail::ceil_magnitude(m, dir, fmt.p));
}

double round_up(double x, FpFormat fmt) { return round_up(Unrounded{x}, fmt); }

double truncate(const Unrounded& x, int width) {
  require_width(width);
  require_finite(x.head);
  if (x.head == 0.0 && x.tail == 0) {
    return 0.0;
  }
  int dir = 0;
  const auto m = detail::split(x, dir);
  return detail::assemble(x.head < 0, detail::floor_magnitude(m, dir, width));
}

double truncate(double x, int width) { return truncate(Unrounded{x}, width); }

double round_nearest(const Unrounded& x, FpFormat fmt) {
  require_finite(x.head);
  if (x.head == 0.0 && x.tail == 0) {
    return 0.0;
  }
  int dir = 0;
  const auto m = detail::split(x, dir);
  const std::uint64_t step = grid_step(fmt.p);
  const std::uint64_t low = m.significand & (step - 1);
  if (low == 0) {
    // |exact - head| < ulp_53(head) / 2, so head is the nearest grid point.
    return x.head;
  }
  const std::uint64_t half = step >> 1;
  const std::uint64_t base = m.significand - low;
  bool up = low > half;
  if (low == half) {
    up = dir > 0 || (dir == 0 && ((base / step) & 1) != 0);
  }
  return detail::assemble(x.head < 0, up ? normalized(base + step, m.exponent) : detail::Magnitude{base, m.exponent});
}

double round_nearest(double x, FpFormat fmt) { return round_nearest(Unrounded{x}, fmt); }

bool is_representable(double x, FpFormat fmt) {
  if (x == 0.0) {
    return true;
  }
  if (!std::isfinite(x)) {
    return false;
  }
  int k = 0;
  const double f = std::frexp(std::fabs(x), &k);
  const auto significand = static_cast<std::uint64_t>(std::ldexp(f, kSubstrateWidth));
  return (significand & (grid_step(fmt.p) - 1)) == 0;
}

bool is_representable(const Unrounded& x, FpFormat fmt) {
  return x.tail == 0 && is_representable(x.head, fmt);
}

}  // namespace srlab
