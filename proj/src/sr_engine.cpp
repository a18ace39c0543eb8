#include "srlab/sr_engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace srlab {
namespace {

int sign_of(double v) { return (v > 0) - (v < 0); }

void require_finite_operand(double v) {
  if (!std::isfinite(v)) {
    throw std::domain_error("operand is not finite");
  }
}

void require_finite_result(double v) {
  if (!std::isfinite(v)) {
    throw std::range_error("result overflows the substrate");
  }
}

struct Truncated {
  bool negative = false;
  detail::Magnitude floor;  // floor_p(|x|)
  std::uint64_t kept = 0;   // the r bits below position p of fl_{p+r}(|x|)
};

Truncated truncate_for_sr(const Unrounded& x, const SrConfig& cfg) {
  const int p = cfg.fmt.p;
  const int r = cfg.random_bits();
  int dir = 0;
  const auto m = detail::split(x, dir);
  const auto t = detail::floor_magnitude(m, dir, p + r);
  const std::uint64_t step = std::uint64_t{1} << (kSubstrateWidth - p);
  const std::uint64_t low = t.significand & (step - 1);
  return {x.head < 0, {t.significand - low, t.exponent}, low >> (kSubstrateWidth - p - r)};
}

}  // namespace

SrConfig SrConfig::stochastic(int p, int random_bits) {
  SrConfig cfg{FpFormat(p), random_bits, RoundingMode::SR};
  if (random_bits < 1 || p + random_bits > kSubstrateWidth) {
    throw std::invalid_argument("random bits must satisfy 1 <= r and p + r <= 53, got p=" + std::to_string(p) +
                                " r=" + std::to_string(random_bits));
  }
  return cfg;
}

SrConfig SrConfig::ideal(int p) {
  if (p >= kSubstrateWidth) {
    throw std::invalid_argument("IDEAL stochastic rounding needs p < 53");
  }
  return SrConfig{FpFormat(p), std::nullopt, RoundingMode::SR};
}

SrConfig SrConfig::nearest(int p) { return SrConfig{FpFormat(p), std::nullopt, RoundingMode::RN}; }

SrConfig SrConfig::substrate() { return SrConfig{FpFormat(kSubstrateWidth), std::nullopt, RoundingMode::Substrate}; }

int SrConfig::random_bits() const { return r ? *r : kSubstrateWidth - fmt.p; }

std::string SrConfig::label() const {
  switch (mode) {
    case RoundingMode::RN:
      return "RN";
    case RoundingMode::Substrate:
      return "binary64";
    case RoundingMode::SR:
      break;
  }
  return r ? "SR" + std::to_string(*r) : "SRideal";
}

Unrounded exact_op(Op op, double a, double b) {
  require_finite_operand(a);
  if (op != Op::Sqrt) {
    require_finite_operand(b);
  }
  switch (op) {
    case Op::Sub:
      b = -b;
      [[fallthrough]];
    case Op::Add: {
      const double s = a + b;
      require_finite_result(s);
      const double bb = s - a;
      const double err = (a - (s - bb)) + (b - bb);
      return {s, sign_of(err)};
    }
    case Op::Mul: {
      const double h = a * b;
      require_finite_result(h);
      if (h == 0.0) {
        return {0.0, a == 0.0 || b == 0.0 ? 0 : sign_of(a) * sign_of(b)};
      }
      return {h, sign_of(std::fma(a, b, -h))};
    }
    case Op::Div: {
      if (b == 0.0) {
        throw std::domain_error("division by zero");
      }
      const double q = a / b;
      require_finite_result(q);
      if (q == 0.0) {
        return {0.0, a == 0.0 ? 0 : sign_of(a) * sign_of(b)};
      }
      return {q, sign_of(std::fma(-q, b, a)) * sign_of(b)};
    }
    case Op::Sqrt: {
      if (a < 0.0) {
        throw std::domain_error("square root of a negative number");
      }
      const double s = std::sqrt(a);
      return {s, sign_of(std::fma(-s, s, a))};
    }
  }
  throw std::invalid_argument("unknown operation");
}

std::uint64_t q_r_numerator(const Unrounded& x, const SrConfig& cfg) {
  if (is_representable(x, cfg.fmt)) {
    return 0;
  }
  const auto t = truncate_for_sr(x, cfg);
  // For x < 0 the value-floor is the magnitude ceiling.
  return t.negative ? (std::uint64_t{1} << cfg.random_bits()) - t.kept : t.kept;
}

double sr_round_with_bits(const Unrounded& x, const SrConfig& cfg, std::uint64_t z) {
  if (x.head == 0.0 && x.tail == 0) {
    return 0.0;
  }
  const auto t = truncate_for_sr(x, cfg);
  const std::uint64_t span = std::uint64_t{1} << cfg.random_bits();
  if (t.kept + z < span) {
    return detail::assemble(t.negative, t.floor);
  }
  // The carry propagates into the p-bit significand.
  detail::Magnitude up{t.floor.significand + (std::uint64_t{1} << (kSubstrateWidth - cfg.fmt.p)), t.floor.exponent};
  if (up.significand == std::uint64_t{1} << kSubstrateWidth) {
    up = {up.significand >> 1, up.exponent + 1};
  }
  return detail::assemble(t.negative, up);
}

RoundingRecord make_record(const Unrounded& x, double rounded, const SrConfig& cfg) {
  RoundingRecord rec{x.head, rounded, 0.0, 0.0};
  if (x.head == 0.0) {
    return rec;
  }
  rec.delta = (rounded - x.head) / x.head;
  if (cfg.mode == RoundingMode::SR) {
    rec.beta = (truncate(x, cfg.truncation_width()) - x.head) / x.head;
  }
  return rec;
}

double rn_op(Op op, double a, double b, FpFormat fmt) { return round_nearest(exact_op(op, a, b), fmt); }

}  // namespace srlab
