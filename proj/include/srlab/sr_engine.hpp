#pragma once

// Limited-precision stochastic rounding SR_{p,r}.
//
// The rounding is summation-based, the way hardware does it: the value is
// truncated to p + r significand bits, an r-bit random integer Z is added
// to the r bits below the target precision, and the result is truncated to
// p bits. The magnitude rounds up exactly when the addition carries, which
// happens with probability k / 2^r where k is the value of the r kept bits.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "srlab/fp_core.hpp"
#include "srlab/rng.hpp"

namespace srlab {

enum class RoundingMode {
  SR,         // SR_{p,r}
  RN,         // round to nearest at precision p
  Substrate,  // binary64 round to nearest, no emulation
};

struct SrConfig {
  FpFormat fmt;
  std::optional<int> r;  // nullopt: IDEAL, resolved to 53 - p
  RoundingMode mode = RoundingMode::SR;

  static SrConfig stochastic(int p, int random_bits);
  static SrConfig ideal(int p);
  static SrConfig nearest(int p);
  static SrConfig substrate();

  /// Number of random bits actually drawn; IDEAL gives 53 - p.
  int random_bits() const;
  bool is_ideal() const { return !r.has_value(); }
  /// Width of the truncation fl_{p+r}.
  int truncation_width() const { return fmt.p + random_bits(); }
  /// "SR7", "SRideal", "RN" or "binary64".
  std::string label() const;
};

/// One traced rounding: rounded = exact_input * (1 + delta) and
/// fl_{p+r}(exact_input) = exact_input * (1 + beta).
struct RoundingRecord {
  double exact_input = 0.0;
  double rounded = 0.0;
  double delta = 0.0;
  double beta = 0.0;
};

enum class Op { Add, Sub, Mul, Div, Sqrt };

/// The exact result of `a op b` as its binary64 rounding plus the sign of
/// the residual. Throws std::domain_error for division by zero, the square
/// root of a negative number and non-finite operands; std::range_error when
/// the substrate result overflows.
Unrounded exact_op(Op op, double a, double b = 0.0);

/// k with q_r(x) = k / 2^r, in [0, 2^r].
std::uint64_t q_r_numerator(const Unrounded& x, const SrConfig& cfg);

/// The summation mechanism with an explicit draw z in [0, 2^r).
double sr_round_with_bits(const Unrounded& x, const SrConfig& cfg, std::uint64_t z);

/// Draws r bits from `bits` (always exactly one draw) and rounds.
template <BitSource Source>
double sr_round(const Unrounded& x, const SrConfig& cfg, Source& bits) {
  const std::uint64_t z = bits.next_bits(cfg.random_bits());
  return sr_round_with_bits(x, cfg, z);
}

/// Rounds according to cfg.mode; only SR consumes random bits.
template <BitSource Source>
double round_with(const Unrounded& x, const SrConfig& cfg, Source& bits) {
  switch (cfg.mode) {
    case RoundingMode::SR:
      return sr_round(x, cfg, bits);
    case RoundingMode::RN:
      return round_nearest(x, cfg.fmt);
    case RoundingMode::Substrate:
      break;
  }
  if (x.head == 0.0 && x.tail != 0) {
    throw std::range_error("exact value underflows the substrate");
  }
  return x.head;
}

RoundingRecord make_record(const Unrounded& x, double rounded, const SrConfig& cfg);

/// Stochastically rounded elementary operation (or its RN / binary64
/// counterpart, following cfg.mode). `trace`, when given, receives delta and beta.
template <BitSource Source>
double sr_op(Op op, double a, double b, const SrConfig& cfg, Source& bits, RoundingRecord* trace = nullptr) {
  const Unrounded x = exact_op(op, a, b);
  const double rounded = round_with(x, cfg, bits);
  if (trace != nullptr) {
    *trace = make_record(x, rounded, cfg);
  }
  return rounded;
}

double rn_op(Op op, double a, double b, FpFormat fmt);

}  // namespace srlab
