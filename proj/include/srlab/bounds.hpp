#pragma once

// Closed-form error bounds for recursive summation and inner products under
// SR_{p,r}: bias bounds, the Azuma-Hoeffding (ah_*) and Bienayme-Chebyshev
// (bc_*) probabilistic bounds, and the deterministic worst case.
//
// Throughout, r = nullopt stands for unlimited random bits (u_{p+r} = 0),
// which recovers the classical SR_p bounds.

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Core>

namespace srlab {

struct BoundQuery {
  std::int64_t n = 1;
  int p = 11;
  std::optional<int> r;
  double lambda = 0.1;
  double kappa = 1.0;  // may be +inf

  /// Throws std::invalid_argument on n < 1, p < 1, r < 1 or kappa < 1.
  /// The probabilistic bounds additionally require 0 < lambda < 1.
  void validate() const;
};

double unit_roundoff(int p);

/// u_{p+r}, zero for unlimited random bits.
double truncation_roundoff(int p, std::optional<int> r);

/// gamma_n(u) = (1 + u)^n - 1, evaluated as expm1(n log1p(u)).
double gamma(std::int64_t n, double u);

/// sum |a_i| / |sum a_i| with both sums exact; +inf when the sum vanishes.
double cond_sum(Eigen::Ref<const Eigen::VectorXd> a);
/// cond_sum of the exact Hadamard product a o b.
double cond_inner(Eigen::Ref<const Eigen::VectorXd> a, Eigen::Ref<const Eigen::VectorXd> b);

double bias_bound_sum(const BoundQuery& q);
double ah_bound_sum(const BoundQuery& q);
double bc_bound_sum(const BoundQuery& q);
double det_bound_sum(std::int64_t n, int p, double kappa = 1.0);

double bias_bound_inner(const BoundQuery& q);
double ah_bound_inner(const BoundQuery& q);
double bc_bound_inner(const BoundQuery& q);

/// Leading-order form of the probabilistic bounds for m roundings:
/// sqrt(2m) sqrt(ln(2/lambda)) u_p + m u_{p+r}.
double first_order_bound(std::int64_t m, int p, std::optional<int> r, double lambda);

/// ceil(log2(n) / 2) in integer arithmetic; n >= 2.
int rule_of_thumb_r(std::int64_t n);

/// gamma_m(u_p + u_{p+r}) - gamma_m(u_p), without cancellation.
double b_envelope(std::int64_t m, int p, std::optional<int> r);

inline constexpr std::size_t kPowersetMaxLength = 20;

/// Sum over all subsets K of prod_{i in K} xs[i] * prod_{j not in K} ys[j].
double powerset_expansion(std::span<const double> xs, std::span<const double> ys);
/// Same sum with K ranging over proper subsets only (K = everything excluded).
double powerset_remainder(std::span<const double> xs, std::span<const double> ys);

}  // namespace srlab
