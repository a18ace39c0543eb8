#include "srlab/bounds.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "srlab/dyadic.hpp"

namespace srlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("lambda must lie in (0, 1)");
  }
}

// gamma_m(u + v) - gamma_m(u) = (1+u)^m ((1 + v/(1+u))^m - 1).
double tail(std::int64_t m, double u, double v) {
  if (m <= 0 || v == 0.0) {
    return 0.0;
  }
  const double md = static_cast<double>(m);
  return std::exp(md * std::log1p(u)) * std::expm1(md * std::log1p(v / (1.0 + u)));
}

double scaled(double kappa, double value) { return std::isinf(kappa) ? kInf : kappa * value; }

std::vector<double> to_vector(Eigen::Ref<const Eigen::VectorXd> a) { return {a.data(), a.data() + a.size()}; }

double condition(const DyadicValue& abs_sum, const DyadicValue& sum) {
  if (abs_sum.is_zero()) {
    throw std::domain_error("condition number of an all-zero vector");
  }
  if (sum.is_zero()) {
    return kInf;
  }
  return dy_to_double_approx(abs_sum) / std::fabs(dy_to_double_approx(sum));
}

void require_powerset_args(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("powerset expansion: length mismatch");
  }
  if (xs.size() > kPowersetMaxLength) {
    throw std::invalid_argument("powerset expansion: length exceeds 20");
  }
}

double subset_sum(std::span<const double> xs, std::span<const double> ys, bool include_full) {
  const std::size_t n = xs.size();
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  double total = 0.0;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    if (mask == full && !include_full) {
      continue;
    }
    double term = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      term *= (mask >> i) & 1 ? xs[i] : ys[i];
    }
    total += term;
  }
  return total;
}

}  // namespace

void BoundQuery::validate() const {
  if (n < 1) {
    throw std::invalid_argument("n must be at least 1");
  }
  if (p < 1) {
    throw std::invalid_argument("p must be at least 1");
  }
  if (r && *r < 1) {
    throw std::invalid_argument("r must be at least 1");
  }
  if (!(kappa >= 1.0)) {
    throw std::invalid_argument("kappa must be at least 1");
  }
}

double unit_roundoff(int p) {
  if (p < 1) {
    throw std::invalid_argument("p must be at least 1");
  }
  return std::ldexp(1.0, 1 - p);
}

double truncation_roundoff(int p, std::optional<int> r) { return r ? unit_roundoff(p + *r) : 0.0; }

double gamma(std::int64_t n, double u) {
  if (n < 0 || u < 0.0) {
    throw std::invalid_argument("gamma requires n >= 0 and u >= 0");
  }
  if (n == 0) {
    return 0.0;
  }
  return std::expm1(static_cast<double>(n) * std::log1p(u));
}

double cond_sum(Eigen::Ref<const Eigen::VectorXd> a) {
  if (a.size() == 0) {
    throw std::invalid_argument("cond_sum of an empty vector");
  }
  const auto v = to_vector(a);
  return condition(dy_sum_abs(v), dy_sum(v));
}

double cond_inner(Eigen::Ref<const Eigen::VectorXd> a, Eigen::Ref<const Eigen::VectorXd> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cond_inner: length mismatch");
  }
  if (a.size() == 0) {
    throw std::invalid_argument("cond_inner of empty vectors");
  }
  const auto av = to_vector(a);
  const auto bv = to_vector(b);
  std::vector<double> abs_a(av.size());
  std::vector<double> abs_b(bv.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    abs_a[i] = std::fabs(av[i]);
    abs_b[i] = std::fabs(bv[i]);
  }
  return condition(dy_dot(abs_a, abs_b), dy_dot(av, bv));
}

double bias_bound_sum(const BoundQuery& q) {
  q.validate();
  return scaled(q.kappa, gamma(q.n - 1, truncation_roundoff(q.p, q.r)));
}

double ah_bound_sum(const BoundQuery& q) {
  q.validate();
  require_lambda(q.lambda);
  const double u = unit_roundoff(q.p);
  const std::int64_t m = q.n - 1;
  const double martingale = std::sqrt(u * gamma(2 * m, u)) * std::sqrt(std::log(2.0 / q.lambda));
  return scaled(q.kappa, martingale + tail(m, u, truncation_roundoff(q.p, q.r)));
}

double bc_bound_sum(const BoundQuery& q) {
  q.validate();
  require_lambda(q.lambda);
  const double u = unit_roundoff(q.p);
  const std::int64_t m = q.n - 1;
  const double variance = std::sqrt(gamma(m, u * u) / q.lambda);
  return scaled(q.kappa, variance + tail(m, u, truncation_roundoff(q.p, q.r)));
}

double det_bound_sum(std::int64_t n, int p, double kappa) {
  BoundQuery{n, p, std::nullopt, 0.1, kappa}.validate();
  return scaled(kappa, gamma(n - 1, unit_roundoff(p)));
}

double bias_bound_inner(const BoundQuery& q) {
  q.validate();
  return scaled(q.kappa, gamma(q.n, truncation_roundoff(q.p, q.r)));
}

double ah_bound_inner(const BoundQuery& q) {
  q.validate();
  require_lambda(q.lambda);
  const double u = unit_roundoff(q.p);
  const double martingale = std::sqrt(u * gamma(2 * q.n, u)) * std::sqrt(std::log(2.0 / q.lambda));
  return scaled(q.kappa, martingale + tail(q.n, u, truncation_roundoff(q.p, q.r)));
}

double bc_bound_inner(const BoundQuery& q) {
  q.validate();
  require_lambda(q.lambda);
  const double u = unit_roundoff(q.p);
  const double variance = std::sqrt(gamma(q.n, u * u) / q.lambda);
  return scaled(q.kappa, variance + tail(q.n, u, truncation_roundoff(q.p, q.r)));
}

double first_order_bound(std::int64_t m, int p, std::optional<int> r, double lambda) {
  require_lambda(lambda);
  const double md = static_cast<double>(m);
  return std::sqrt(2.0 * md) * std::sqrt(std::log(2.0 / lambda)) * unit_roundoff(p) +
         md * truncation_roundoff(p, r);
}

int rule_of_thumb_r(std::int64_t n) {
  if (n < 2) {
    throw std::invalid_argument("rule of thumb needs n >= 2");
  }
  // ceil(log2 n) = bit_width(n - 1), and ceil(x / 2) = ceil(ceil(x) / 2).
  const int ceil_log2 = std::bit_width(static_cast<std::uint64_t>(n - 1));
  return (ceil_log2 + 1) / 2;
}

double b_envelope(std::int64_t m, int p, std::optional<int> r) {
  if (m < 0) {
    throw std::invalid_argument("b_envelope needs m >= 0");
  }
  return tail(m, unit_roundoff(p), truncation_roundoff(p, r));
}

double powerset_expansion(std::span<const double> xs, std::span<const double> ys) {
  require_powerset_args(xs, ys);
  return subset_sum(xs, ys, true);
}

double powerset_remainder(std::span<const double> xs, std::span<const double> ys) {
  require_powerset_args(xs, ys);
  return subset_sum(xs, ys, false);
}

}  // namespace srlab
