#include "srlab/kernels.hpp"

#include <cmath>
#include <limits>

#include "srlab/fp_core.hpp"

namespace srlab {

double relative_error(double value, const DyadicValue& exact) {
  const DyadicValue diff = dy_abs(dy_sub(dy_from_float(value), exact));
  if (exact.is_zero()) {
    return diff.is_zero() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return dy_to_double_approx(diff) / std::fabs(dy_to_double_approx(exact));
}

namespace detail {

void require_kernel_input(Eigen::Ref<const Eigen::VectorXd> a, const SrConfig& cfg, const char* name) {
  if (a.size() == 0) {
    throw std::invalid_argument(std::string(name) + ": empty input");
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) {
      throw std::invalid_argument(std::string(name) + ": non-finite input at index " + std::to_string(i));
    }
    if (cfg.mode != RoundingMode::Substrate && !is_representable(a[i], cfg.fmt)) {
      throw std::invalid_argument(std::string(name) + ": input at index " + std::to_string(i) +
                                  " is not representable at precision " + std::to_string(cfg.fmt.p));
    }
  }
}

}  // namespace detail

double rosenbrock_f(const Eigen::Vector2d& x) {
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  return a * a + 100.0 * b * b;
}

Eigen::Vector2d rosenbrock_grad(const Eigen::Vector2d& x) {
  const double b = x[1] - x[0] * x[0];
  return {-2.0 * (1.0 - x[0]) - 400.0 * x[0] * b, 200.0 * b};
}

}  // namespace srlab
