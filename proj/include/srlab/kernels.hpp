#pragma once

// Reference algorithms with fixed rounding schedules.
//
// recursive_sum:  s_1 = a_1, s_k = round(s_{k-1} + a_k)           (n - 1 roundings)
// inner_product:  s = round(a_1 b_1), then per k >= 2
//                 s = round(s + round(a_k b_k))                   (2n - 1 roundings)
// gd_rosenbrock:  x_{k+1} = round(x_k - t * RN_p(grad f(x_k)))    (one rounding per coordinate)

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srlab/dyadic.hpp"
#include "srlab/sr_engine.hpp"

namespace srlab {

using RoundingTrace = std::vector<RoundingRecord>;

struct KernelResult {
  double value = 0.0;
  DyadicValue exact;
  double rel_error = 0.0;
  std::int64_t op_count = 0;
};

/// A range error raised while processing element `index` of a kernel input.
class KernelRangeError : public std::range_error {
 public:
  KernelRangeError(std::size_t index, const std::string& what)
      : std::range_error("at index " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct Accumulation {
  double value = 0.0;
  std::int64_t roundings = 0;
};

/// |value - exact| / |exact|; 0 when both vanish and +inf when only exact does.
double relative_error(double value, const DyadicValue& exact);

namespace detail {

void require_kernel_input(Eigen::Ref<const Eigen::VectorXd> a, const SrConfig& cfg, const char* name);

template <BitSource Source>
double traced_round(Op op, double a, double b, const SrConfig& cfg, Source& bits, RoundingTrace* trace,
                    std::size_t index) {
  try {
    if (trace == nullptr) {
      return sr_op(op, a, b, cfg, bits);
    }
    RoundingRecord rec;
    const double out = sr_op(op, a, b, cfg, bits, &rec);
    trace->push_back(rec);
    return out;
  } catch (const std::range_error& e) {
    throw KernelRangeError(index, e.what());
  }
}

}  // namespace detail

template <BitSource Source>
Accumulation accumulate_sum(Eigen::Ref<const Eigen::VectorXd> a, const SrConfig& cfg, Source& bits,
                            RoundingTrace* trace = nullptr) {
  detail::require_kernel_input(a, cfg, "recursive_sum");
  Accumulation acc{a[0], 0};
  for (Eigen::Index k = 1; k < a.size(); ++k) {
    acc.value = detail::traced_round(Op::Add, acc.value, a[k], cfg, bits, trace, static_cast<std::size_t>(k));
    ++acc.roundings;
  }
  return acc;
}

template <BitSource Source>
Accumulation accumulate_inner(Eigen::Ref<const Eigen::VectorXd> a, Eigen::Ref<const Eigen::VectorXd> b,
                              const SrConfig& cfg, Source& bits, RoundingTrace* trace = nullptr) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("inner_product: length mismatch");
  }
  detail::require_kernel_input(a, cfg, "inner_product");
  detail::require_kernel_input(b, cfg, "inner_product");
  Accumulation acc{detail::traced_round(Op::Mul, a[0], b[0], cfg, bits, trace, 0), 1};
  for (Eigen::Index k = 1; k < a.size(); ++k) {
    const auto index = static_cast<std::size_t>(k);
    const double product = detail::traced_round(Op::Mul, a[k], b[k], cfg, bits, trace, index);
    acc.value = detail::traced_round(Op::Add, acc.value, product, cfg, bits, trace, index);
    acc.roundings += 2;
  }
  return acc;
}

template <BitSource Source>
KernelResult recursive_sum(Eigen::Ref<const Eigen::VectorXd> a, const SrConfig& cfg, Source& bits,
                           RoundingTrace* trace = nullptr) {
  const auto acc = accumulate_sum(a, cfg, bits, trace);
  KernelResult out{acc.value, dy_sum({a.data(), static_cast<std::size_t>(a.size())}), 0.0, acc.roundings};
  out.rel_error = relative_error(out.value, out.exact);
  return out;
}

template <BitSource Source>
KernelResult inner_product(Eigen::Ref<const Eigen::VectorXd> a, Eigen::Ref<const Eigen::VectorXd> b,
                           const SrConfig& cfg, Source& bits, RoundingTrace* trace = nullptr) {
  const auto acc = accumulate_inner(a, b, cfg, bits, trace);
  KernelResult out{acc.value,
                   dy_dot({a.data(), static_cast<std::size_t>(a.size())}, {b.data(), static_cast<std::size_t>(b.size())}),
                   0.0, acc.roundings};
  out.rel_error = relative_error(out.value, out.exact);
  return out;
}

double rosenbrock_f(const Eigen::Vector2d& x);
Eigen::Vector2d rosenbrock_grad(const Eigen::Vector2d& x);

struct GdOptions {
  /// Also round the step t * g with the configured mode before subtracting.
  bool round_product = false;
};

struct GdTrajectory {
  std::vector<Eigen::Vector2d> iterates;
  std::vector<double> loss;  // |f(x_k) - f(x*)| with f(x*) = 0
  std::string mode;
  bool diverged = false;
};

template <BitSource Source>
GdTrajectory gd_rosenbrock(const Eigen::Vector2d& x0, double t, int iters, const SrConfig& cfg, Source& bits,
                           GdOptions options = {}) {
  if (iters < 0) {
    throw std::invalid_argument("gd_rosenbrock: iters must be non-negative");
  }
  if (!(t > 0.0)) {
    throw std::invalid_argument("gd_rosenbrock: step size must be positive");
  }
  const bool emulated = cfg.mode != RoundingMode::Substrate;
  GdTrajectory traj;
  traj.mode = cfg.label();
  traj.iterates.reserve(static_cast<std::size_t>(iters) + 1);
  traj.loss.reserve(static_cast<std::size_t>(iters) + 1);

  Eigen::Vector2d x = x0;
  if (emulated) {
    x = {round_nearest(x0[0], cfg.fmt), round_nearest(x0[1], cfg.fmt)};
  }
  traj.iterates.push_back(x);
  traj.loss.push_back(std::fabs(rosenbrock_f(x)));

  for (int k = 0; k < iters; ++k) {
    try {
      Eigen::Vector2d g = rosenbrock_grad(x);
      Eigen::Vector2d next;
      for (int i = 0; i < 2; ++i) {
        if (emulated) {
          g[i] = round_nearest(g[i], cfg.fmt);
        }
        double step = t * g[i];
        if (options.round_product) {
          step = sr_op(Op::Mul, t, g[i], cfg, bits);
        }
        next[i] = sr_op(Op::Sub, x[i], step, cfg, bits);
      }
      const double f = rosenbrock_f(next);
      if (!std::isfinite(f)) {
        traj.diverged = true;
        break;
      }
      x = next;
    } catch (const std::range_error&) {
      traj.diverged = true;
      break;
    } catch (const std::domain_error&) {
      traj.diverged = true;
      break;
    }
    traj.iterates.push_back(x);
    traj.loss.push_back(std::fabs(rosenbrock_f(x)));
  }
  return traj;
}

}  // namespace srlab
