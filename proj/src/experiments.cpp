#include "srlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "srlab/bounds.hpp"
#include "srlab/dyadic.hpp"
#include "srlab/kernels.hpp"

namespace srlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs fn(0..count-1) on up to `threads` workers. Callers write results into
// index-addressed slots, so the schedule never affects the outcome.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(std::min(workers, count));
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }

  double std_error() const {
    if (count < 2 || !std::isfinite(mean)) {
      return count < 2 ? 0.0 : kInf;
    }
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

Eigen::VectorXd custom_prefix(const std::vector<double>& values, std::int64_t n, int p) {
  Eigen::VectorXd a(n);
  const FpFormat fmt(p);
  for (std::int64_t i = 0; i < n; ++i) {
    a[i] = round_nearest(values[static_cast<std::size_t>(i)], fmt);
  }
  return a;
}

// Summation and inner products share everything but the kernel.
ExperimentResult run_accumulation(const ExperimentSpec& spec, bool dot) {
  spec.validate();
  const auto modes = spec.modes();
  const std::size_t mode_count = modes.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  const std::size_t jobs = spec.n_grid.size() * trials;
  std::vector<double> errors(jobs * mode_count);

  parallel_for(jobs, spec.threads, [&](std::size_t job) {
    const std::int64_t n = spec.n_grid[job / trials];
    RngStream stream = derive_trial_stream(spec.seed, job);
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    if (spec.input_a.empty()) {
      a = draw_uniform_inputs(stream, n, spec.p);
      if (dot) {
        b = draw_uniform_inputs(stream, n, spec.p);
      }
    } else {
      a = custom_prefix(spec.input_a, n, spec.p);
      if (dot) {
        b = custom_prefix(spec.input_b, n, spec.p);
      }
    }
    const auto size = static_cast<std::size_t>(n);
    const DyadicValue exact = dot ? dy_dot({a.data(), size}, {b.data(), size}) : dy_sum({a.data(), size});
    for (std::size_t m = 0; m < mode_count; ++m) {
      RngStream bits = stream.lane(static_cast<std::uint16_t>(m + 1));
      const Accumulation acc = dot ? accumulate_inner(a, b, modes[m], bits) : accumulate_sum(a, modes[m], bits);
      errors[job * mode_count + m] = relative_error(acc.value, exact);
    }
  });

  ExperimentResult result;
  result.trials.reserve(jobs * mode_count);
  for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
    for (std::size_t m = 0; m < mode_count; ++m) {
      Moments moments;
      const std::string label = modes[m].label();
      for (std::size_t t = 0; t < trials; ++t) {
        const double e = errors[(ni * trials + t) * mode_count + m];
        moments.add(e);
        result.trials.push_back({spec.n_grid[ni], label, e, static_cast<std::int64_t>(t)});
      }
      result.rows.push_back({"", spec.n_grid[ni], label, moments.mean, moments.std_error()});
    }
  }
  return result;
}

std::string file_tag(const std::string& mode) {
  if (mode == "RN") {
    return "rn";
  }
  if (mode == "binary64" || mode == "det") {
    return mode;
  }
  if (mode.rfind("SR", 0) == 0) {
    return "r" + mode.substr(2);
  }
  if (mode.rfind("ah_", 0) == 0 || mode.rfind("bc_", 0) == 0) {
    return mode.substr(3);
  }
  return mode;
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Sum:
      return "sum";
    case ExperimentKind::Dot:
      return "dot";
    case ExperimentKind::Rosenbrock:
      return "rosenbrock";
    case ExperimentKind::BoundsTable:
      return "bounds-table";
  }
  return "unknown";
}

std::string r_tag(const std::optional<int>& r) { return r ? std::to_string(*r) : "ideal"; }

void ExperimentSpec::validate() const {
  if (p < 2 || p > kSubstrateWidth) {
    throw std::invalid_argument("p must lie in [2, 53]");
  }
  for (const auto& r : r_list) {
    if ((r && (*r < 1 || p + *r > kSubstrateWidth)) || (!r && p >= kSubstrateWidth)) {
      throw std::invalid_argument("every r must satisfy 1 <= r and p + r <= 53");
    }
  }
  if (trials < 1) {
    throw std::invalid_argument("trials must be at least 1");
  }
  if (threads < 1) {
    throw std::invalid_argument("threads must be at least 1");
  }
  if (kind == ExperimentKind::Rosenbrock) {
    if (iters < 0) {
      throw std::invalid_argument("iters must be non-negative");
    }
    if (!(step > 0.0)) {
      throw std::invalid_argument("the step size must be positive");
    }
    return;
  }
  if (n_grid.empty()) {
    throw std::invalid_argument("the n grid is empty");
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw std::invalid_argument("the n grid must be positive and strictly increasing");
    }
  }
  if (kind == ExperimentKind::BoundsTable && !(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("lambda must lie in (0, 1)");
  }
  if (!input_a.empty()) {
    if (static_cast<std::int64_t>(input_a.size()) < n_grid.back()) {
      throw std::invalid_argument("the input file holds fewer values than the largest n");
    }
    if (kind == ExperimentKind::Dot && input_b.size() != input_a.size()) {
      throw std::invalid_argument("inner-product inputs need two columns of equal length");
    }
  }
}

std::vector<SrConfig> ExperimentSpec::modes() const {
  std::vector<SrConfig> out;
  if (include_rn) {
    if (kind == ExperimentKind::Rosenbrock) {
      out.push_back(SrConfig::substrate());
    }
    out.push_back(SrConfig::nearest(p));
  }
  for (const auto& r : r_list) {
    out.push_back(r ? SrConfig::stochastic(p, *r) : SrConfig::ideal(p));
  }
  return out;
}

RngStream derive_trial_stream(std::uint64_t seed, std::uint64_t trial_index) { return make_stream(seed, trial_index); }

Eigen::VectorXd draw_uniform_inputs(RngStream& stream, std::int64_t n, int p) {
  const FpFormat fmt(p);
  Eigen::VectorXd a(n);
  for (std::int64_t i = 0; i < n; ++i) {
    a[i] = round_nearest(stream.next_uniform(), fmt);
  }
  return a;
}

ExperimentResult run_sum_experiment(const ExperimentSpec& spec) { return run_accumulation(spec, false); }

ExperimentResult run_dot_experiment(const ExperimentSpec& spec) { return run_accumulation(spec, true); }

ExperimentResult run_rosenbrock(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<Eigen::Vector2d> starts = spec.starts;
  if (starts.empty()) {
    starts = {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.5, 0.5)};
  }
  const auto modes = spec.modes();
  const auto points = static_cast<std::size_t>(spec.iters) + 1;
  const auto trials = static_cast<std::size_t>(spec.trials);
  const std::size_t batch = std::max<std::size_t>(16, static_cast<std::size_t>(spec.threads) * 4);
  ExperimentResult result;

  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::string group = starts.size() == 1 ? "" : "s" + std::to_string(s);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const SrConfig& cfg = modes[m];
      const std::string label = cfg.label();
      const bool stochastic = cfg.mode == RoundingMode::SR;
      const std::size_t runs = stochastic ? trials : 1;
      std::vector<Moments> moments(points);

      for (std::size_t first = 0; first < runs; first += batch) {
        const std::size_t count = std::min(batch, runs - first);
        std::vector<std::vector<double>> losses(count);
        std::vector<char> diverged(count, 0);
        parallel_for(count, spec.threads, [&](std::size_t i) {
          RngStream bits = derive_trial_stream(spec.seed, s * trials + first + i).lane(static_cast<std::uint16_t>(m + 1));
          GdTrajectory traj = gd_rosenbrock(starts[s], spec.step, spec.iters, cfg, bits);
          diverged[i] = traj.diverged ? 1 : 0;
          traj.loss.resize(points, kInf);
          losses[i] = std::move(traj.loss);
        });
        for (std::size_t i = 0; i < count; ++i) {
          result.diverged = result.diverged || diverged[i] != 0;
          for (std::size_t k = 0; k < points; ++k) {
            moments[k].add(losses[i][k]);
          }
          result.trials.push_back({spec.iters, label, losses[i].back(), static_cast<std::int64_t>(first + i)});
        }
      }
      for (std::size_t k = 0; k < points; ++k) {
        result.rows.push_back({group, static_cast<std::int64_t>(k), label, moments[k].mean, moments[k].std_error()});
      }
    }
  }
  return result;
}

ExperimentResult run_bounds_table(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  for (const std::int64_t n : spec.n_grid) {
    result.rows.push_back({"", n, "det", det_bound_sum(n, spec.p, 1.0), 0.0});
    for (const auto& r : spec.r_list) {
      const BoundQuery q{n, spec.p, r, spec.lambda, 1.0};
      result.rows.push_back({"", n, "ah_r" + r_tag(r), ah_bound_sum(q), 0.0});
      result.rows.push_back({"", n, "bc_r" + r_tag(r), bc_bound_sum(q), 0.0});
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::Sum:
      return run_sum_experiment(spec);
    case ExperimentKind::Dot:
      return run_dot_experiment(spec);
    case ExperimentKind::Rosenbrock:
      return run_rosenbrock(spec);
    case ExperimentKind::BoundsTable:
      return run_bounds_table(spec);
  }
  throw std::invalid_argument("unknown experiment kind");
}

BiasEstimate estimate_bias(double x, const SrConfig& cfg, std::int64_t trials, std::uint64_t seed) {
  if (trials < 2) {
    throw std::invalid_argument("estimate_bias needs at least two trials");
  }
  if (cfg.mode != RoundingMode::SR) {
    throw std::invalid_argument("estimate_bias needs a stochastic rounding mode");
  }
  if (is_representable(x, cfg.fmt)) {
    return {x, 0.0, 0.0};
  }
  const double lo = round_down(x, cfg.fmt);
  const double hi = round_up(x, cfg.fmt);
  RngStream stream = make_stream(seed, 0);
  std::int64_t ups = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    ups += sr_round(x, cfg, stream) == hi ? 1 : 0;
  }
  // Two-point samples: mean and variance follow from the up count alone.
  const double t = static_cast<double>(trials);
  const double f = static_cast<double>(ups) / t;
  const double gap = hi - lo;
  const double sample_var = gap * gap * f * (1.0 - f) * t / (t - 1.0);
  return {lo + gap * f, std::sqrt(sample_var / t), f};
}

double estimate_coverage(std::span<const double> errors, double bound) {
  if (errors.empty()) {
    throw std::invalid_argument("estimate_coverage of an empty sample");
  }
  const auto inside = std::count_if(errors.begin(), errors.end(), [&](double e) { return std::fabs(e) <= bound; });
  return static_cast<double>(inside) / static_cast<double>(errors.size());
}

std::string format_value(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_text(std::span<const ResultRow> rows) {
  std::string out = "n_or_k,mode,value,stderr\n";
  for (const auto& row : rows) {
    out += std::to_string(row.n_or_k) + "," + row.mode + "," + format_value(row.value) + "," +
           format_value(row.std_error) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_csv(const ExperimentResult& result, const ExperimentSpec& spec,
                                             const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> order;
  std::map<std::string, std::vector<ResultRow>> files;
  for (const auto& row : result.rows) {
    std::string name = kind_name(spec.kind) + (row.group.empty() ? "" : "-" + row.group) + "_p" +
                       std::to_string(spec.p) + "_" + file_tag(row.mode) + ".csv";
    auto [it, inserted] = files.try_emplace(name);
    if (inserted) {
      order.push_back(name);
    }
    it->second.push_back(row);
  }

  fs::create_directories(dir);
  std::vector<fs::path> staged;
  std::vector<fs::path> finished;
  try {
    for (const auto& name : order) {
      const fs::path tmp = dir / (name + ".tmp");
      staged.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << csv_text(files[name]);
      out.close();
      if (!out) {
        throw std::runtime_error("failed to write " + tmp.string());
      }
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      const fs::path target = dir / order[i];
      fs::rename(staged[i], target);
      finished.push_back(target);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : staged) {
      fs::remove(p, ec);
    }
    for (const auto& p : finished) {
      fs::remove(p, ec);
    }
    throw;
  }
  return finished;
}

}  // namespace srlab
