#pragma once

// Monte Carlo harness for the summation, inner-product and Rosenbrock
// experiments, plus the bound tables.
//
// Every trial owns one RngStream (seed, trial index). Inside a trial, lane 0
// draws the inputs and lane m + 1 feeds the roundings of mode m, so all modes
// see the same inputs. Trials may run on several threads; aggregation always
// happens in trial order, so results do not depend on the thread count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srlab/rng.hpp"
#include "srlab/sr_engine.hpp"

namespace srlab {

enum class ExperimentKind { Sum, Dot, Rosenbrock, BoundsTable };

std::string kind_name(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Sum;
  int p = 11;
  std::vector<std::optional<int>> r_list;  // nullopt: IDEAL
  bool include_rn = true;                  // RN at precision p (and the binary64 baseline for rosenbrock)
  std::vector<std::int64_t> n_grid;
  int iters = 5000;
  int trials = 500;
  std::uint64_t seed = 1;
  double lambda = 0.1;
  std::vector<double> input_a;  // custom inputs; empty means uniform(0, 1)
  std::vector<double> input_b;
  std::vector<Eigen::Vector2d> starts;
  double step = 0.001;
  int threads = 1;

  /// Throws std::invalid_argument when the spec is inconsistent.
  void validate() const;
  /// The rounding modes compared, in output order.
  std::vector<SrConfig> modes() const;
};

/// One aggregated record: a CSV line.
struct ResultRow {
  std::string group;  // empty unless several Rosenbrock starts share one run
  std::int64_t n_or_k = 0;
  std::string mode;
  double value = 0.0;
  double std_error = 0.0;

  bool operator==(const ResultRow&) const = default;
};

/// One per-trial observation.
struct TrialResult {
  std::int64_t n_or_k = 0;
  std::string mode;
  double value = 0.0;  // relative error, or final loss for rosenbrock
  std::int64_t trial = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<TrialResult> trials;
  bool diverged = false;
};

ExperimentResult run_sum_experiment(const ExperimentSpec& spec);
ExperimentResult run_dot_experiment(const ExperimentSpec& spec);
ExperimentResult run_rosenbrock(const ExperimentSpec& spec);
ExperimentResult run_bounds_table(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct BiasEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double up_fraction = 0.0;
};

/// Sample mean and standard error of `trials` independent SR roundings of x.
BiasEstimate estimate_bias(double x, const SrConfig& cfg, std::int64_t trials, std::uint64_t seed);

/// Fraction of |errors[i]| <= bound. Throws on an empty input.
double estimate_coverage(std::span<const double> errors, double bound);

RngStream derive_trial_stream(std::uint64_t seed, std::uint64_t trial_index);

/// Draws n values uniformly from [0, 1) and rounds them to nearest at precision p.
Eigen::VectorXd draw_uniform_inputs(RngStream& stream, std::int64_t n, int p);

/// "ah_r7", "SRideal"-style labels use this tag for r; "ideal" for nullopt.
std::string r_tag(const std::optional<int>& r);

/// 17 significant digits, "inf"/"nan" for non-finite values.
std::string format_value(double v);

/// Writes one CSV per (group, mode) into `dir`, atomically: files are staged
/// under temporary names and renamed once all of them are complete. Returns
/// the final paths.
std::vector<std::filesystem::path> write_csv(const ExperimentResult& result, const ExperimentSpec& spec,
                                             const std::filesystem::path& dir);

/// CSV body for one set of rows (header included).
std::string csv_text(std::span<const ResultRow> rows);

}  // namespace srlab
