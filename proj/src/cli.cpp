#include "srlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "srlab/bounds.hpp"
#include "srlab/dyadic.hpp"
#include "srlab/experiments.hpp"
#include "srlab/fp_core.hpp"
#include "srlab/sr_engine.hpp"

namespace srlab::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    out.push_back(trim(item));
  }
  return out;
}

std::int64_t parse_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw std::invalid_argument(std::string("invalid ") + what + ": '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::invalid_argument(std::string("invalid ") + what + ": '" + s + "'");
  }
  return v;
}

std::optional<int> parse_r(const std::string& s) {
  if (s == "ideal" || s == "IDEAL") {
    return std::nullopt;
  }
  return static_cast<int>(parse_int(s, "r"));
}

std::vector<std::optional<int>> parse_r_list(const std::string& s) {
  std::vector<std::optional<int>> out;
  for (const auto& item : split(s, ',')) {
    out.push_back(parse_r(item));
  }
  if (out.empty()) {
    throw std::invalid_argument("empty r list");
  }
  return out;
}

std::vector<std::int64_t> parse_n_list(const std::string& s) {
  std::vector<std::int64_t> out;
  for (const auto& item : split(s, ',')) {
    out.push_back(parse_int(item, "n"));
  }
  return out;
}

Eigen::Vector2d parse_start(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) {
    throw std::invalid_argument("a start point needs the form x,y: '" + s + "'");
  }
  return {parse_double(parts[0], "start"), parse_double(parts[1], "start")};
}

// One or two numeric columns, separated by commas or whitespace.
void read_columns(const std::string& path, std::vector<double>& a, std::vector<double>* b) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) {
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      values.push_back(parse_double(field, "input value"));
    }
    const std::size_t want = b == nullptr ? 1 : 2;
    if (values.size() != want) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(want) +
                                  " column(s)");
    }
    a.push_back(values[0]);
    if (b != nullptr) {
      b->push_back(values[1]);
    }
  }
}

struct Options {
  std::string config;
  int p = 11;
  std::string r = "3,6,7,8,10";
  double value = 0.0;
  std::int64_t samples = 10000;
  std::uint64_t seed = 1;
  std::string n_list;
  std::int64_t n_max = 0;
  std::int64_t n_step = 100;
  int trials = 500;
  int iters = 5000;
  double t = 0.001;
  std::vector<std::string> starts;
  double lambda = 0.1;
  std::string input;
  std::string out_dir = "results";
  int threads = 1;
  bool no_rn = false;
  std::int64_t n = 0;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key = value file; command-line flags take precedence");
  cmd->add_option("--p", o.p, "target precision p (significand bits, 2..53)")->capture_default_str();
}

void add_experiment(CLI::App* cmd, Options& o, bool stochastic) {
  add_common(cmd, o);
  if (stochastic) {
    cmd->add_option("--r", o.r, "comma-separated random-bit counts, 'ideal' for unlimited")->capture_default_str();
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per point")->capture_default_str();
    cmd->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker threads (output does not depend on it)")->capture_default_str();
    cmd->add_flag("--no-rn", o.no_rn, "omit the round-to-nearest baseline");
  }
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
}

void add_grid(CLI::App* cmd, Options& o) {
  cmd->add_option("--n", o.n_list, "comma-separated vector lengths");
  cmd->add_option("--n-max", o.n_max, "largest length of the grid {2, step, 2 step, ..., n-max}");
  cmd->add_option("--n-step", o.n_step, "grid spacing used with --n-max")->capture_default_str();
}

std::vector<std::int64_t> grid_from(const Options& o) {
  if (!o.n_list.empty() && o.n_max != 0) {
    throw std::invalid_argument("--n and --n-max are mutually exclusive");
  }
  if (!o.n_list.empty()) {
    return parse_n_list(o.n_list);
  }
  if (o.n_max == 0) {
    throw std::invalid_argument("one of --n or --n-max is required");
  }
  return n_grid_from_max(o.n_max, o.n_step);
}

int cmd_round(const Options& o, std::ostream& out) {
  const std::optional<int> r = parse_r(o.r);
  const SrConfig cfg = r ? SrConfig::stochastic(o.p, *r) : SrConfig::ideal(o.p);
  if (o.samples < 0) {
    throw std::invalid_argument("--samples must be non-negative");
  }
  const double x = o.value;
  if (!std::isfinite(x)) {
    throw std::invalid_argument("--value must be finite");
  }
  const FpFormat fmt = cfg.fmt;
  out << "x          = " << format_value(x) << "\n";
  out << "mode       = SR_{" << o.p << "," << r_tag(r) << "}\n";
  if (x == 0.0) {
    out << "x is zero: deterministic, q_r = 0\n";
    return 0;
  }
  const double lo = round_down(x, fmt);
  const double hi = round_up(x, fmt);
  const DyadicFraction q = dy_q(dy_from_float(x), o.p, r);
  out << "floor_p    = " << format_value(lo) << "\n";
  out << "ceil_p     = " << format_value(hi) << "\n";
  out << "ulp_p      = " << format_value(ulp(x, fmt)) << "\n";
  out << "fl_{p+r}   = " << format_value(truncate(x, cfg.truncation_width())) << "\n";
  out << "q_r        = " << q.str() << "\n";
  if (lo == hi) {
    out << "deterministic: x is representable at precision " << o.p << "\n";
    return 0;
  }
  if (o.samples > 0) {
    RngStream stream = make_stream(o.seed, 0);
    std::int64_t ups = 0;
    for (std::int64_t i = 0; i < o.samples; ++i) {
      ups += sr_round(x, cfg, stream) == hi ? 1 : 0;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(ups) / static_cast<double>(o.samples));
    out << "up_freq    = " << buf << " (" << ups << "/" << o.samples << ", seed " << o.seed << ")\n";
  }
  return 0;
}

ExperimentSpec base_spec(const Options& o, ExperimentKind kind) {
  ExperimentSpec spec;
  spec.kind = kind;
  spec.p = o.p;
  spec.r_list = parse_r_list(o.r);
  spec.include_rn = !o.no_rn;
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.threads = o.threads;
  spec.lambda = o.lambda;
  return spec;
}

int run_and_write(const ExperimentSpec& spec, const Options& o, std::ostream& out) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(spec);
  const auto files = write_csv(result, spec, o.out_dir);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", seconds);
  out << "wrote " << files.size() << " file(s) to " << o.out_dir << " in " << buf << " s\n";
  if (result.diverged) {
    out << "note: some trajectories diverged; their losses are recorded as inf\n";
  }
  return 0;
}

}  // namespace

std::vector<std::int64_t> n_grid_from_max(std::int64_t n_max, std::int64_t step) {
  if (n_max < 2) {
    throw std::invalid_argument("--n-max must be at least 2");
  }
  if (step < 1) {
    throw std::invalid_argument("--n-step must be positive");
  }
  std::vector<std::int64_t> grid{2};
  for (std::int64_t n = step; n <= n_max; n += step) {
    if (n > grid.back()) {
      grid.push_back(n);
    }
  }
  if (grid.back() != n_max) {
    grid.push_back(n_max);
  }
  return grid;
}

std::vector<std::string> apply_config(std::vector<std::string> args, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::invalid_argument("cannot read config file " + file.string());
  }
  const auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(file.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw std::invalid_argument(file.string() + ":" + std::to_string(line_no) + ": invalid key");
    }
    if (!given(key)) {
      injected.push_back("--" + key + "=" + value);
    }
  }
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
  const auto at = sub == args.end() ? args.begin() : sub + 1;
  args.insert(at, injected.begin(), injected.end());
  return args;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);

  CLI::App app{"Limited-precision stochastic rounding experiments", "srlab"};
  app.require_subcommand(1);
  Options o;

  auto* round = app.add_subcommand("round", "round one value with SR_{p,r} and report q_r");
  add_common(round, o);
  round->add_option("--value", o.value, "value to round")->required();
  round->add_option("--r", o.r, "random bits, or 'ideal'")->required();
  round->add_option("--samples", o.samples, "number of sampled roundings")->capture_default_str();
  round->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();

  auto* sum = app.add_subcommand("sum", "relative error of recursive summation");
  add_experiment(sum, o, true);
  add_grid(sum, o);
  sum->add_option("--input", o.input, "file with one value per line instead of uniform(0,1) draws")
      ->check(CLI::ExistingFile);

  auto* dot = app.add_subcommand("dot", "relative error of inner products");
  add_experiment(dot, o, true);
  add_grid(dot, o);
  dot->add_option("--input", o.input, "file with two columns a,b instead of uniform(0,1) draws")
      ->check(CLI::ExistingFile);

  auto* rosen = app.add_subcommand("rosenbrock", "gradient descent on the Rosenbrock function");
  add_experiment(rosen, o, true);
  rosen->add_option("--iters", o.iters, "iterations")->capture_default_str();
  rosen->add_option("--t", o.t, "step size")->capture_default_str();
  rosen->add_option("--start", o.starts, "start point x,y; repeat for several (default 0,0 and 0.5,0.5)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* table = app.add_subcommand("bounds-table", "deterministic and probabilistic bounds for summation");
  add_experiment(table, o, false);
  add_grid(table, o);
  table->add_option("--r", o.r, "comma-separated random-bit counts, 'ideal' for unlimited")->capture_default_str();
  table->add_option("--lambda", o.lambda, "failure probability of the probabilistic bounds")->capture_default_str();

  auto* suggest = app.add_subcommand("suggest-r", "smallest r suggested for n roundings");
  suggest->add_option("--n", o.n, "number of roundings (>= 2)")->required();

  for (auto* cmd : app.get_subcommands({})) {
    for (auto* opt : cmd->get_options()) {
      if (opt->get_name() != "--start") {
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    }
  }

  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        args = apply_config(args, args[i + 1]);
        break;
      }
      if (args[i].rfind("--config=", 0) == 0) {
        args = apply_config(args, args[i].substr(9));
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (round->parsed()) {
      return cmd_round(o, out);
    }
    if (suggest->parsed()) {
      if (o.n < 2) {
        throw std::invalid_argument("--n must be at least 2");
      }
      out << rule_of_thumb_r(o.n) << "\n";
      return 0;
    }
    if (sum->parsed() || dot->parsed()) {
      const bool is_dot = dot->parsed();
      ExperimentSpec spec = base_spec(o, is_dot ? ExperimentKind::Dot : ExperimentKind::Sum);
      spec.n_grid = grid_from(o);
      if (!o.input.empty()) {
        read_columns(o.input, spec.input_a, is_dot ? &spec.input_b : nullptr);
      }
      return run_and_write(spec, o, out);
    }
    if (rosen->parsed()) {
      ExperimentSpec spec = base_spec(o, ExperimentKind::Rosenbrock);
      spec.iters = o.iters;
      spec.step = o.t;
      for (const auto& s : o.starts) {
        spec.starts.push_back(parse_start(s));
      }
      return run_and_write(spec, o, out);
    }
    ExperimentSpec spec = base_spec(o, ExperimentKind::BoundsTable);
    spec.n_grid = grid_from(o);
    return run_and_write(spec, o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace srlab::cli
