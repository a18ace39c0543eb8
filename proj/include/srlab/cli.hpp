#pragma once

// Command-line front end. Subcommands: round, sum, dot, rosenbrock,
// bounds-table, suggest-r. Exit status: 0 on success, 2 on flag errors,
// 1 on range and runtime errors.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace srlab::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Inserts `--key=value` tokens from a `key = value` file (with `#` comments)
/// right after the subcommand, skipping keys already given on the command line.
std::vector<std::string> apply_config(std::vector<std::string> args, const std::filesystem::path& file);

/// {2, step, 2 step, ...} up to n_max, with n_max always included.
std::vector<std::int64_t> n_grid_from_max(std::int64_t n_max, std::int64_t step);

}  // namespace srlab::cli
