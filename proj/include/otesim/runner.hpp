// runner.hpp — Subcommand pipelines shared by the CLI binary and the tests.
//
// Exit-code contract: 0 success, 2 config error, 3 solver error, 4 failed
// validation, 5 scan/sample with < 90% successful cells.

#pragma once

#include <iosfwd>
#include <string>

#include "otesim/config.hpp"

namespace otesim::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_solver_error = 3;
inline constexpr int exit_validation_failed = 4;
inline constexpr int exit_too_many_cell_errors = 5;

// Full pipeline: rates -> Liouvillian -> steady state -> report -> task.
int run_steady(const RunConfig& config, std::ostream& diag);

// Invariant suite on one configuration; names the first failing check.
int run_validate(const RunConfig& config, std::ostream& diag);

// Phase-diagram scan to CSV (z, dT, label, theta_b, t_b).
int run_scan(const RunConfig& config, std::ostream& diag, int workers = 0);

// Random-machine study to histogram CSV (bin_lo, bin_hi, count) plus a
// summary JSON sidecar.
int run_sample(const RunConfig& config, std::ostream& diag, int workers = 0);

// RK4 time evolution; final state JSON plus optional trajectory CSV.
int run_evolve(const RunConfig& config, std::ostream& diag);

// %.17g formatting shared by all emitters so equal inputs give equal bytes.
std::string fmt_double(double v);

}  // namespace otesim::cli
