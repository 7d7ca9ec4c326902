#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nsasym/expansion.hpp"
#include "nsasym/fields.hpp"
#include "nsasym/solver.hpp"

namespace nsasym {

struct GridSection {
  int dim = 2;
  int N = 128;
  /// Box half-length; 0 picks default_half_length(t_end).
  double L = 0.0;
};

struct IcSection {
  Recipe recipe = Recipe::perturbed_bump;
  double amplitude = 0.1;
  std::uint64_t seed = 1;
  double width = 1.0;
};

struct ExpansionSection {
  /// Highest order 2l + |beta| of the nonlinear moments; -1 means n.
  int max_order = -1;
  /// Time at which `profiles` evaluates U_m and Omega_m.
  double t_eval = 1.0;
  double tail_tol = kTailTolerance;
  /// Grid for profiles, K coefficients and certificates; 0 reuses [grid].
  int profile_N = 0;
  double profile_L = 0.0;
  double parity_tol = kParityTolerance;
  double k_vanishing = 1e-6;
  double k_significance = 1e-2;
  /// J_m orders evaluated by `profiles` (n = 2 only); empty skips J.
  std::vector<int> j_orders;
  int j_N = 0;
  double j_L = 0.0;
  JQuadrature j_rule;
  /// Odd integer lambda of the same-grid scaling check of J_m; 0 skips it.
  int j_scaling_lambda = 3;
  double j_scaling_tol = 0.02;
};

struct VerifySection {
  std::vector<double> q_list{1.0, 2.0, std::numeric_limits<double>::infinity()};
  double window_start = 10.0;
  double window_end = std::numeric_limits<double>::infinity();
  /// Tolerance of the decay-rate rows.
  double slope_tol = 0.1;
  /// Slack of the M = n residual slope and the gap to M = n - 1.
  double residual_slack = 0.15;
  double residual_gap = 0.35;
  double burgers_window_start = 100.0;
  double control_b = 0.5;
};

struct RunConfig {
  GridSection grid;
  SolverConfig solver;
  IcSection ic;
  ExpansionSection expansion;
  VerifySection verify;

  /// Effective half-lengths and orders after defaults are resolved.
  Grid make_grid() const;
  Grid make_profile_grid() const;
  Grid make_j_grid() const;
  int max_order() const;
  InitialDataSpec initial_data() const;

  /// Throws ConfigError on cross-field inconsistencies.
  void validate() const;
};

/// Parses the sectioned key = value format; '#' and ';' start comments.
/// Errors carry the 1-based line of the offending entry.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies "section.key=value"; errors name the override.
void apply_override(RunConfig& config, const std::string& assignment);

/// Canonical text form; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& config);

} // namespace nsasym
