#pragma once

#include <vector>

#include "nsasym/fields.hpp"
#include "nsasym/grid.hpp"

namespace nsasym {

struct SolverConfig {
  /// Base time step.
  double dt = 0.05;
  double t_end = 100.0;
  /// First geometric snapshot time t0 and ratio r: snapshots at 0, t0 r^k, t_end.
  double t0 = 0.05;
  double ratio = 1.2;
  /// Velocity CFL safety factor in (0, 1].
  double cfl = 0.5;
  /// Step may grow to dt_growth * t once the flow has decayed (0 disables).
  double dt_growth = 0.0;
  bool dealias = true;
  /// false integrates the heat equation only.
  bool nonlinear = true;
  /// Abort once ||omega||_inf exceeds this multiple of its initial value.
  double blowup_factor = 10.0;

  void validate() const;
};

/// 0, t0 r^k for t0 r^k < t_end, and t_end.
std::vector<double> snapshot_times(const SolverConfig& config);

struct Snapshot {
  double t = 0.0;
  VorticityField omega;
  VelocityField velocity;
};

struct Trajectory {
  Grid grid;
  SolverConfig config;
  std::vector<Snapshot> snapshots;
};

/// u^j = -sum_i d_i (-Delta)^{-1} omega^{ij}.
VelocityField velocity_from_vorticity(const VorticityField& w);

/// Spectral divergence sum_j d_j u^j.
Field divergence(const VelocityField& u);

/// Spectral curl d_i u^j - d_j u^i.
VorticityField curl(const VelocityField& u);

/// I^j = sum_i omega^{ij} u^i.
std::vector<Field> flux(const VorticityField& w, const VelocityField& u);

/// d_i I^j - d_j I^i, so that d_t omega = Delta omega - nonlinear_term.
/// Inputs are dealiased before the product when dealias is set.
VorticityField nonlinear_term(const VorticityField& w, const VelocityField& u, bool dealias = true);

/// Integrating-factor RK4 for the vorticity equation: the heat propagator
/// is applied exactly, the nonlinearity explicitly.
Trajectory integrate(const VorticityField& w0, const SolverConfig& config);

struct BurgersSnapshot {
  double t = 0.0;
  Field u;
};

struct BurgersTrajectory {
  Grid grid;
  SolverConfig config;
  std::vector<BurgersSnapshot> snapshots;
};

/// Same scheme for u_t + u u_x = u_xx on a 1D grid.
BurgersTrajectory burgers_integrate(const Field& a, const SolverConfig& config);

} // namespace nsasym
