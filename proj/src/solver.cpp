#include "nsasym/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "nsasym/errors.hpp"

namespace nsasym {

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("solver dt must be positive");
  if (!(t0 > 0.0)) throw InvalidArgument("first snapshot time t0 must be positive");
  if (!(t_end > t0)) throw InvalidArgument("t_end must exceed t0");
  if (!(ratio > 1.0)) throw InvalidArgument("snapshot ratio must exceed 1");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("cfl safety factor must lie in (0, 1]");
  if (!(dt_growth >= 0.0)) throw InvalidArgument("dt_growth must be non-negative");
  if (!(blowup_factor > 1.0)) throw InvalidArgument("blowup_factor must exceed 1");
}

std::vector<double> snapshot_times(const SolverConfig& config) {
  config.validate();
  std::vector<double> times{0.0};
  for (int k = 0;; ++k) {
    const double t = config.t0 * std::pow(config.ratio, k);
    if (t >= config.t_end * (1.0 - 1e-12)) break;
    times.push_back(t);
  }
  times.push_back(config.t_end);
  return times;
}

// ---------------------------------------------------------------------------
// Biot-Savart and the nonlinearity

namespace {

using State = std::vector<SpectralField>;

SpectralField partial(const SpectralField& f, int axis) {
  return apply_multiplier(f, Multiplier::derivative(MultiIndex::unit(f.grid.dim(), axis)));
}

// omega^{ij} spectra (stored pairs) -> velocity spectra.
State velocity_spectra(const State& w_hat) {
  const Grid& g = w_hat.front().grid;
  const int dim = g.dim();
  State u(dim, SpectralField(g));
  for (int p = 0; p < pair_count(dim); ++p) {
    const auto [i, j] = pair_at(dim, p);
    // u^j -= d_i (-Delta)^{-1} omega^{ij};  u^i -= d_j (-Delta)^{-1} omega^{ji} = +d_j (...) omega^{ij}
    const SpectralField gi = apply_multiplier(w_hat[p], Multiplier::inverse_gradient(i));
    const SpectralField gj = apply_multiplier(w_hat[p], Multiplier::inverse_gradient(j));
    for (std::size_t m = 0; m < gi.values.size(); ++m) {
      u[j].values[m] -= gi.values[m];
      u[i].values[m] += gj.values[m];
    }
  }
  return u;
}

// (I^j) physical -> stored pairs of d_i I^j - d_j I^i, spectral.
State antisymmetric_derivative(const std::vector<Field>& flux_components, bool dealias) {
  const Grid& g = flux_components.front().grid;
  const int dim = g.dim();
  State f_hat;
  for (const auto& c : flux_components) {
    f_hat.push_back(forward_transform(c));
    if (dealias) dealias_in_place(f_hat.back());
  }
  State out;
  for (int p = 0; p < pair_count(dim); ++p) {
    const auto [i, j] = pair_at(dim, p);
    SpectralField a = partial(f_hat[j], i);
    const SpectralField b = partial(f_hat[i], j);
    for (std::size_t m = 0; m < a.values.size(); ++m) a.values[m] -= b.values[m];
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Field> flux_from(const std::vector<Field>& w, const std::vector<Field>& u) {
  const Grid& g = u.front().grid;
  const int dim = g.dim();
  std::vector<Field> out(dim, Field(g));
  for (int p = 0; p < pair_count(dim); ++p) {
    const auto [i, j] = pair_at(dim, p);
    const auto& wij = w[p].values;
    // I^j += omega^{ij} u^i,  I^i += omega^{ji} u^j = -omega^{ij} u^j
    for (std::size_t m = 0; m < wij.size(); ++m) {
      out[j].values[m] += wij[m] * u[i].values[m];
      out[i].values[m] -= wij[m] * u[j].values[m];
    }
  }
  return out;
}

} // namespace

VelocityField velocity_from_vorticity(const VorticityField& w) {
  State w_hat;
  for (const auto& c : w.components) w_hat.push_back(forward_transform(c));
  const State u_hat = velocity_spectra(w_hat);
  VelocityField u(w.grid, w.time);
  for (int j = 0; j < w.grid.dim(); ++j) u.components[j] = inverse_transform(u_hat[j]);
  return u;
}

Field divergence(const VelocityField& u) {
  SpectralField total(u.grid);
  for (int j = 0; j < u.grid.dim(); ++j) total += partial(forward_transform(u.components[j]), j);
  return inverse_transform(total);
}

VorticityField curl(const VelocityField& u) {
  std::vector<Field> comps = u.components;
  const State s = antisymmetric_derivative(comps, false);
  VorticityField w(u.grid, u.time);
  for (std::size_t p = 0; p < s.size(); ++p) w.components[p] = inverse_transform(s[p]);
  return w;
}

std::vector<Field> flux(const VorticityField& w, const VelocityField& u) {
  if (!(w.grid == u.grid)) throw InvalidArgument("vorticity and velocity live on different grids");
  return flux_from(w.components, u.components);
}

VorticityField nonlinear_term(const VorticityField& w, const VelocityField& u, bool dealias) {
  if (!(w.grid == u.grid)) throw InvalidArgument("vorticity and velocity live on different grids");
  std::vector<Field> wc = w.components, uc = u.components;
  if (dealias) {
    for (auto& c : wc) c = inverse_transform(nsasym::dealias(forward_transform(c)));
    for (auto& c : uc) c = inverse_transform(nsasym::dealias(forward_transform(c)));
  }
  const State s = antisymmetric_derivative(flux_from(wc, uc), dealias);
  VorticityField out(w.grid, w.time);
  for (std::size_t p = 0; p < s.size(); ++p) out.components[p] = inverse_transform(s[p]);
  return out;
}

// ---------------------------------------------------------------------------
// Lawson RK4

namespace {

struct StageInfo {
  double max_speed = 0.0;
  double max_state = 0.0;
};

// rhs(v, out) writes the nonlinear tendency of v into out and returns
// diagnostics of v in physical space.
using Rhs = std::function<StageInfo(const State&, State&)>;

std::vector<double> heat_factors(const Grid& g, double tau) {
  std::vector<double> e(g.spectral_size());
  for_each_mode(g, [&](std::size_t i, const Wavevector& w) { e[i] = std::exp(-tau * w.norm2()); });
  return e;
}

void scale_into(State& out, const State& v, const std::vector<double>& e) {
  out = v;
  for (auto& f : out)
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= e[i];
}

// out = e * (a + c * b)
void combine(State& out, const State& a, double c, const State& b, const std::vector<double>& e) {
  out = a;
  for (std::size_t p = 0; p < out.size(); ++p)
    for (std::size_t i = 0; i < e.size(); ++i)
      out[p].values[i] = e[i] * (a[p].values[i] + c * b[p].values[i]);
}

// One step of size h given k1 = N(v) already evaluated.
void lawson_step(State& v, const State& k1, double h, const Rhs& rhs, bool linear) {
  const Grid& g = v.front().grid;
  const auto e_half = heat_factors(g, 0.5 * h);
  const auto e_full = heat_factors(g, h);
  if (linear) {
    for (auto& f : v)
      for (std::size_t i = 0; i < e_full.size(); ++i) f.values[i] *= e_full[i];
    return;
  }
  State stage, k2, k3, k4, tmp;
  combine(stage, v, 0.5 * h, k1, e_half);
  k2 = stage;
  rhs(stage, k2);
  scale_into(tmp, v, e_half);
  for (std::size_t p = 0; p < v.size(); ++p)
    for (std::size_t i = 0; i < e_half.size(); ++i) stage[p].values[i] = tmp[p].values[i] + 0.5 * h * k2[p].values[i];
  k3 = stage;
  rhs(stage, k3);
  // stage = E_h v + h E_{h/2} k3
  for (std::size_t p = 0; p < v.size(); ++p)
    for (std::size_t i = 0; i < e_half.size(); ++i)
      stage[p].values[i] = e_full[i] * v[p].values[i] + h * e_half[i] * k3[p].values[i];
  k4 = stage;
  rhs(stage, k4);
  for (std::size_t p = 0; p < v.size(); ++p)
    for (std::size_t i = 0; i < e_full.size(); ++i)
      v[p].values[i] = e_full[i] * v[p].values[i] +
                       h / 6.0 *
                           (e_full[i] * k1[p].values[i] + 2.0 * e_half[i] * (k2[p].values[i] + k3[p].values[i]) +
                            k4[p].values[i]);
}

// Drives the stepping loop; emit(t, v) is called at every snapshot time.
void run(State v, const Grid& g, const SolverConfig& config, const Rhs& rhs,
         const std::function<void(double, const State&)>& emit) {
  const auto times = snapshot_times(config);
  const bool linear = !config.nonlinear;
  State k1 = v;
  StageInfo info = rhs(v, k1);
  const double initial_max = info.max_state;
  emit(0.0, v);
  double t = 0.0;
  const double h_grid = g.spacing();
  for (std::size_t s = 1; s < times.size(); ++s) {
    while (t < times[s]) {
      double h = std::max(config.dt, config.dt_growth * t);
      if (!linear && info.max_speed > 0.0) h = std::min(h, config.cfl * h_grid / info.max_speed);
      bool land = false;
      if (t + h >= times[s] * (1.0 - 1e-13)) {
        h = times[s] - t;
        land = true;
      } else if (t + 1.5 * h > times[s]) {
        // split the remaining interval evenly rather than leaving a sliver
        h = 0.5 * (times[s] - t);
      }
      lawson_step(v, k1, h, rhs, linear);
      t = land ? times[s] : t + h;
      info = rhs(v, k1);
      if (!std::isfinite(info.max_state) ||
          (initial_max > 0.0 && info.max_state > config.blowup_factor * initial_max))
        throw BlowUp("vorticity grew beyond " + std::to_string(config.blowup_factor) +
                     "x its initial maximum at t = " + std::to_string(t));
    }
    emit(times[s], v);
  }
}

double max_abs_values(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

Trajectory integrate(const VorticityField& w0, const SolverConfig& config) {
  config.validate();
  const Grid& g = w0.grid;
  const int dim = g.dim();
  const bool dealias_state = config.dealias && config.nonlinear;

  State v;
  for (const auto& c : w0.components) {
    v.push_back(forward_transform(c));
    if (dealias_state) dealias_in_place(v.back());
  }

  Rhs rhs = [&](const State& state, State& out) {
    StageInfo info;
    std::vector<Field> w;
    for (const auto& f : state) {
      w.push_back(inverse_transform(f));
      info.max_state = std::max(info.max_state, w.back().max_abs());
    }
    if (!config.nonlinear) {
      for (auto& f : out) std::fill(f.values.begin(), f.values.end(), Complex{});
      return info;
    }
    const State u_hat = velocity_spectra(state);
    std::vector<Field> u;
    for (const auto& f : u_hat) {
      u.push_back(inverse_transform(f));
      info.max_speed = std::max(info.max_speed, max_abs_values(u.back().values));
    }
    State nl = antisymmetric_derivative(flux_from(w, u), config.dealias);
    for (std::size_t p = 0; p < nl.size(); ++p) {
      if (config.dealias) dealias_in_place(nl[p]);
      for (std::size_t i = 0; i < nl[p].values.size(); ++i) out[p].values[i] = -nl[p].values[i];
    }
    return info;
  };

  Trajectory traj{g, config, {}};
  run(std::move(v), g, config, rhs, [&](double t, const State& state) {
    Snapshot snap{t, VorticityField(g, t), VelocityField(g, t)};
    for (std::size_t p = 0; p < state.size(); ++p) snap.omega.components[p] = inverse_transform(state[p]);
    const State u_hat = velocity_spectra(state);
    for (int j = 0; j < dim; ++j) snap.velocity.components[j] = inverse_transform(u_hat[j]);
    traj.snapshots.push_back(std::move(snap));
  });
  return traj;
}

BurgersTrajectory burgers_integrate(const Field& a, const SolverConfig& config) {
  config.validate();
  const Grid& g = a.grid;
  if (g.dim() != 1) throw InvalidArgument("Burgers integration needs a 1D grid");
  const double total = std::abs(a.sum());
  double scale = 0.0;
  for (double x : a.values) scale += std::abs(x);
  if (total > kMeanZeroTolerance * scale) throw IllPosed("Burgers initial data must have zero mean");

  const bool dealias_state = config.dealias && config.nonlinear;
  State v{forward_transform(a)};
  if (dealias_state) dealias_in_place(v[0]);
  const Multiplier dx = Multiplier::derivative(MultiIndex{1});

  Rhs rhs = [&](const State& state, State& out) {
    StageInfo info;
    Field u = inverse_transform(state[0]);
    info.max_state = u.max_abs();
    info.max_speed = info.max_state;
    if (!config.nonlinear) {
      std::fill(out[0].values.begin(), out[0].values.end(), Complex{});
      return info;
    }
    for (double& x : u.values) x = 0.5 * x * x;
    SpectralField f = apply_multiplier(forward_transform(u), dx);
    if (config.dealias) dealias_in_place(f);
    for (std::size_t i = 0; i < f.values.size(); ++i) out[0].values[i] = -f.values[i];
    return info;
  };

  BurgersTrajectory traj{g, config, {}};
  run(std::move(v), g, config, rhs, [&](double t, const State& state) {
    traj.snapshots.push_back({t, inverse_transform(state[0])});
  });
  return traj;
}

} // namespace nsasym
