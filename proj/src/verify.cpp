#include "nsasym/verify.hpp"

#include <algorithm>
#include <cmath>

#include "nsasym/errors.hpp"

namespace nsasym {

namespace {

constexpr std::size_t kMinFitPoints = 6;

// Residual of the nested model v = t^-mu (A + C log t) at fixed mu, from a
// least-squares fit weighted so that it approximates the log-space misfit.
struct LogModel {
  double residual = std::numeric_limits<double>::infinity();
  double A = 0.0;
  double C = 0.0;
};

LogModel log_model(const std::vector<double>& x, const std::vector<double>& y, double mu) {
  double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = std::exp(y[i] + mu * x[i]);
    const double wt = 1.0 / (w * w);
    s00 += wt;
    s01 += wt * x[i];
    s11 += wt * x[i] * x[i];
    r0 += wt * w;
    r1 += wt * w * x[i];
  }
  LogModel m;
  const double det = s00 * s11 - s01 * s01;
  if (!(std::abs(det) > 0.0)) return m;
  m.A = (r0 * s11 - r1 * s01) / det;
  m.C = (s00 * r1 - s01 * r0) / det;
  double res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double model = m.A + m.C * x[i];
    if (!(model > 0.0)) return LogModel{};
    const double d = y[i] + mu * x[i] - std::log(model);
    res += d * d;
  }
  m.residual = res;
  return m;
}

} // namespace

DecayFit fit_decay(const DecaySeries& series, double t_min, double t_max) {
  if (series.t.size() != series.value.size()) throw InvalidArgument("series times and values differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    if (series.t[i] < t_min || series.t[i] > t_max) continue;
    const double v = series.value[i];
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("decay series '" + series.label + "' has a non-positive value at t = " +
                            std::to_string(series.t[i]));
    if (!(series.t[i] > 0.0)) throw InvalidArgument("decay series times must be positive");
    x.push_back(std::log(series.t[i]));
    y.push_back(std::log(v));
  }
  if (x.size() < kMinFitPoints)
    throw InvalidArgument("decay fit of '" + series.label + "' needs at least 6 samples in the window, got " +
                          std::to_string(x.size()));

  DecayFit fit;
  fit.points = x.size();
  fit.t_min = std::exp(*std::min_element(x.begin(), x.end()));
  fit.t_max = std::exp(*std::max_element(x.begin(), x.end()));

  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  fit.mu_power = -slope;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - intercept - slope * x[i];
    fit.residual_power += d * d;
  }

  // coarse scan around the power-law exponent, then golden section
  double best_mu = fit.mu_power, best = log_model(x, y, best_mu).residual;
  for (double mu = fit.mu_power - 2.0; mu <= fit.mu_power + 2.0; mu += 0.01) {
    const double r = log_model(x, y, mu).residual;
    if (r < best) {
      best = r;
      best_mu = mu;
    }
  }
  double lo = best_mu - 0.01, hi = best_mu + 0.01;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
  double f1 = log_model(x, y, m1).residual, f2 = log_model(x, y, m2).residual;
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - g * (hi - lo);
      f1 = log_model(x, y, m1).residual;
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + g * (hi - lo);
      f2 = log_model(x, y, m2).residual;
    }
  }
  const double refined = 0.5 * (lo + hi);
  if (log_model(x, y, refined).residual < best) best_mu = refined;
  const LogModel lm = log_model(x, y, best_mu);
  fit.mu_log = best_mu;
  fit.residual_log = std::min(lm.residual, fit.residual_power);
  fit.b_log = lm.A != 0.0 ? lm.C / lm.A : 0.0;

  const bool improves = fit.residual_log < 0.8 * fit.residual_power;
  const bool visible = std::abs(fit.b_log) * std::log(fit.t_max) > 0.2;
  fit.log_detected = improves && visible && std::isfinite(lm.residual);
  if (fit.log_detected) {
    fit.mu = fit.mu_log;
    fit.b = fit.b_log;
    fit.a = lm.A;
  } else {
    fit.mu = fit.mu_power;
    fit.a = std::exp(intercept);
  }
  return fit;
}

DecaySeries trajectory_series(const Trajectory& traj, Quantity quantity, double q, int k) {
  DecaySeries s;
  s.label = std::string(quantity == Quantity::velocity ? "u" : "omega") + " q=" + std::to_string(q) +
            " k=" + std::to_string(k);
  for (const auto& snap : traj.snapshots) {
    if (!(snap.t > 0.0)) continue;
    const auto& comps = quantity == Quantity::velocity ? snap.velocity.components : snap.omega.components;
    s.t.push_back(snap.t);
    s.value.push_back(k == 0 ? lp_norm(comps, q) : weighted_norm(comps, k, q));
  }
  return s;
}

std::map<double, DecaySeries> residual_series(const Trajectory& traj, const ExpansionData& data, int order,
                                              const std::vector<double>& q_list) {
  if (data.dim != traj.grid.dim()) throw InvalidArgument("expansion data dimension does not match the trajectory");
  if (order < 0 || order > data.dim) throw InvalidArgument("profile order must be between 0 and n");
  std::map<double, DecaySeries> out;
  for (double q : q_list) out[q].label = "u - sum U_m, M=" + std::to_string(order) + " q=" + std::to_string(q);
  for (const auto& snap : traj.snapshots) {
    if (!(snap.t > 0.0)) continue;
    if (!(snap.velocity.grid == traj.grid)) throw InvalidArgument("snapshot grid does not match the trajectory");
    std::vector<Field> r = snap.velocity.components;
    for (int m = 1; m <= order; ++m) {
      const auto U = profile_U(m, snap.t, traj.grid, data);
      for (int j = 0; j < data.dim; ++j) r[j] -= U.components[j];
    }
    for (double q : q_list) {
      out[q].t.push_back(snap.t);
      out[q].value.push_back(lp_norm(r, q));
    }
  }
  return out;
}

bool below_floor(const DecaySeries& series) {
  return std::all_of(series.value.begin(), series.value.end(), [](double v) { return v == 0.0; });
}

bool Verdict::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const VerdictRow& r) { return r.pass; });
}

Verdict odd_even_report(int dim, const std::vector<std::vector<KCoefficient>>& coefficients,
                        const std::vector<ParityCertificate>& certificates, double vanishing_tol,
                        double significance) {
  if (dim != 2 && dim != 3) throw InvalidArgument("the odd/even report covers n = 2 and n = 3");
  if (coefficients.empty()) throw InvalidArgument("no K coefficients supplied");
  if (certificates.empty()) throw InvalidArgument("no parity certificates supplied");
  double largest = 0.0;
  for (const auto& per_m : coefficients)
    for (const auto& c : per_m) largest = std::max(largest, c.normalized());
  Verdict v;
  if (dim % 2 == 1) {
    v.rows.push_back({"n=3: every K coefficient vanishes", "K_m vanishes by parity in odd dimensions", largest,
                      "< tol", vanishing_tol, largest < vanishing_tol});
  } else {
    v.rows.push_back({"n=2: some K coefficient is significant", "K_m survives for generic data in even dimensions",
                      largest, "> tol", significance, largest > significance});
  }
  double worst = 0.0;
  bool all = true;
  for (const auto& c : certificates) {
    if (c.claimed_zero) worst = std::max(worst, c.residual);
    all = all && c.pass;
  }
  v.rows.push_back({"n=" + std::to_string(dim) + ": parity certificates with |beta|+m1+m2 odd vanish",
                    "moments of Omega_m1 . U_m2 vanish when |beta|+m1+m2 is odd", worst, "< tol",
                    certificates.front().tol, all});
  return v;
}

BurgersCoefficients burgers_coefficients(const BurgersTrajectory& traj, double tail_tol) {
  if (traj.grid.dim() != 1) throw InvalidArgument("Burgers trajectory must be one-dimensional");
  if (traj.snapshots.size() < 3) throw InvalidArgument("Burgers trajectory needs at least three snapshots");
  const std::size_t ns = traj.snapshots.size();
  std::vector<double> times(ns), n0(ns), n1(ns), n1_abs(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const Field& u = traj.snapshots[s].u;
    require_decay_at_boundary(std::span<const Field>(&u, 1));
    Field half_sq = u;
    for (double& v : half_sq.values) v = 0.5 * v * v;
    times[s] = traj.snapshots[s].t;
    n0[s] = half_sq.sum() * traj.grid.cell_volume();
    n1[s] = raw_moment(half_sq, MultiIndex{1});
    n1_abs[s] = abs_moment(half_sq, MultiIndex{1});
  }
  const Field& a = traj.snapshots.front().u;
  const TimeIntegral i0 = integrate_in_time(times, n0, n0, tail_tol);
  const TimeIntegral i1 = integrate_in_time(times, n1, n1_abs, tail_tol);
  BurgersCoefficients c;
  c.c1 = raw_moment(a, MultiIndex{1}) - i0.value;
  c.c2 = 0.5 * raw_moment(a, MultiIndex{2}) - i1.value;
  c.flagged = i0.flagged || i1.flagged;
  return c;
}

Field burgers_profile(const BurgersCoefficients& c, int order, double t, const Grid& grid) {
  if (grid.dim() != 1) throw InvalidArgument("Burgers profiles are one-dimensional");
  if (order < 1 || order > 2) throw InvalidArgument("Burgers profile order must be 1 or 2");
  Field dG = heat_kernel_derivative(0, MultiIndex{1}, t, grid);
  Field out = c.c1 * dG;
  if (order == 2) {
    out += c.c2 * heat_kernel_derivative(0, MultiIndex{2}, t, grid);
    const Field G = heat_kernel(t, grid);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += 0.5 * c.c1 * c.c1 * G.values[i] * dG.values[i];
  }
  return out;
}

bool BurgersLogCheck::pass() const { return trivial || (!fit.log_detected && control.log_detected); }

BurgersLogCheck burgers_log_check(const BurgersTrajectory& traj, double t_min, double control_b) {
  BurgersLogCheck check;
  check.control_b = control_b;
  check.coefficients = burgers_coefficients(traj);
  check.residual.label = "Burgers u - U_1 - U_2, q=inf";
  for (const auto& snap : traj.snapshots) {
    if (!(snap.t > 0.0)) continue;
    const Field r = snap.u - burgers_profile(check.coefficients, 2, snap.t, traj.grid);
    check.residual.t.push_back(snap.t);
    check.residual.value.push_back(r.max_abs());
  }
  if (below_floor(check.residual)) {
    check.trivial = true;
    return check;
  }
  check.fit = fit_decay(check.residual, t_min);
  DecaySeries injected = check.residual;
  injected.label += " with injected log";
  for (std::size_t i = 0; i < injected.t.size(); ++i) injected.value[i] *= 1.0 + control_b * std::log(injected.t[i]);
  check.control = fit_decay(injected, t_min);
  return check;
}

} // namespace nsasym
