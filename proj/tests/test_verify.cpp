#include <cmath>
#include <random>

#include "doctest.h"
#include "nsasym/errors.hpp"
#include "nsasym/verify.hpp"

using namespace nsasym;

namespace {

DecaySeries synthetic(double mu, double b, double t_lo, double t_hi, int points, double noise = 0.0,
                      std::uint64_t seed = 0) {
  DecaySeries s;
  s.label = "synthetic";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise > 0.0 ? noise : 1.0);
  for (int i = 0; i < points; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (points - 1));
    double v = std::pow(t, -mu) * (1.0 + b * std::log(t));
    if (noise > 0.0) v *= std::exp(gauss(rng));
    s.t.push_back(t);
    s.value.push_back(v);
  }
  return s;
}

SolverConfig burgers_run(double t_end) {
  SolverConfig c;
  c.dt = 0.05;
  c.dt_growth = 0.01;
  c.t0 = 0.02;
  c.ratio = 1.2;
  c.t_end = t_end;
  return c;
}

// Cole-Hopf: u = -2 (log phi)_x with phi the heat flow of exp(-psi / 2),
// psi' = a. Expanding phi = 1 + m0 G + m1 d_x G + ... gives c1 = -2 m0 and
// c2 = -2 m1 with m0 = int (phi0 - 1), m1 = int (-y)(phi0 - 1).
std::pair<double, double> cole_hopf_coefficients(const InitialDataSpec& spec) {
  const GaussPoly psi = initial_potentials(spec, 1).front();
  const double lo = psi.center[0] - 40.0 * psi.sigma, hi = psi.center[0] + 40.0 * psi.sigma;
  const int n = 200000;
  const double h = (hi - lo) / n;
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * h;
    const double phi = std::expm1(-0.5 * psi({x, 0.0, 0.0}));
    m0 += phi * h;
    m1 -= x * phi * h;
  }
  return {-2.0 * m0, -2.0 * m1};
}

} // namespace

TEST_CASE("fit_decay on exact power laws and log-modulated series") {
  const auto pure = fit_decay(synthetic(1.5, 0.0, 10.0, 1000.0, 30));
  CHECK(std::abs(pure.mu - 1.5) < 0.01);
  CHECK_FALSE(pure.log_detected);
  CHECK(pure.points == 30);

  const auto logged = fit_decay(synthetic(1.5, 0.5, 10.0, 1000.0, 30));
  CHECK(logged.log_detected);
  CHECK(std::abs(logged.mu - 1.5) < 0.05);
  CHECK(logged.b > 0.0);

  const auto flat = fit_decay(synthetic(0.0, 0.0, 10.0, 1000.0, 12));
  CHECK(std::abs(flat.mu) < 1e-12);
  CHECK_FALSE(flat.log_detected);

  // window bounds are honored
  const auto windowed = fit_decay(synthetic(2.0, 0.0, 1.0, 1000.0, 40), 50.0, 500.0);
  CHECK(windowed.t_min >= 50.0);
  CHECK(windowed.t_max <= 500.0);
  CHECK(std::abs(windowed.mu - 2.0) < 1e-9);
}

TEST_CASE("fit_decay calibration over exponents and seeds") {
  int false_positives = 0, misses = 0;
  for (double mu = 0.5; mu <= 4.0 + 1e-12; mu += 0.25)
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      if (fit_decay(synthetic(mu, 0.0, 10.0, 1000.0, 25, 1e-3, seed), 0.0).log_detected) ++false_positives;
      for (double b : {0.3, 0.5, 1.0})
        if (!fit_decay(synthetic(mu, b, 10.0, 1000.0, 25, 1e-3, seed), 0.0).log_detected) ++misses;
      if (!fit_decay(synthetic(mu, -0.3, 1.0, 20.0, 25, 1e-3, seed), 0.0).log_detected) ++misses;
    }
  CHECK(false_positives == 0);
  CHECK(misses == 0);
}

TEST_CASE("fit_decay rejects short windows and non-positive values") {
  CHECK_THROWS_AS(fit_decay(synthetic(1.0, 0.0, 10.0, 100.0, 5)), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(synthetic(1.0, 0.0, 1.0, 100.0, 20), 50.0), InvalidArgument);
  auto bad = synthetic(1.0, 0.0, 10.0, 100.0, 10);
  bad.value[4] = 0.0;
  CHECK_THROWS_AS(fit_decay(bad), InvalidArgument);
  bad.value[4] = -1.0;
  CHECK_THROWS_AS(fit_decay(bad), InvalidArgument);
  bad.value.pop_back();
  CHECK_THROWS_AS(fit_decay(bad), InvalidArgument);
}

TEST_CASE("norm series of an exact profile have the scaling slopes") {
  // Omega_2 is a heat-kernel derivative of order 2:
  // ||Omega_2||_q ~ t^-(n/2 (1 - 1/q) + 1), || |x|^k Omega_2 ||_q gains t^{k/2}.
  Grid g(2, 256, 32.0);
  ExpansionData data;
  data.dim = 2;
  data.initial = moment_table(make_initial_vorticity({Recipe::perturbed_bump, 0.1, 3, 1.0}, g), 3);
  data.nonlinear.dim = 2;
  data.nonlinear.max_order = 2;
  for (const auto& beta : multi_indices_up_to(2, 2))
    for (int l = 0; 2 * l + beta.order() <= 2; ++l)
      data.nonlinear.entries[{l, beta}] = NonlinearMoment{l, beta, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}};
  Trajectory traj{g, {}, {}};
  for (double t : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0}) {
    auto w = profile_Omega(2, t, g, data);
    auto u = velocity_from_vorticity(w);
    traj.snapshots.push_back({t, std::move(w), std::move(u)});
  }
  const struct {
    double q;
    int k;
    double slope;
  } cases[] = {{1.0, 0, -1.0}, {2.0, 0, -1.5}, {INFINITY, 0, -2.0}, {1.0, 1, -0.5}, {2.0, 2, -0.5}};
  for (const auto& c : cases) {
    const auto fit = fit_decay(trajectory_series(traj, Quantity::vorticity, c.q, c.k), 0.0);
    MESSAGE("q=" << c.q << " k=" << c.k << " slope " << -fit.mu);
    CHECK(std::abs(-fit.mu - c.slope) < 0.02);
  }
}

TEST_CASE("residual series of zero data are identically zero") {
  Grid g(2, 64, 12.0);
  SolverConfig c;
  c.dt = 0.1;
  c.t0 = 0.1;
  c.ratio = 2.0;
  c.t_end = 4.0;
  const auto traj = integrate(VorticityField(g), c);
  const auto data = make_expansion_data(traj);
  const auto series = residual_series(traj, data, 2, {1.0, 2.0, INFINITY});
  CHECK(series.size() == 3);
  for (const auto& [q, s] : series) {
    CHECK(s.t.size() + 1 == traj.snapshots.size());
    CHECK(below_floor(s));
  }
  CHECK_THROWS_AS(residual_series(traj, data, 3, {1.0}), InvalidArgument);
}

TEST_CASE("odd/even report aggregates coefficients and certificates") {
  auto coefficient = [](double value) {
    KCoefficient c;
    c.m = 3;
    c.beta = MultiIndex{1, 0};
    c.value = {value, 0.0};
    c.normalizer = {1.0, 1.0};
    return c;
  };
  ParityCertificate good;
  good.beta = MultiIndex{1, 0};
  good.m1 = 2;
  good.m2 = 1;
  good.claimed_zero = false;
  good.tol = kParityTolerance;
  ParityCertificate bad = good;
  bad.claimed_zero = true;
  bad.residual = 1e-3;
  bad.pass = false;

  CHECK(odd_even_report(3, {{coefficient(1e-9)}}, {good}).pass());
  CHECK_FALSE(odd_even_report(3, {{coefficient(1e-3)}}, {good}).pass());
  CHECK(odd_even_report(2, {{coefficient(0.0)}, {coefficient(0.2)}}, {good}).pass());
  CHECK_FALSE(odd_even_report(2, {{coefficient(1e-4)}}, {good}).pass());
  const auto v = odd_even_report(2, {{coefficient(0.2)}}, {good, bad});
  CHECK_FALSE(v.pass());
  CHECK(v.rows.size() == 2);
  CHECK(v.rows[1].measured == 1e-3);
  CHECK_THROWS_AS(odd_even_report(4, {{coefficient(0.2)}}, {good}), InvalidArgument);
  CHECK_THROWS_AS(odd_even_report(2, {}, {good}), InvalidArgument);
  CHECK_THROWS_AS(odd_even_report(2, {{coefficient(0.2)}}, {}), InvalidArgument);
}

TEST_CASE("Burgers coefficients against the Cole-Hopf oracle and the log check") {
  const InitialDataSpec spec{Recipe::perturbed_bump, 0.3, 11, 1.0};
  const double t_end = 3000.0;
  Grid g(1, 8192, 12.0 * std::sqrt(1.0 + t_end));
  const auto traj = burgers_integrate(make_initial_burgers(spec, g), burgers_run(t_end));
  const auto [c1, c2] = cole_hopf_coefficients(spec);
  const auto check = burgers_log_check(traj);
  MESSAGE("c1 " << check.coefficients.c1 << " oracle " << c1 << ", c2 " << check.coefficients.c2 << " oracle " << c2);
  CHECK(std::abs(check.coefficients.c1 - c1) < 1e-5 * std::abs(c1));
  CHECK(std::abs(check.coefficients.c2 - c2) < 1e-4 * std::abs(c2));
  CHECK_FALSE(check.coefficients.flagged);
  MESSAGE("residual exponent " << check.fit.mu << ", control b " << check.control.b);
  CHECK(std::abs(check.fit.mu - 2.0) < 0.05);
  CHECK_FALSE(check.fit.log_detected);
  CHECK(check.control.log_detected);
  CHECK(check.pass());
  CHECK_FALSE(check.trivial);
}

TEST_CASE("Burgers zero data and profile arguments") {
  Grid g(1, 256, 40.0);
  const auto traj = burgers_integrate(Field(g), burgers_run(200.0));
  const auto check = burgers_log_check(traj);
  CHECK(check.trivial);
  CHECK(check.pass());
  CHECK(check.coefficients.c1 == 0.0);
  CHECK(check.coefficients.c2 == 0.0);
  CHECK_THROWS_AS(burgers_profile(check.coefficients, 3, 1.0, g), InvalidArgument);
  CHECK_THROWS_AS(burgers_profile(check.coefficients, 1, 1.0, Grid(2, 16, 4.0)), InvalidArgument);
}
