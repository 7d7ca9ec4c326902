#include <cmath>
#include <random>

#include "doctest.h"
#include "nsasym/errors.hpp"
#include "nsasym/expansion.hpp"

using namespace nsasym;

namespace {

// Moment tables from seeded initial data plus seeded nonlinear moments; the
// profiles' structural properties hold for any coefficient values.
ExpansionData synthetic_data(int dim, std::uint64_t seed, double nonlinear_scale = 0.02) {
  Grid g(dim, dim == 2 ? 128 : 64, 12.0);
  ExpansionData d;
  d.dim = dim;
  d.initial = moment_table(make_initial_vorticity({Recipe::perturbed_bump, 0.1, seed, 1.0}, g), dim + 1);
  d.nonlinear.dim = dim;
  d.nonlinear.max_order = dim;
  std::mt19937_64 rng(seed);
  for (const auto& beta : multi_indices_up_to(dim, dim))
    for (int l = 0; 2 * l + beta.order() <= dim; ++l) {
      NonlinearMoment e;
      e.l = l;
      e.beta = beta;
      for (int j = 0; j < dim; ++j) {
        e.value.push_back(nonlinear_scale * (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5));
        e.tail.push_back(0.0);
        e.tail_power.push_back(0.0);
        e.scale.push_back(1.0);
      }
      d.nonlinear.entries.emplace(std::make_pair(l, beta), e);
    }
  return d;
}

double sup(const std::vector<Field>& f) {
  double m = 0.0;
  for (const auto& c : f) m = std::max(m, c.max_abs());
  return m;
}

SolverConfig short_run(double dt, double ratio, double t_end) {
  SolverConfig c;
  c.dt = dt;
  c.t0 = 0.1;
  c.ratio = ratio;
  c.t_end = t_end;
  return c;
}

} // namespace

TEST_CASE("zero data gives zero tables and zero profiles") {
  Grid g(2, 64, 12.0);
  const auto traj = integrate(VorticityField(g), short_run(0.1, 2.0, 4.0));
  const auto data = make_expansion_data(traj);
  CHECK_FALSE(data.nonlinear.flagged());
  for (const auto& [key, e] : data.nonlinear.entries)
    for (double v : e.value) CHECK(v == 0.0);
  for (int m = 1; m <= 2; ++m) CHECK(sup(profile_U(m, 1.0, g, data).components) == 0.0);
  const auto set = build_profile_set(1.0, g, data);
  for (const auto& c : K_coefficients(3, set)) CHECK(c.normalized() == 0.0);
  CHECK(sup(K_profile(K_coefficients(3, set), 1.0, g).components) == 0.0);
  CHECK(sup(J_evaluate(3, 1.0, g, data, {}).components) == 0.0);
}

TEST_CASE("nonlinear moments: vanishing mass and refinement oracle") {
  const InitialDataSpec spec{Recipe::perturbed_bump, 0.3, 4, 2.0};
  auto table = [&](int n, double dt, double ratio) {
    Grid g(2, n, 40.0);
    return build_nonlinear_moments(integrate(make_initial_vorticity(spec, g), short_run(dt, ratio, 8.0)), 2);
  };
  const auto coarse = table(160, 0.1, 1.5);
  const auto fine = table(320, 0.05, std::sqrt(1.5));
  const auto& e0 = coarse.at(0, MultiIndex{0, 0});
  for (int j = 0; j < 2; ++j) CHECK(std::abs(e0.value[j]) < 1e-8 * e0.scale[j]);
  const auto& c = coarse.at(0, MultiIndex{1, 0});
  const auto& f = fine.at(0, MultiIndex{1, 0});
  for (int j = 0; j < 2; ++j) {
    MESSAGE("c^" << j << "_{0,(1,0)}: " << c.value[j] << " vs " << f.value[j] << ", tail power " << c.tail_power[j]);
    CHECK(std::abs(c.value[j] - f.value[j]) < 0.02 * std::abs(f.value[j]));
  }
  CHECK_THROWS_AS(coarse.at(2, MultiIndex{0, 0}), InvalidArgument);
}

TEST_CASE("profile term bookkeeping") {
  const auto data = synthetic_data(2, 3);
  for (int m = 1; m <= 2; ++m)
    for (const auto& term : profile_terms_U(m, data)) {
      CHECK(std::isfinite(term.coefficient));
      CHECK(term.descriptor.scale_order() == m);
    }
  CHECK_THROWS_AS(profile_terms_U(0, data), InvalidArgument);
  CHECK_THROWS_AS(profile_terms_U(3, data), InvalidArgument);
  CHECK(approx_I_term_count(5, 2) == 1);
  CHECK(approx_I_term_count(6, 2) == 2);
  CHECK(approx_I_term_count(6, 3) == 1);
  CHECK(approx_I_term_count(8, 3) == 3);
  CHECK_THROWS_AS(approx_I_term_count(4, 2), InvalidArgument);
}

TEST_CASE("linear profiles approximate the heat flow of the initial velocity") {
  // e^{t Delta} a computed spectrally; the remainder after U_1 (U_1 + U_2)
  // must decay by a factor ~2 (~4) between t = 16 and t = 64.
  Grid g(2, 256, 48.0);
  const InitialDataSpec spec{Recipe::perturbed_bump, 0.1, 9, 1.0};
  const auto w0 = make_initial_vorticity(spec, g);
  ExpansionData data = synthetic_data(2, 1, 0.0);
  data.initial = moment_table(w0, 3);
  const auto a = velocity_from_vorticity(w0);
  auto remainder = [&](double t, int M) {
    double diff = 0.0, ref = 0.0;
    std::vector<VelocityField> U;
    for (int m = 1; m <= M; ++m) U.push_back(profile_U(m, t, g, data));
    for (int j = 0; j < 2; ++j) {
      Field r = apply_multiplier(a.components[j], Multiplier::heat(t));
      ref = std::max(ref, r.max_abs());
      for (const auto& u : U) r -= u.components[j];
      diff = std::max(diff, r.max_abs());
    }
    return diff / ref;
  };
  const double r1 = remainder(16.0, 1) / remainder(64.0, 1);
  const double r2 = remainder(16.0, 2) / remainder(64.0, 2);
  MESSAGE("remainder ratios " << r1 << " " << r2);
  CHECK(r1 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(r2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("parity of U_m and Omega_m") {
  for (int dim : {2, 3}) {
    Grid g(dim, dim == 2 ? 128 : 48, 10.0);
    const auto set = build_profile_set(1.0, g, synthetic_data(dim, 5));
    for (int m = 1; m <= dim; ++m) {
      const Parity pu = parity_classify(set.u(m).components);
      CHECK(pu == (m % 2 == 1 ? Parity::odd : Parity::even));
      const Parity pw = parity_classify(set.omega(m + 1).components);
      CHECK(pw == (pu == Parity::odd ? Parity::even : Parity::odd));
    }
    CHECK_THROWS_AS(set.omega(1), InvalidArgument);
    CHECK_THROWS_AS(profile_Omega(dim + 2, 1.0, g, synthetic_data(dim, 5)), InvalidArgument);
  }
}

TEST_CASE("parabolic scaling of U_m, I_p and K_m") {
  for (int dim : {2, 3}) {
    const double lambda = 2.0;
    Grid g(dim, dim == 2 ? 128 : 48, 12.0);
    const Grid gs = g.scaled(lambda);
    const auto data = synthetic_data(dim, 7);
    const auto base = build_profile_set(1.0, g, data);
    const auto scaled = build_profile_set(lambda * lambda, gs, data);
    for (int m = 1; m <= dim; ++m)
      CHECK(scaling_residual(base.u(m).components, scaled.u(m).components, lambda, m) < 1e-8);
    for (int p = dim + 3; p <= 2 * dim + 2; ++p)
      CHECK(scaling_residual(approx_I(p, base), approx_I(p, scaled), lambda, p) < 1e-8);
    const auto coeffs = K_coefficients(dim + 1, base);
    CHECK(scaling_residual(K_profile(coeffs, 1.0, g).components, K_profile(coeffs, lambda * lambda, gs).components,
                           lambda, dim + 1) < 1e-8);
  }
}

TEST_CASE("nonlinear approximants have zero integral") {
  for (int dim : {2, 3}) {
    Grid g(dim, dim == 2 ? 128 : 48, 10.0);
    const auto set = build_profile_set(1.0, g, synthetic_data(dim, 11));
    for (int p = dim + 3; p <= 2 * dim + 2; ++p)
      for (const auto& c : approx_I(p, set)) CHECK(std::abs(c.sum()) <= 1e-10 * lp_norm(c, 1.0) / g.cell_volume());
  }
}

TEST_CASE("Omega_2 L1 norm decays like 1/t") {
  Grid g(2, 256, 24.0);
  const auto data = synthetic_data(2, 13);
  const double a = lp_norm(profile_Omega(2, 1.0, g, data).components, 1.0);
  const double b = lp_norm(profile_Omega(2, 4.0, g, data).components, 1.0);
  CHECK(std::abs(std::log(b / a) / std::log(4.0) + 1.0) < 0.05);
}

TEST_CASE("K coefficients vanish in three dimensions and survive in two") {
  {
    Grid g(3, 48, 12.0);
    const auto set = build_profile_set(1.0, g, synthetic_data(3, 17));
    for (int m = 4; m <= 6; ++m) {
      const auto coeffs = K_coefficients(m, set);
      for (const auto& c : coeffs) CHECK(c.normalized() < 1e-6);
      CHECK(K_profile_relative(coeffs, 1.0, g) < 1e-6);
    }
  }
  {
    Grid g(2, 128, 12.0);
    const auto set = build_profile_set(1.0, g, synthetic_data(2, 17));
    double largest = 0.0;
    for (int m = 3; m <= 4; ++m)
      for (const auto& c : K_coefficients(m, set)) largest = std::max(largest, c.normalized());
    MESSAGE("largest normalized K coefficient in 2D: " << largest);
    CHECK(largest > 1e-2);
    CHECK_THROWS_AS(K_coefficients(2, set), InvalidArgument);
    CHECK_THROWS_AS(K_coefficients(3, build_profile_set(2.0, g, synthetic_data(2, 17))), InvalidArgument);
  }
}

TEST_CASE("parity certificates") {
  for (int dim : {2, 3}) {
    Grid g(dim, dim == 2 ? 128 : 48, 12.0);
    const auto set = build_profile_set(1.0, g, synthetic_data(dim, 19));
    double unclaimed = 0.0;
    for (const auto& c : all_parity_certificates(set)) {
      CHECK(c.pass);
      if (c.claimed_zero) CHECK(c.residual < 1e-8);
      else unclaimed = std::max(unclaimed, c.residual);
    }
    CHECK(unclaimed > 1e-3);
    const auto single = parity_certificate(MultiIndex(dim), 2, 1, set);
    CHECK(single.claimed_zero);
    CHECK(single.pass);
    CHECK_THROWS_AS(parity_certificate(MultiIndex(dim), 1, 1, set), InvalidArgument);
  }
}

TEST_CASE("J_m parity follows the nonlinear approximant") {
  Grid g(2, 128, 12.0);
  const auto data = synthetic_data(2, 23);
  JQuadrature rule;
  rule.panels = 2;
  rule.points = 4;
  rule.s_head = 0.1;
  for (int m : {3, 4}) {
    const auto J = J_evaluate(m, 1.0, g, data, rule);
    CHECK(sup(J.components) > 0.0);
    CHECK(parity_classify(J.components) == expected_J_parity(m, 2));
  }
  CHECK(expected_J_parity(3, 2) == Parity::odd);
  CHECK(expected_J_parity(3, 3) == Parity::even);
  CHECK_THROWS_AS(J_evaluate(3, 1.0, Grid(3, 16, 8.0), synthetic_data(3, 1), rule), InvalidArgument);
  CHECK_THROWS_AS(J_evaluate(2, 1.0, g, data, rule), InvalidArgument);
}

TEST_CASE("time integrals with fitted tails") {
  std::vector<double> t{0.0};
  for (double s = 0.02; s <= 200.0 * 1.0001; s *= 1.2) t.push_back(s);
  auto sample = [&](auto f) {
    std::vector<double> v;
    for (double s : t) v.push_back(f(s));
    return v;
  };
  // int_0^inf (1+s)^-2 ds = 1, with a fitted tail of about 1/200
  const auto F = sample([](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); });
  const TimeIntegral r = integrate_in_time(t, F, F);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.tail_power == doctest::Approx(2.0).epsilon(0.05));
  CHECK_FALSE(r.flagged);

  // (1+s)^-0.8 diverges: without a scaling exponent the integral is rejected
  const auto slow = sample([](double s) { return std::pow(1.0 + s, -0.8); });
  CHECK_THROWS_AS(integrate_in_time(t, slow, slow), ConvergenceFailure);
  CHECK_THROWS_AS(integrate_in_time(t, slow, slow, kTailTolerance, 1.0), ConvergenceFailure);
  // a scaling exponent above one marks the samples as pre-asymptotic
  const TimeIntegral pre = integrate_in_time(t, slow, slow, kTailTolerance, 2.5);
  CHECK(pre.flagged);
  CHECK(pre.tail_power == 2.5);
  CHECK(pre.tail == doctest::Approx(slow.back() * t.back() / 1.5));

  CHECK(nonlinear_scaling_power(3, 1) == 2.5);
  CHECK(nonlinear_scaling_power(2, 2) == 1.5);
  // the first divergent order in 2D is the log order n + 1
  CHECK(nonlinear_scaling_power(2, 3) == 1.0);
  CHECK_THROWS_AS(integrate_in_time({0.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(integrate_in_time({0.1, 1.0, 2.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}), InvalidArgument);
}
