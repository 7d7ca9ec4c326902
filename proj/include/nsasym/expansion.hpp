#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nsasym/fields.hpp"
#include "nsasym/kernels.hpp"
#include "nsasym/solver.hpp"

namespace nsasym {

/// One entry c^j_{l beta} = int_0^inf int (-s)^l (-y)^beta I^j[u](s, y) dy ds.
struct NonlinearMoment {
  int l = 0;
  MultiIndex beta;
  /// Per component j, including the extrapolated tail.
  std::vector<double> value;
  /// Tail beyond the last snapshot, per component.
  std::vector<double> tail;
  /// Fitted decay power p of the integrand, |F(s)| ~ s^-p; NaN when no fit.
  std::vector<double> tail_power;
  /// Same quadrature applied to |(-s)^l (-y)^beta I^j|, used as a scale.
  std::vector<double> scale;
  /// Tail above the configured fraction of the entry.
  bool flagged = false;
};

struct NonlinearMomentTable {
  int dim = 2;
  int max_order = 0;
  double t_end = 0.0;
  double tail_tol = 0.05;
  std::map<std::pair<int, MultiIndex>, NonlinearMoment> entries;

  /// Throws InvalidArgument for entries outside the table.
  const NonlinearMoment& at(int l, const MultiIndex& beta) const;
  bool flagged() const;
};

inline constexpr double kTailTolerance = 0.05;

/// int_0^inf F(s) ds from samples at 0 < times[1] < ... (times[0] = 0).
struct TimeIntegral {
  double value = 0.0;
  double tail = 0.0;
  double tail_power = 0.0;
  /// Same quadrature applied to the magnitude samples.
  double scale = 0.0;
  bool flagged = false;
};

/// Quadratic interpolation on [0, times[1]], Simpson in log s beyond, and a power-law
/// tail fitted on [T/8, T]. `magnitude` bounds |F| pointwise and sets the
/// scale below which the entry counts as zero. Throws ConvergenceFailure
/// when the fitted tail decays no faster than 1/s, unless scaling_power > 1
/// says the integrand must: then the samples are pre-asymptotic, the tail
/// uses scaling_power from the last sample and the entry is flagged.
TimeIntegral integrate_in_time(const std::vector<double>& times, const std::vector<double>& F,
                               const std::vector<double>& magnitude, double tail_tol = kTailTolerance,
                               double scaling_power = 0.0);

/// Decay exponent (n + 3 - m) / 2 of the order-m nonlinear moment integrand
/// s^l int x^beta I ds under parabolic scaling, m = 2l + |beta|.
double nonlinear_scaling_power(int dim, int order);

/// Time integrals of the nonlinear moments along a trajectory with
/// geometric snapshots: quadratic interpolation on [0, t0], Simpson in log s on the
/// geometric snapshots, and a fitted power-law tail beyond T_end. Entries
/// whose tail exceeds tail_tol of the entry are flagged, as are entries
/// whose samples stop before the scaling regime.
NonlinearMomentTable build_nonlinear_moments(const Trajectory& traj, int max_order,
                                             double tail_tol = kTailTolerance);

/// Moment tables feeding the profiles of a run in dimension dim.
struct ExpansionData {
  int dim = 2;
  /// Moments of omega_0 with |alpha| <= dim + 1.
  MomentTable initial;
  /// Nonlinear moments with 2l + |beta| <= dim.
  NonlinearMomentTable nonlinear;
};

ExpansionData make_expansion_data(const Trajectory& traj, double tail_tol = kTailTolerance);

enum class TermSource { initial_data, riesz_nonlinear, plain_nonlinear };
const char* to_string(TermSource s);

/// coefficient * K_descriptor(t) contributes to component `component`.
struct ProfileTerm {
  KernelDescriptor descriptor;
  double coefficient = 0.0;
  TermSource source = TermSource::initial_data;
  int component = 0;
};

/// The three sums defining U_m for 1 <= m <= n.
std::vector<ProfileTerm> profile_terms_U(int m, const ExpansionData& data);

/// Sum of the terms evaluated at time t, one vector component per entry of
/// the result.
VelocityField assemble_terms(const std::vector<ProfileTerm>& terms, double t, const Grid& grid);

/// Sum over terms of ||K_d(t)||_inf |coefficient|, the size the terms
/// would have without cancellation.
double term_scale(const std::vector<ProfileTerm>& terms, double t, const Grid& grid);

VelocityField profile_U(int m, double t, const Grid& grid, const ExpansionData& data);

/// Omega_m = curl U_{m-1}, 2 <= m <= n + 1.
VorticityField profile_Omega(int m, double t, const Grid& grid, const ExpansionData& data);

/// U_1..U_n and Omega_2..Omega_{n+1} at one time on one grid.
struct ProfileSet {
  double t = 0.0;
  Grid grid;
  int dim = 2;
  std::vector<VelocityField> U;
  std::vector<VorticityField> Omega;

  const VelocityField& u(int m) const;
  const VorticityField& omega(int m) const;
};

ProfileSet build_profile_set(double t, const Grid& grid, const ExpansionData& data);

/// I_p^j = sum_{m=1}^{p-n-2} Omega_{p-n-m}^{*j} . U_m, n + 3 <= p <= 2n + 2.
std::vector<Field> approx_I(int p, const ProfileSet& set);

/// Number of products in I_p.
int approx_I_term_count(int p, int dim);

/// c^j = int (-1)^l (-y)^beta I^j_{2l+|beta|+2}(1, y) dy.
struct KCoefficient {
  int m = 0;
  int l = 0;
  MultiIndex beta;
  std::vector<double> value;
  /// int |y^beta| |I^j| dy per component.
  std::vector<double> normalizer;

  /// max_j |c^j| / max_j normalizer^j (0 for a zero integrand).
  double normalized() const;
};

/// Coefficients for every (l, beta) with 2l + |beta| = m, n + 1 <= m <= 2n,
/// from a profile set evaluated at t = 1.
std::vector<KCoefficient> K_coefficients(int m, const ProfileSet& set_at_one);

/// Riesz and plain-G sums of K_m with the given coefficients.
std::vector<ProfileTerm> K_profile_terms(const std::vector<KCoefficient>& coeffs, int dim);
VelocityField K_profile(const std::vector<KCoefficient>& coeffs, double t, const Grid& grid);

/// ||K_profile||_inf relative to the size of the same terms with every
/// coefficient replaced by its normalizer.
double K_profile_relative(const std::vector<KCoefficient>& coeffs, double t, const Grid& grid);

/// Certificate for int y^beta (Omega_{m1}^{*j} . U_{m2}) dy.
struct ParityCertificate {
  MultiIndex beta;
  int m1 = 0;
  int m2 = 0;
  /// True iff |beta| + m1 + m2 is odd.
  bool claimed_zero = false;
  /// max_j |int y^beta f^j| / int |y^beta f^j|.
  double residual = 0.0;
  double tol = 0.0;
  /// claimed_zero implies residual < tol.
  bool pass = true;
};

inline constexpr double kParityTolerance = 1e-6;

ParityCertificate parity_certificate(const MultiIndex& beta, int m1, int m2, const ProfileSet& set,
                                     double tol = kParityTolerance);

/// Every certificate with |beta| <= 2n, 2 <= m1 <= n + 1, 1 <= m2 <= n.
std::vector<ParityCertificate> all_parity_certificates(const ProfileSet& set, double tol = kParityTolerance);

/// Quadrature in s for J_m: the analytic small-s expansion on [0, s_head t],
/// then Gauss-Legendre panels in w = sqrt(s) graded toward s = t.
struct JQuadrature {
  double s_head = 0.04;
  int panels = 4;
  int points = 8;
  /// Orders m+1..m+head_orders of the small-s expansion.
  int head_orders = 4;
  /// Maximum relative change between a rule and its refinement.
  double tol = 0.01;

  JQuadrature refined() const;
};

/// One evaluation of J_m(t) with a fixed rule; n = 2, m in {3, 4}.
VelocityField J_evaluate(int m, double t, const Grid& grid, const ExpansionData& data, const JQuadrature& rule);

struct JProfile {
  VelocityField field;
  /// max |J_refined - J| / max |J_refined|.
  double refinement_change = 0.0;
  Parity parity = Parity::even;
};

/// J_m with the rule and its refinement; throws ConvergenceFailure when
/// the two differ by more than rule.tol.
JProfile J_profile(int m, double t, const Grid& grid, const ExpansionData& data, const JQuadrature& rule = {});

/// Parity that J_m inherits from I_{m+2}: odd-type iff m + 2 - n is odd.
Parity expected_J_parity(int m, int dim);

/// max |lambda^{n+m} F(lambda^2 t, lambda x) - F(t, x)| / max |F(t, .)|,
/// where `scaled` holds F(lambda^2 t) on grid.scaled(lambda).
double scaling_residual(const std::vector<Field>& base, const std::vector<Field>& scaled, double lambda,
                        int order);

/// Same comparison with both sides on one grid: for odd integer lambda the
/// point lambda x_j is again a node whenever it lies in the box, so
/// `scaled` holds F(lambda^2 t) on the grid of `base` and the residual is
/// taken over the nodes with lambda x_j inside the box.
double same_grid_scaling_residual(const std::vector<Field>& base, const std::vector<Field>& scaled, int lambda,
                                  int order);

} // namespace nsasym
