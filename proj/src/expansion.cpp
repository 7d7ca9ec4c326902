#include "nsasym/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nsasym/errors.hpp"

namespace nsasym {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Relative floor below which an entry counts as zero when judging its tail.
constexpr double kSignificance = 1e-8;

void require_dim(int dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
}

// Integral over [a, b] of the quadratic through (x[i], f[i]), by
// three-point Gauss-Legendre, which is exact for quadratics.
double quadratic_integral(const double* x, const double* f, double a, double b) {
  static const double r = std::sqrt(0.6);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double nodes[3] = {mid - r * half, mid, mid + r * half};
  const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double s = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double z = nodes[q];
    const double l0 = (z - x[1]) * (z - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
    const double l1 = (z - x[0]) * (z - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
    const double l2 = (z - x[0]) * (z - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
    s += weights[q] * (l0 * f[0] + l1 * f[1] + l2 * f[2]);
  }
  return s * half;
}

// Integral of F over [s[0], s.back()] for positive, increasing s, as a
// piecewise quadratic in x = ln s applied to F(s) s.
double log_simpson(const std::vector<double>& s, const std::vector<double>& F) {
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  std::vector<double> x(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(s[i]);
    g[i] = F[i] * s[i];
  }
  if (n == 2) return 0.5 * (x[1] - x[0]) * (g[0] + g[1]);
  double total = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) total += quadratic_integral(&x[i], &g[i], x[i], x[i + 2]);
  if (i + 1 < n) total += quadratic_integral(&x[n - 3], &g[n - 3], x[n - 2], x[n - 1]);
  return total;
}

struct Tail {
  double value = 0.0;
  double power = kNan;
  bool fitted = false;
};

// Relative least squares for F ~ s^-p (A + B s^-1/2) at fixed p; returns the
// residual and sets A, B.
double corrected_residual(const std::vector<double>& s, const std::vector<double>& F, double p, double& A,
                          double& B) {
  double aa = 0, ab = 0, bb = 0, ay = 0, by = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = std::pow(s[i], -p) / F[i], v = u / std::sqrt(s[i]);
    aa += u * u;
    ab += u * v;
    bb += v * v;
    ay += u;
    by += v;
  }
  const double det = aa * bb - ab * ab;
  A = (ay * bb - by * ab) / det;
  B = (by * aa - ay * ab) / det;
  double r = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double e = std::pow(s[i], -p) * (A + B / std::sqrt(s[i])) / F[i] - 1.0;
    r += e * e;
  }
  return r;
}

// Power-law fit |F| ~ s^-p over the samples in [T/8, T] with constant sign.
// With enough samples the first correction s^-(p+1/2) of a heat-kernel
// expansion is fitted too, and kept when it is small at T.
Tail fit_tail(const std::vector<double>& s, const std::vector<double>& F) {
  Tail tail;
  const double T = s.back();
  std::vector<double> xs, fs, lx, ly;
  const double sign = F.back() > 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < T / 8.0) continue;
    if (!(F[i] * sign > 0.0)) return tail;
    xs.push_back(s[i]);
    fs.push_back(F[i]);
    lx.push_back(std::log(s[i]));
    ly.push_back(std::log(std::abs(F[i])));
  }
  if (lx.size() < 3) return tail;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  tail.power = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  tail.fitted = true;
  if (tail.power > 1.0) tail.value = F.back() * T / (tail.power - 1.0);
  if (xs.size() < 6) return tail;

  double best_p = tail.power, best_r = std::numeric_limits<double>::infinity(), A = 0, B = 0;
  for (double p = tail.power - 1.0; p <= tail.power + 1.0; p += 0.01) {
    double a, b;
    const double r = corrected_residual(xs, fs, p, a, b);
    if (r < best_r) best_r = r, best_p = p;
  }
  double lo = best_p - 0.01, hi = best_p + 0.01;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    double a, b;
    if (corrected_residual(xs, fs, m1, a, b) < corrected_residual(xs, fs, m2, a, b)) hi = m2;
    else lo = m1;
  }
  best_p = 0.5 * (lo + hi);
  corrected_residual(xs, fs, best_p, A, B);
  if (!(best_p > 1.0) || !(std::abs(B) < 0.5 * std::abs(A) * std::sqrt(T))) return tail;
  tail.power = best_p;
  tail.value = A * std::pow(T, 1.0 - best_p) / (best_p - 1.0) + B * std::pow(T, 0.5 - best_p) / (best_p - 0.5);
  return tail;
}

// Multi-index pairs (l, beta) with 2l + |beta| == order.
std::vector<std::pair<int, MultiIndex>> time_space_indices(int dim, int order) {
  std::vector<std::pair<int, MultiIndex>> out;
  for (int l = 0; 2 * l <= order; ++l)
    for (const auto& beta : multi_indices(dim, order - 2 * l)) out.emplace_back(l, beta);
  return out;
}

double taylor_weight(int l, const MultiIndex& beta) { return factorial(l) * beta.factorial(); }

void require_matching(const ExpansionData& data, const Grid& grid) {
  if (data.dim != grid.dim()) throw InvalidArgument("expansion data dimension does not match the grid");
}

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, z);
      dp = n * (z * p - std::legendre(n - 1, z)) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    dp = n * (z * std::legendre(n, z) - std::legendre(n - 1, z)) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

} // namespace

const NonlinearMoment& NonlinearMomentTable::at(int l, const MultiIndex& beta) const {
  const auto it = entries.find({l, beta});
  if (it == entries.end())
    throw InvalidArgument("nonlinear moment (l=" + std::to_string(l) + ", beta=" + beta.to_string() +
                          ") is not in the table");
  return it->second;
}

bool NonlinearMomentTable::flagged() const {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.second.flagged; });
}

TimeIntegral integrate_in_time(const std::vector<double>& times, const std::vector<double>& F,
                               const std::vector<double>& magnitude, double tail_tol, double scaling_power) {
  const std::size_t ns = times.size();
  if (ns < 3 || F.size() != ns || magnitude.size() != ns) throw InvalidArgument("need at least three samples");
  if (times[0] != 0.0) throw InvalidArgument("samples must start at s = 0");
  const std::vector<double> geo(times.begin() + 1, times.end());
  const std::vector<double> Fg(F.begin() + 1, F.end()), Ag(magnitude.begin() + 1, magnitude.end());
  TimeIntegral r;
  // the integrand is smooth at s = 0: quadratic through the first three samples
  const double finite = quadratic_integral(times.data(), F.data(), 0.0, times[1]) + log_simpson(geo, Fg);
  r.scale = quadratic_integral(times.data(), magnitude.data(), 0.0, times[1]) + log_simpson(geo, Ag);
  const Tail tail = fit_tail(geo, Fg);
  const double floor = std::max(std::abs(finite), kSignificance * r.scale);
  const double last = std::abs(F.back()) * times.back();
  if (tail.fitted && tail.power <= 1.0 && last > tail_tol * floor) {
    if (!(scaling_power > 1.0))
      throw ConvergenceFailure("integrand decays like s^-" + std::to_string(tail.power) +
                               "; the time integral does not converge");
    const double T = times.back();
    r.tail = F.back() * T / (scaling_power - 1.0);
    r.tail_power = scaling_power;
    r.value = finite + r.tail;
    r.flagged = true;
    return r;
  }
  r.value = finite + tail.value;
  r.tail = tail.value;
  r.tail_power = tail.power;
  // without a fit the tail is unknown; judge it by its size at T_end
  const double tail_size = tail.fitted ? std::abs(tail.value) : last;
  r.flagged = r.scale > 0.0 && tail_size > tail_tol * floor;
  return r;
}

double nonlinear_scaling_power(int dim, int order) { return 0.5 * (dim + 3 - order); }

NonlinearMomentTable build_nonlinear_moments(const Trajectory& traj, int max_order, double tail_tol) {
  const int dim = traj.grid.dim();
  if (dim < 2) throw InvalidArgument("nonlinear moments need a vorticity trajectory in 2D or 3D");
  if (max_order < 0) throw InvalidArgument("max_order must be non-negative");
  if (traj.snapshots.size() < 3) throw InvalidArgument("trajectory needs at least three snapshots");
  if (traj.snapshots.front().t != 0.0) throw InvalidArgument("trajectory must start at t = 0");

  const auto indices = multi_indices_up_to(dim, max_order);
  const std::size_t ns = traj.snapshots.size();
  // raw and absolute moments of I^j per snapshot
  std::map<MultiIndex, std::vector<std::vector<double>>> raw, mag;
  for (const auto& beta : indices) {
    raw[beta].assign(ns, std::vector<double>(dim, 0.0));
    mag[beta].assign(ns, std::vector<double>(dim, 0.0));
  }
  std::vector<double> times(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& snap = traj.snapshots[s];
    if (s > 0 && !(snap.t > times[s - 1])) throw InvalidArgument("snapshot times must increase");
    times[s] = snap.t;
    const auto I = flux(snap.omega, snap.velocity);
    require_decay_at_boundary(I);
    for (const auto& beta : indices)
      for (int j = 0; j < dim; ++j) {
        raw[beta][s][j] = raw_moment(I[j], beta);
        mag[beta][s][j] = abs_moment(I[j], beta);
      }
  }

  NonlinearMomentTable table;
  table.dim = dim;
  table.max_order = max_order;
  table.t_end = times.back();
  table.tail_tol = tail_tol;

  for (int order = 0; order <= max_order; ++order) {
    for (const auto& [l, beta] : time_space_indices(dim, order)) {
      NonlinearMoment e;
      e.l = l;
      e.beta = beta;
      const double sign = (l % 2 == 0) ? 1.0 : -1.0;
      for (int j = 0; j < dim; ++j) {
        std::vector<double> F(ns), A(ns);
        for (std::size_t s = 0; s < ns; ++s) {
          const double sl = std::pow(times[s], l);
          F[s] = sign * sl * raw[beta][s][j];
          A[s] = sl * mag[beta][s][j];
        }
        TimeIntegral r;
        try {
          r = integrate_in_time(times, F, A, tail_tol, nonlinear_scaling_power(dim, order));
        } catch (const ConvergenceFailure& err) {
          throw ConvergenceFailure("nonlinear moment (l=" + std::to_string(l) + ", beta=" + beta.to_string() +
                                   "): " + err.what());
        }
        e.value.push_back(r.value);
        e.tail.push_back(r.tail);
        e.tail_power.push_back(r.tail_power);
        e.scale.push_back(r.scale);
        e.flagged = e.flagged || r.flagged;
      }
      table.entries.emplace(std::make_pair(l, beta), std::move(e));
    }
  }
  return table;
}

ExpansionData make_expansion_data(const Trajectory& traj, double tail_tol) {
  ExpansionData d;
  d.dim = traj.grid.dim();
  d.initial = moment_table(traj.snapshots.front().omega, d.dim + 1);
  d.nonlinear = build_nonlinear_moments(traj, d.dim, tail_tol);
  return d;
}

const char* to_string(TermSource s) {
  switch (s) {
  case TermSource::initial_data: return "initial-data";
  case TermSource::riesz_nonlinear: return "riesz-nonlinear";
  case TermSource::plain_nonlinear: return "plain-nonlinear";
  }
  return "?";
}

std::vector<ProfileTerm> profile_terms_U(int m, const ExpansionData& data) {
  const int n = data.dim;
  require_dim(n);
  if (m < 1 || m > n) throw InvalidArgument("U_m is defined for 1 <= m <= n");
  if (data.initial.max_order < m + 1) throw InvalidArgument("initial moment table is missing order m + 1");
  std::vector<ProfileTerm> terms;
  auto add = [&](const KernelDescriptor& d, double c, TermSource src, int comp) {
    if (c != 0.0) terms.push_back({d, c, src, comp});
  };
  for (const auto& alpha : multi_indices(n, m + 1)) {
    const double w = alpha.factorial();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (i != j)
          add(KernelDescriptor::inverse_gradient(0, alpha, i), -data.initial.value(alpha, i, j) / w,
              TermSource::initial_data, j);
  }
  for (const auto& [l, beta] : time_space_indices(n, m)) {
    const auto& c = data.nonlinear.at(l, beta).value;
    const double w = taylor_weight(l, beta);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k)
        add(KernelDescriptor::riesz_pair(l, beta, j, k), -c[k] / w, TermSource::riesz_nonlinear, j);
      add(KernelDescriptor::heat(l, beta), -c[j] / w, TermSource::plain_nonlinear, j);
    }
  }
  return terms;
}

VelocityField assemble_terms(const std::vector<ProfileTerm>& terms, double t, const Grid& grid) {
  std::vector<SpectralField> acc(grid.dim(), SpectralField(grid));
  for (const auto& term : terms) {
    if (term.component < 0 || term.component >= grid.dim()) throw InvalidArgument("term component out of range");
    SpectralField s = composed_kernel_spectrum(term.descriptor, t, grid);
    s *= term.coefficient;
    acc[term.component] += s;
  }
  VelocityField out(grid, t);
  for (int j = 0; j < grid.dim(); ++j) out.components[j] = inverse_transform(acc[j]);
  return out;
}

double term_scale(const std::vector<ProfileTerm>& terms, double t, const Grid& grid) {
  std::map<std::string, double> sup;
  double total = 0.0;
  for (const auto& term : terms) {
    const std::string key = term.descriptor.to_string();
    auto it = sup.find(key);
    if (it == sup.end()) it = sup.emplace(key, composed_kernel(term.descriptor, t, grid).max_abs()).first;
    total += it->second * std::abs(term.coefficient);
  }
  return total;
}

VelocityField profile_U(int m, double t, const Grid& grid, const ExpansionData& data) {
  require_matching(data, grid);
  return assemble_terms(profile_terms_U(m, data), t, grid);
}

VorticityField profile_Omega(int m, double t, const Grid& grid, const ExpansionData& data) {
  require_matching(data, grid);
  if (m < 2 || m > data.dim + 1) throw InvalidArgument("Omega_m is defined for 2 <= m <= n + 1");
  VorticityField w = curl(profile_U(m - 1, t, grid, data));
  w.time = t;
  return w;
}

const VelocityField& ProfileSet::u(int m) const {
  if (m < 1 || m > dim) throw InvalidArgument("U_m is defined for 1 <= m <= n");
  return U[m - 1];
}

const VorticityField& ProfileSet::omega(int m) const {
  if (m < 2 || m > dim + 1) throw InvalidArgument("Omega_m is defined for 2 <= m <= n + 1");
  return Omega[m - 2];
}

ProfileSet build_profile_set(double t, const Grid& grid, const ExpansionData& data) {
  require_matching(data, grid);
  ProfileSet set{t, grid, grid.dim(), {}, {}};
  for (int m = 1; m <= set.dim; ++m) {
    set.U.push_back(profile_U(m, t, grid, data));
    VorticityField w = curl(set.U.back());
    w.time = t;
    set.Omega.push_back(std::move(w));
  }
  return set;
}

int approx_I_term_count(int p, int dim) {
  if (p < dim + 3 || p > 2 * dim + 2) throw InvalidArgument("I_p is defined for n + 3 <= p <= 2n + 2");
  return p - dim - 2;
}

std::vector<Field> approx_I(int p, const ProfileSet& set) {
  const int n = set.dim;
  const int count = approx_I_term_count(p, n);
  std::vector<Field> out(n, Field(set.grid));
  for (int m = 1; m <= count; ++m) {
    const auto part = flux(set.omega(p - n - m), set.u(m));
    for (int j = 0; j < n; ++j) out[j] += part[j];
  }
  return out;
}

double KCoefficient::normalized() const {
  double c = 0.0, s = 0.0;
  for (std::size_t j = 0; j < value.size(); ++j) {
    c = std::max(c, std::abs(value[j]));
    s = std::max(s, normalizer[j]);
  }
  return s > 0.0 ? c / s : 0.0;
}

std::vector<KCoefficient> K_coefficients(int m, const ProfileSet& set) {
  const int n = set.dim;
  if (m < n + 1 || m > 2 * n) throw InvalidArgument("K_m is defined for n + 1 <= m <= 2n");
  if (std::abs(set.t - 1.0) > 1e-12) throw InvalidArgument("K coefficients use profiles at t = 1");
  const auto I = approx_I(m + 2, set);
  require_decay_at_boundary(I);
  std::vector<KCoefficient> out;
  for (const auto& [l, beta] : time_space_indices(n, m)) {
    KCoefficient c{m, l, beta, std::vector<double>(n), std::vector<double>(n)};
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j < n; ++j) {
      c.value[j] = sign * raw_moment(I[j], beta);
      c.normalizer[j] = abs_moment(I[j], beta);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ProfileTerm> K_profile_terms(const std::vector<KCoefficient>& coeffs, int dim) {
  std::vector<ProfileTerm> terms;
  for (const auto& c : coeffs) {
    if (static_cast<int>(c.value.size()) != dim) throw InvalidArgument("coefficient dimension mismatch");
    const double w = taylor_weight(c.l, c.beta);
    for (int j = 0; j < dim; ++j) {
      for (int k = 0; k < dim; ++k)
        if (c.value[k] != 0.0)
          terms.push_back({KernelDescriptor::riesz_pair(c.l, c.beta, j, k), -c.value[k] / w,
                           TermSource::riesz_nonlinear, j});
      if (c.value[j] != 0.0)
        terms.push_back({KernelDescriptor::heat(c.l, c.beta), -c.value[j] / w, TermSource::plain_nonlinear, j});
    }
  }
  return terms;
}

VelocityField K_profile(const std::vector<KCoefficient>& coeffs, double t, const Grid& grid) {
  return assemble_terms(K_profile_terms(coeffs, grid.dim()), t, grid);
}

double K_profile_relative(const std::vector<KCoefficient>& coeffs, double t, const Grid& grid) {
  std::vector<KCoefficient> sizes = coeffs;
  for (auto& c : sizes) c.value = c.normalizer;
  const double scale = term_scale(K_profile_terms(sizes, grid.dim()), t, grid);
  if (scale == 0.0) return 0.0;
  const auto K = K_profile(coeffs, t, grid);
  double sup = 0.0;
  for (const auto& c : K.components) sup = std::max(sup, c.max_abs());
  return sup / scale;
}

namespace {

void check_certificate_range(int m1, int m2, int n, const MultiIndex& beta) {
  if (m1 < 2 || m1 > n + 1) throw InvalidArgument("parity certificate needs 2 <= m1 <= n + 1");
  if (m2 < 1 || m2 > n) throw InvalidArgument("parity certificate needs 1 <= m2 <= n");
  if (beta.dim() != n) throw InvalidArgument("multi-index dimension does not match the grid");
}

ParityCertificate certify(const std::vector<Field>& f, const MultiIndex& beta, int m1, int m2, double tol) {
  ParityCertificate c;
  c.beta = beta;
  c.m1 = m1;
  c.m2 = m2;
  c.claimed_zero = (beta.order() + m1 + m2) % 2 == 1;
  c.tol = tol;
  for (const auto& comp : f) {
    const double scale = abs_moment(comp, beta);
    if (scale > 0.0) c.residual = std::max(c.residual, std::abs(raw_moment(comp, beta)) / scale);
  }
  c.pass = !c.claimed_zero || c.residual < tol;
  return c;
}

} // namespace

ParityCertificate parity_certificate(const MultiIndex& beta, int m1, int m2, const ProfileSet& set, double tol) {
  check_certificate_range(m1, m2, set.dim, beta);
  return certify(flux(set.omega(m1), set.u(m2)), beta, m1, m2, tol);
}

std::vector<ParityCertificate> all_parity_certificates(const ProfileSet& set, double tol) {
  const int n = set.dim;
  const auto betas = multi_indices_up_to(n, 2 * n);
  std::vector<ParityCertificate> out;
  for (int m1 = 2; m1 <= n + 1; ++m1)
    for (int m2 = 1; m2 <= n; ++m2) {
      const auto f = flux(set.omega(m1), set.u(m2));
      for (const auto& beta : betas) out.push_back(certify(f, beta, m1, m2, tol));
    }
  return out;
}

JQuadrature JQuadrature::refined() const {
  JQuadrature r = *this;
  r.s_head *= 0.5;
  r.panels *= 2;
  return r;
}

Parity expected_J_parity(int m, int dim) { return (m + 2 - dim) % 2 != 0 ? Parity::odd : Parity::even; }

VelocityField J_evaluate(int m, double t, const Grid& grid, const ExpansionData& data, const JQuadrature& rule) {
  require_matching(data, grid);
  const int n = grid.dim();
  if (n != 2) throw InvalidArgument("J_m is evaluated in two dimensions only");
  if (m < n + 1 || m > 2 * n) throw InvalidArgument("J_m is defined for n + 1 <= m <= 2n");
  if (!(t > 0.0)) throw InvalidArgument("time must be positive");
  if (!(rule.s_head > 0.0 && rule.s_head < 1.0) || rule.panels < 1 || rule.points < 2 || rule.head_orders < 1)
    throw InvalidArgument("invalid J quadrature rule");

  const int p = m + 2;
  const int top = m + rule.head_orders;
  // kernel spectra d_t^l grad^beta R^j R^k G(t) for 1 <= 2l + |beta| <= top
  struct TaylorKernel {
    int l;
    MultiIndex beta;
    int order;
    std::vector<SpectralField> jk;  // j * n + k
  };
  std::vector<TaylorKernel> kernels;
  for (int order = 1; order <= top; ++order)
    for (const auto& [l, beta] : time_space_indices(n, order)) {
      TaylorKernel tk{l, beta, order, {}};
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          tk.jk.push_back(composed_kernel_spectrum(KernelDescriptor::riesz_pair(l, beta, j, k), t, grid));
      kernels.push_back(std::move(tk));
    }

  std::vector<SpectralField> acc(n, SpectralField(grid));
  auto add_taylor = [&](const TaylorKernel& tk, const std::vector<double>& mu, double factor) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Complex c = factor * mu[k] / taylor_weight(tk.l, tk.beta);
        const auto& src = tk.jk[j * n + k].values;
        auto& dst = acc[j].values;
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += c * src[i];
      }
  };
  auto moments_of = [&](const std::vector<Field>& I, const MultiIndex& beta) {
    std::vector<double> mu(n);
    for (int k = 0; k < n; ++k) mu[k] = raw_moment(I[k], beta);
    return mu;
  };

  // small-s expansion on [0, s_c]: (-s)^l mu_beta(s) = (-1)^l s^{(q-m-2)/2} mu_beta(1)
  const double s_c = rule.s_head * t;
  {
    const auto I_ref = approx_I(p, build_profile_set(t, grid, data));
    for (const auto& tk : kernels) {
      if (tk.order <= m) continue;
      std::vector<double> mu = moments_of(I_ref, tk.beta);
      const double to_one = std::pow(t, -(tk.beta.order() - m - 2) / 2.0);
      for (double& v : mu) v *= to_one;
      const double sign = (tk.l % 2 == 0) ? 1.0 : -1.0;
      const double integral = 2.0 * std::pow(s_c, (tk.order - m) / 2.0) / (tk.order - m);
      add_taylor(tk, mu, sign * integral);
    }
  }

  // body in w = sqrt(s) on [sqrt(s_c), sqrt(t)], panels shrinking toward s = t
  std::vector<double> gx, gw;
  gauss_legendre(rule.points, gx, gw);
  const double wa = std::sqrt(s_c), wb = std::sqrt(t);
  auto edge = [&](int i) {
    const double r = 1.0 - static_cast<double>(i) / rule.panels;
    return wa + (wb - wa) * (1.0 - r * r);
  };
  for (int panel = 0; panel < rule.panels; ++panel) {
    const double a = edge(panel), b = edge(panel + 1);
    for (int q = 0; q < rule.points; ++q) {
      const double w = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
      const double s = w * w;
      const double weight = 0.5 * (b - a) * gw[q] * 2.0 * w;
      const auto I = approx_I(p, build_profile_set(s, grid, data));
      std::vector<SpectralField> I_hat;
      for (int k = 0; k < n; ++k) I_hat.push_back(forward_transform(I[k]));
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const Multiplier rr = Multiplier::riesz_pair(j, k);
          const Multiplier heat = Multiplier::heat(t - s);
          auto& dst = acc[j].values;
          const auto& src = I_hat[k].values;
          for_each_mode(grid, [&](std::size_t i, const Wavevector& wv) {
            dst[i] += weight * rr(wv) * heat(wv) * src[i];
          });
        }
      for (const auto& tk : kernels) {
        if (tk.order > m) continue;
        const double sign = (tk.l % 2 == 0) ? 1.0 : -1.0;
        add_taylor(tk, moments_of(I, tk.beta), -weight * sign * std::pow(s, tk.l));
      }
    }
  }

  VelocityField out(grid, t);
  for (int j = 0; j < n; ++j) out.components[j] = inverse_transform(acc[j]);
  return out;
}

JProfile J_profile(int m, double t, const Grid& grid, const ExpansionData& data, const JQuadrature& rule) {
  const VelocityField coarse = J_evaluate(m, t, grid, data, rule);
  JProfile out{J_evaluate(m, t, grid, data, rule.refined()), 0.0, Parity::even};
  double diff = 0.0, ref = 0.0;
  for (int j = 0; j < grid.dim(); ++j) {
    ref = std::max(ref, out.field.components[j].max_abs());
    for (std::size_t i = 0; i < coarse.components[j].values.size(); ++i)
      diff = std::max(diff, std::abs(coarse.components[j].values[i] - out.field.components[j].values[i]));
  }
  out.refinement_change = ref > 0.0 ? diff / ref : 0.0;
  out.parity = parity_classify(out.field.components);
  if (out.refinement_change > rule.tol)
    throw ConvergenceFailure("J_" + std::to_string(m) + " quadrature changed by " +
                             std::to_string(out.refinement_change) + " under refinement");
  return out;
}

double scaling_residual(const std::vector<Field>& base, const std::vector<Field>& scaled, double lambda,
                        int order) {
  if (base.size() != scaled.size() || base.empty()) throw InvalidArgument("component count mismatch");
  const double factor = std::pow(lambda, base.front().grid.dim() + order);
  double diff = 0.0, ref = 0.0;
  for (std::size_t c = 0; c < base.size(); ++c) {
    if (base[c].values.size() != scaled[c].values.size()) throw InvalidArgument("grid size mismatch");
    ref = std::max(ref, base[c].max_abs());
    for (std::size_t i = 0; i < base[c].values.size(); ++i)
      diff = std::max(diff, std::abs(factor * scaled[c].values[i] - base[c].values[i]));
  }
  return ref > 0.0 ? diff / ref : diff;
}

double same_grid_scaling_residual(const std::vector<Field>& base, const std::vector<Field>& scaled, int lambda,
                                  int order) {
  if (lambda < 1 || lambda % 2 == 0) throw InvalidArgument("same-grid scaling needs an odd integer lambda");
  if (base.size() != scaled.size() || base.empty()) throw InvalidArgument("component count mismatch");
  const Grid& g = base.front().grid;
  for (std::size_t c = 0; c < base.size(); ++c)
    if (!(base[c].grid == g) || !(scaled[c].grid == g)) throw InvalidArgument("grid mismatch");
  const int n = g.n(), dim = g.dim();
  // x_j = (j + 1/2 - N/2) h, lambda x_j = x_{j'} with j' = lambda j + (lambda - 1)(1 - N) / 2
  auto image = [&](int j) { return lambda * j + (lambda - 1) * (1 - n) / 2; };
  const double factor = std::pow(static_cast<double>(lambda), dim + order);
  double diff = 0.0, ref = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  const int n1 = dim > 1 ? n : 1, n2 = dim > 2 ? n : 1;
  for (idx[0] = 0; idx[0] < n; ++idx[0])
    for (idx[1] = 0; idx[1] < n1; ++idx[1])
      for (idx[2] = 0; idx[2] < n2; ++idx[2]) {
        std::size_t src = 0, dst = 0;
        bool inside = true;
        for (int a = 0; a < dim; ++a) {
          const int j2 = image(idx[a]);
          if (j2 < 0 || j2 >= n) inside = false;
          src = src * n + idx[a];
          dst = dst * n + (inside ? j2 : 0);
        }
        if (!inside) continue;
        for (std::size_t c = 0; c < base.size(); ++c) {
          ref = std::max(ref, std::abs(base[c].values[src]));
          diff = std::max(diff, std::abs(factor * scaled[c].values[dst] - base[c].values[src]));
        }
      }
  return ref > 0.0 ? diff / ref : diff;
}

} // namespace nsasym
