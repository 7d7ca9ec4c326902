#include "nsasym/fields.hpp"

#include <iomanip>
#include <sstream>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nsasym/errors.hpp"

namespace nsasym {

int pair_count(int dim) { return dim * (dim - 1) / 2; }

std::pair<int, int> pair_at(int dim, int p) {
  if (dim == 2 && p == 0) return {0, 1};
  if (dim == 3) {
    if (p == 0) return {0, 1};
    if (p == 1) return {0, 2};
    if (p == 2) return {1, 2};
  }
  throw InvalidArgument("vorticity component index out of range");
}

int pair_index(int dim, int i, int j) {
  if (i > j) std::swap(i, j);
  if (i == j || i < 0 || j >= dim) throw InvalidArgument("invalid vorticity index pair");
  if (dim == 2) return 0;
  return i == 0 ? j - 1 : 2;
}

VorticityField::VorticityField(const Grid& g, double t) : grid(g), time(t) {
  if (g.dim() < 2) throw InvalidArgument("vorticity needs dimension 2 or 3");
  components.assign(pair_count(g.dim()), Field(g));
}

Field VorticityField::entry(int i, int j) const {
  if (i == j) return Field(grid);
  const Field& c = components[pair_index(grid.dim(), i, j)];
  return i < j ? c : -1.0 * c;
}

VelocityField::VelocityField(const Grid& g, double t) : grid(g), time(t) {
  components.assign(g.dim(), Field(g));
}

// ---------------------------------------------------------------------------
// Gaussian-polynomial potentials

double GaussPoly::operator()(const std::array<double, 3>& x) const {
  std::array<double, 3> y{0.0, 0.0, 0.0};
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) {
    y[a] = x[a] - center[a];
    r2 += y[a] * y[a];
  }
  double p = 0.0;
  for (const auto& [alpha, c] : coef) {
    double mono = c;
    for (int a = 0; a < dim; ++a)
      for (int r = 0; r < alpha[a]; ++r) mono *= y[a];
    p += mono;
  }
  return p * std::exp(-r2 / (2.0 * sigma * sigma));
}

GaussPoly GaussPoly::derivative(int axis) const {
  GaussPoly d = *this;
  d.coef.clear();
  const MultiIndex e = MultiIndex::unit(dim, axis);
  for (const auto& [alpha, c] : coef) {
    if (alpha[axis] > 0) {
      MultiIndex lower = alpha;
      lower[axis] -= 1;
      d.coef[lower] += c * alpha[axis];
    }
    d.coef[alpha + e] -= c / (sigma * sigma);
  }
  return d;
}

GaussPoly GaussPoly::operator*(double s) const {
  GaussPoly out = *this;
  for (auto& [alpha, c] : out.coef) c *= s;
  return out;
}

bool GaussPoly::empty() const {
  return std::all_of(coef.begin(), coef.end(), [](const auto& kv) { return kv.second == 0.0; });
}

double gaussian_moment_1d(int k, double sigma) {
  if (k % 2 == 1) return 0.0;
  double double_factorial = 1.0;
  for (int i = k - 1; i > 1; i -= 2) double_factorial *= i;
  return double_factorial * std::pow(sigma, k + 1) * std::sqrt(2.0 * std::numbers::pi);
}

static double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

double GaussPoly::moment(const MultiIndex& alpha) const {
  double total = 0.0;
  for (const auto& [a, c] : coef) {
    double term = c;
    for (int i = 0; i < dim; ++i) {
      // int (y + x0)^alpha_i y^a_i exp(-y^2 / 2 sigma^2) dy
      double s = 0.0;
      for (int r = 0; r <= alpha[i]; ++r)
        s += binomial(alpha[i], r) * std::pow(center[i], alpha[i] - r) * gaussian_moment_1d(r + a[i], sigma);
      term *= s;
    }
    total += term;
  }
  return (alpha.order() % 2 == 0) ? total : -total;
}

// ---------------------------------------------------------------------------
// Initial data

Recipe parse_recipe(const std::string& name) {
  if (name == "potential-bump") return Recipe::potential_bump;
  if (name == "perturbed-bump") return Recipe::perturbed_bump;
  throw InvalidArgument("unknown initial-data recipe '" + name + "'");
}

const char* to_string(Recipe r) {
  return r == Recipe::potential_bump ? "potential-bump" : "perturbed-bump";
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

GaussPoly make_poly(int dim, double sigma, double scale,
                    std::initializer_list<std::pair<MultiIndex, double>> terms) {
  GaussPoly p;
  p.dim = dim;
  p.sigma = sigma;
  for (const auto& [alpha, c] : terms) p.coef[alpha] += scale * c * std::pow(sigma, -alpha.order());
  return p;
}

} // namespace

std::vector<GaussPoly> initial_potentials(const InitialDataSpec& spec, int dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("initial data dimension must be 1, 2 or 3");
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude))
    throw InvalidArgument("initial-data amplitude must be non-negative");
  if (!(spec.width > 0.0)) throw InvalidArgument("initial-data width must be positive");
  const double s = spec.width;
  // exp(-r^2 / 2 s^2) has peak gradient exp(-1/2) / s.
  const double c = spec.amplitude * s * std::exp(0.5);

  std::vector<GaussPoly> psi;
  if (dim == 1) {
    psi.push_back(make_poly(1, s, c, {{MultiIndex{0}, 1.0}, {MultiIndex{1}, 0.5}}));
  } else if (dim == 2) {
    psi.push_back(make_poly(2, s, c, {{MultiIndex{0, 0}, 1.0}, {MultiIndex{1, 0}, 0.5}, {MultiIndex{1, 1}, 0.3}}));
  } else {
    psi.push_back(make_poly(3, s, c, {{MultiIndex{0, 0, 0}, 1.0}, {MultiIndex{0, 1, 0}, 0.5}}));
    psi.push_back(make_poly(3, s, c, {{MultiIndex{0, 0, 0}, 0.6}, {MultiIndex{0, 0, 1}, -0.4}}));
    psi.push_back(make_poly(3, s, c, {{MultiIndex{0, 0, 0}, 0.8}, {MultiIndex{1, 0, 0}, 0.3}}));
  }

  if (spec.recipe == Recipe::perturbed_bump) {
    std::mt19937_64 rng(spec.seed);
    std::array<double, 3> center{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) center[a] = (uniform01(rng) - 0.5) * 0.5 * s;
    for (auto& p : psi) {
      p.center = center;
      for (const auto& alpha : multi_indices_up_to(dim, 2))
        p.coef[alpha] += c * (uniform01(rng) - 0.5) * 0.8 * std::pow(s, -alpha.order());
    }
  }
  if (spec.amplitude == 0.0)
    for (auto& p : psi) p.coef.clear();
  return psi;
}

std::vector<GaussPoly> initial_velocity_closed_form(const std::vector<GaussPoly>& psi, int dim) {
  if (dim == 1) return {psi.at(0).derivative(0)};
  if (dim == 2) return {psi.at(0).derivative(1), psi.at(0).derivative(0) * -1.0};
  auto diff = [](GaussPoly a, const GaussPoly& b) {
    for (const auto& [alpha, c] : b.coef) a.coef[alpha] -= c;
    return a;
  };
  return {diff(psi.at(2).derivative(1), psi.at(1).derivative(2)),
          diff(psi.at(0).derivative(2), psi.at(2).derivative(0)),
          diff(psi.at(1).derivative(0), psi.at(0).derivative(1))};
}

namespace {

SpectralField sample_spectrum(const GaussPoly& p, const Grid& grid) {
  return forward_transform(Field::sample(grid, [&](const std::array<double, 3>& x) { return p(x); }));
}

SpectralField spectral_partial(const SpectralField& f, int axis) {
  return apply_multiplier(f, Multiplier::derivative(MultiIndex::unit(f.grid.dim(), axis)));
}

} // namespace

VorticityField make_initial_vorticity(const InitialDataSpec& spec, const Grid& grid) {
  const int dim = grid.dim();
  if (dim < 2) throw InvalidArgument("vorticity initial data needs dimension 2 or 3");
  const auto psi = initial_potentials(spec, dim);
  VorticityField w(grid, 0.0);
  if (spec.amplitude == 0.0) return w;

  std::vector<SpectralField> a;
  if (dim == 2) {
    const SpectralField p = sample_spectrum(psi[0], grid);
    a.push_back(spectral_partial(p, 1));
    a.push_back(spectral_partial(p, 0));
    a[1] *= -1.0;
  } else {
    std::vector<SpectralField> p;
    for (const auto& q : psi) p.push_back(sample_spectrum(q, grid));
    for (int j = 0; j < 3; ++j) {
      const int b = (j + 1) % 3, c = (j + 2) % 3;
      SpectralField aj = spectral_partial(p[c], b);
      SpectralField tmp = spectral_partial(p[b], c);
      tmp *= -1.0;
      aj += tmp;
      a.push_back(std::move(aj));
    }
  }
  for (int p = 0; p < pair_count(dim); ++p) {
    const auto [i, j] = pair_at(dim, p);
    SpectralField wij = spectral_partial(a[j], i);
    SpectralField tmp = spectral_partial(a[i], j);
    tmp *= -1.0;
    wij += tmp;
    w.components[p] = inverse_transform(wij);
  }
  return w;
}

Field make_initial_burgers(const InitialDataSpec& spec, const Grid& grid) {
  if (grid.dim() != 1) throw InvalidArgument("Burgers initial data needs a 1D grid");
  const auto psi = initial_potentials(spec, 1);
  if (spec.amplitude == 0.0) return Field(grid);
  return inverse_transform(spectral_partial(sample_spectrum(psi[0], grid), 0));
}

// ---------------------------------------------------------------------------
// Moments and norms

static std::vector<double> magnitude(std::span<const Field> components) {
  if (components.empty()) throw InvalidArgument("empty component set");
  const Grid& g = components.front().grid;
  std::vector<double> mag(g.size(), 0.0);
  for (const auto& c : components) {
    if (!(c.grid == g)) throw InvalidArgument("components live on different grids");
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += c.values[i] * c.values[i];
  }
  for (double& v : mag) v = std::sqrt(v);
  return mag;
}

double boundary_mass_fraction(std::span<const Field> components) {
  const auto mag = magnitude(components);
  const Grid& g = components.front().grid;
  const double edge = 0.9 * g.half_length();
  double total = 0.0, boundary = 0.0;
  g.for_each_node([&](std::size_t i, const std::array<double, 3>& x) {
    total += mag[i];
    if (std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])}) >= edge) boundary += mag[i];
  });
  return total > 0.0 ? boundary / total : 0.0;
}

void require_decay_at_boundary(std::span<const Field> components, double threshold) {
  const double frac = boundary_mass_fraction(components);
  if (frac > threshold)
    {
    std::ostringstream msg;
    msg << "field mass near the box boundary is " << std::scientific << std::setprecision(2) << frac
        << " of the total; enlarge the box";
    throw IllPosed(msg.str());
  }
}

double abs_moment(const Field& f, const MultiIndex& alpha) {
  if (alpha.dim() != f.grid.dim()) throw InvalidArgument("multi-index dimension does not match the grid");
  double s = 0.0;
  f.grid.for_each_node([&](std::size_t i, const std::array<double, 3>& x) {
    double w = 1.0;
    for (int a = 0; a < alpha.dim(); ++a) w *= std::pow(std::abs(x[a]), alpha[a]);
    s += w * std::abs(f.values[i]);
  });
  return s * f.grid.cell_volume();
}

double raw_moment(const Field& f, const MultiIndex& alpha) {
  if (alpha.dim() != f.grid.dim()) throw InvalidArgument("multi-index dimension does not match the grid");
  const int dim = f.grid.dim();
  const int n = f.grid.n();
  // separable weights (-x_a)^alpha_a per axis
  std::array<std::vector<double>, 3> w;
  for (int a = 0; a < 3; ++a) {
    w[a].assign(n, 1.0);
    if (a >= dim) continue;
    for (int i = 0; i < n; ++i) w[a][i] = std::pow(-f.grid.node(i), alpha[a]);
  }
  const int n1 = dim > 1 ? n : 1, n2 = dim > 2 ? n : 1;
  double s = 0.0;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n1; ++i1) {
      const double w01 = w[0][i0] * w[1][dim > 1 ? i1 : 0];
      for (int i2 = 0; i2 < n2; ++i2) s += w01 * w[2][dim > 2 ? i2 : 0] * f.values[idx++];
    }
  return s * f.grid.cell_volume();
}

std::vector<double> moment(const VorticityField& w, const MultiIndex& alpha) {
  require_decay_at_boundary(w.components);
  std::vector<double> out;
  for (const auto& c : w.components) out.push_back(raw_moment(c, alpha));
  return out;
}

double MomentTable::value(const MultiIndex& alpha, int i, int j) const {
  if (i == j) return 0.0;
  auto it = entries.find(alpha);
  if (it == entries.end()) throw InvalidArgument("moment " + alpha.to_string() + " not in table");
  const double v = it->second[pair_index(dim, i, j)];
  return i < j ? v : -v;
}

MomentTable moment_table(const VorticityField& w, int max_order) {
  require_decay_at_boundary(w.components);
  MomentTable t;
  t.dim = w.grid.dim();
  t.max_order = max_order;
  for (const auto& alpha : multi_indices_up_to(t.dim, max_order)) {
    std::vector<double> v;
    for (const auto& c : w.components) v.push_back(raw_moment(c, alpha));
    t.entries[alpha] = std::move(v);
  }
  return t;
}

double weighted_norm(std::span<const Field> components, int k, double q) {
  if (k < 0) throw InvalidArgument("weight exponent must be non-negative");
  require_decay_at_boundary(components);
  const Grid& g = components.front().grid;
  Field weighted(g, magnitude(components));
  if (k > 0)
    g.for_each_node([&](std::size_t i, const std::array<double, 3>& x) {
      weighted.values[i] *= std::pow(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), k);
    });
  return lp_norm(weighted, q);
}

Parity parity_classify(std::span<const Field> components, double tol) {
  double sup = 0.0, r_even = 0.0, r_odd = 0.0;
  for (const auto& f : components) {
    const Field r = reflect(f);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      sup = std::max(sup, std::abs(f.values[i]));
      r_even = std::max(r_even, std::abs(r.values[i] - f.values[i]));
      r_odd = std::max(r_odd, std::abs(r.values[i] + f.values[i]));
    }
  }
  if (r_even <= tol * sup) return Parity::even;
  if (r_odd <= tol * sup) return Parity::odd;
  return Parity::mixed;
}

Parity parity_classify(const Field& f, double tol) { return parity_classify(std::span<const Field>(&f, 1), tol); }

} // namespace nsasym
