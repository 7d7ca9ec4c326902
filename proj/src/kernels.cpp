#include "nsasym/kernels.hpp"

#include <cmath>
#include <numbers>

#include "nsasym/errors.hpp"

namespace nsasym {

KernelDescriptor KernelDescriptor::heat(int l, const MultiIndex& beta) {
  KernelDescriptor d;
  d.l = l;
  d.beta = beta;
  d.base = KernelBase::heat;
  return d;
}

KernelDescriptor KernelDescriptor::riesz_pair(int l, const MultiIndex& beta, int j, int k) {
  KernelDescriptor d = heat(l, beta);
  d.base = KernelBase::riesz_pair;
  d.j = j;
  d.k = k;
  return d;
}

KernelDescriptor KernelDescriptor::inverse_gradient(int l, const MultiIndex& beta, int j) {
  KernelDescriptor d = heat(l, beta);
  d.base = KernelBase::inverse_gradient;
  d.j = j;
  return d;
}

int KernelDescriptor::scale_order() const {
  const int m = 2 * l + beta.order();
  return base == KernelBase::inverse_gradient ? m - 1 : m;
}

Parity KernelDescriptor::parity() const {
  bool odd = beta.order() % 2 == 1;
  if (base == KernelBase::inverse_gradient) odd = !odd;
  return odd ? Parity::odd : Parity::even;
}

std::string KernelDescriptor::to_string() const {
  std::string s = "dt^" + std::to_string(l) + " grad^" + beta.to_string() + " ";
  switch (base) {
  case KernelBase::heat: return s + "G";
  case KernelBase::riesz_pair:
    return s + "R" + std::to_string(j + 1) + "R" + std::to_string(k + 1) + "G";
  case KernelBase::inverse_gradient: return s + "d" + std::to_string(j + 1) + "(-Delta)^-1 G";
  }
  return s;
}

std::vector<Multiplier> KernelDescriptor::multipliers(double t) const {
  std::vector<Multiplier> m{Multiplier::heat(t)};
  if (beta.order() > 0) m.push_back(Multiplier::derivative(beta));
  if (l > 0) m.push_back(Multiplier::neg_laplacian_power(l));
  if (base == KernelBase::riesz_pair) m.push_back(Multiplier::riesz_pair(j, k));
  if (base == KernelBase::inverse_gradient) m.push_back(Multiplier::inverse_gradient(j));
  return m;
}

static void require_positive_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("kernel time must be positive");
}

Field heat_kernel(double t, const Grid& grid) {
  require_positive_time(t);
  const double norm = std::pow(4.0 * std::numbers::pi * t, -0.5 * grid.dim());
  return Field::sample(grid, [&](const std::array<double, 3>& x) {
    return norm * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (4.0 * t));
  });
}

std::vector<double> hermite_factor(int k) {
  if (k < 0) throw InvalidArgument("negative derivative order");
  std::vector<double> p{1.0};
  for (int r = 0; r < k; ++r) {
    // p <- p' - (z/2) p
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) next[i - 1] += static_cast<double>(i) * p[i];
    for (std::size_t i = 0; i < p.size(); ++i) next[i + 1] -= 0.5 * p[i];
    p = std::move(next);
  }
  return p;
}

static double horner(const std::vector<double>& p, double z) {
  double v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * z + *it;
  return v;
}

namespace {

struct HermiteTerm {
  MultiIndex alpha;
  double coef;
};

// d_t^l grad^beta = sum_{|g|=l} l!/g! grad^{beta + 2g}
std::vector<HermiteTerm> hermite_terms(int l, const MultiIndex& beta, int dim) {
  if (l < 0) throw InvalidArgument("negative time-derivative order");
  if (beta.dim() != dim) throw InvalidArgument("multi-index dimension does not match the grid");
  std::vector<HermiteTerm> terms;
  for (const auto& g : multi_indices(dim, l)) terms.push_back({beta + g + g, factorial(l) / g.factorial()});
  return terms;
}

} // namespace

double heat_kernel_derivative_at(int l, const MultiIndex& beta, double t, const std::array<double, 3>& x,
                                 int dim) {
  require_positive_time(t);
  const double st = std::sqrt(t);
  double total = 0.0;
  double gauss = 0.0;
  for (int a = 0; a < dim; ++a) gauss += x[a] * x[a];
  gauss = std::exp(-gauss / (4.0 * t));
  for (const auto& term : hermite_terms(l, beta, dim)) {
    double v = term.coef * std::pow(4.0 * std::numbers::pi, -0.5 * dim) *
               std::pow(t, -0.5 * (dim + term.alpha.order()));
    for (int a = 0; a < dim; ++a) v *= horner(hermite_factor(term.alpha[a]), x[a] / st);
    total += v;
  }
  return total * gauss;
}

Field heat_kernel_derivative(int l, const MultiIndex& beta, double t, const Grid& grid) {
  require_positive_time(t);
  const int dim = grid.dim();
  const int n = grid.n();
  const double st = std::sqrt(t);
  Field out(grid);
  std::vector<double> gauss1d(n);
  for (int i = 0; i < n; ++i) {
    const double z = grid.node(i) / st;
    gauss1d[i] = std::exp(-0.25 * z * z);
  }
  for (const auto& term : hermite_terms(l, beta, dim)) {
    const double scale = term.coef * std::pow(4.0 * std::numbers::pi, -0.5 * dim) *
                         std::pow(t, -0.5 * (dim + term.alpha.order()));
    std::array<std::vector<double>, 3> axis;
    for (int a = 0; a < 3; ++a) {
      axis[a].assign(n, 1.0);
      if (a >= dim) continue;
      const auto p = hermite_factor(term.alpha[a]);
      for (int i = 0; i < n; ++i) axis[a][i] = horner(p, grid.node(i) / st) * gauss1d[i];
    }
    const int n1 = dim > 1 ? n : 1, n2 = dim > 2 ? n : 1;
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1) {
        const double v01 = scale * axis[0][i0] * axis[1][dim > 1 ? i1 : 0];
        for (int i2 = 0; i2 < n2; ++i2) out.values[idx++] += v01 * axis[2][dim > 2 ? i2 : 0];
      }
  }
  return out;
}

void apply_node_phase(SpectralField& f) {
  const Grid& g = f.grid;
  const int n = g.n();
  const double scale = std::pow(n / (2.0 * g.half_length()), g.dim());
  std::vector<Complex> phase(n);
  for (int i = 0; i < n; ++i) {
    const int m = i - n / 2;
    phase[i] = std::polar(1.0, std::numbers::pi * m / n) * ((m % 2 == 0) ? 1.0 : -1.0);
  }
  for_each_mode(g, [&](std::size_t i, const Wavevector& w) {
    if (w.any_nyquist()) {
      f.values[i] = Complex{};
      return;
    }
    Complex p{scale, 0.0};
    for (int a = 0; a < w.dim; ++a) p *= phase[w.index[a] + n / 2];
    f.values[i] *= p;
  });
}

SpectralField composed_kernel_spectrum(const KernelDescriptor& d, double t, const Grid& grid) {
  require_positive_time(t);
  if (d.beta.dim() != grid.dim()) throw InvalidArgument("multi-index dimension does not match the grid");
  if (d.j < 0 || d.j >= grid.dim() || d.k < 0 || d.k >= grid.dim())
    throw InvalidArgument("kernel component index out of range");
  const auto mults = d.multipliers(t);
  const double sign = (d.l % 2 == 0) ? 1.0 : -1.0;
  SpectralField out(grid);
  for_each_mode(grid, [&](std::size_t i, const Wavevector& w) {
    Complex s{sign, 0.0};
    for (const auto& m : mults) s *= m(w);
    out.values[i] = s;
  });
  apply_node_phase(out);
  return out;
}

Field composed_kernel(const KernelDescriptor& d, double t, const Grid& grid) {
  return inverse_transform(composed_kernel_spectrum(d, t, grid));
}

ScalingResidual kernel_scaling_check(const KernelDescriptor& d, double t, double lambda, const Grid& grid) {
  require_positive_time(t);
  if (!(lambda > 0.0)) throw InvalidArgument("scaling factor must be positive");
  const Field base = composed_kernel(d, t, grid);
  const Field scaled = composed_kernel(d, lambda * lambda * t, grid.scaled(lambda));
  const double factor = std::pow(lambda, grid.dim() + d.scale_order());
  ScalingResidual r;
  for (std::size_t i = 0; i < base.values.size(); ++i)
    r.absolute = std::max(r.absolute, std::abs(factor * scaled.values[i] - base.values[i]));
  const double ref = base.max_abs();
  r.relative = ref > 0.0 ? r.absolute / ref : r.absolute;
  return r;
}

} // namespace nsasym
