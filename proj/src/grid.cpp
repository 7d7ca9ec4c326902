#include "nsasym/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>

#include "nsasym/errors.hpp"

namespace nsasym {

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int dim, int n, double half_length) : dim_(dim), n_(n), half_length_(half_length) {
  if (dim < 1 || dim > 3)
    throw InvalidArgument("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
  if (n < 8 || n % 2 != 0)
    throw InvalidArgument("grid points per axis must be even and >= 8, got " + std::to_string(n));
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw InvalidArgument("grid half-length must be positive");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
  spectral_size_ = size_ / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::wavenumber(int m) const { return std::numbers::pi * m / half_length_; }

bool Grid::operator==(const Grid& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && half_length_ == other.half_length_;
}

void Grid::for_each_node(
    const std::function<void(std::size_t, const std::array<double, 3>&)>& fn) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  std::vector<double> nodes(n_);
  for (int j = 0; j < n_; ++j) nodes[j] = node(j);
  std::size_t idx = 0;
  const int n0 = n_, n1 = dim_ > 1 ? n_ : 1, n2 = dim_ > 2 ? n_ : 1;
  for (int i0 = 0; i0 < n0; ++i0) {
    x[0] = nodes[i0];
    for (int i1 = 0; i1 < n1; ++i1) {
      if (dim_ > 1) x[1] = nodes[i1];
      for (int i2 = 0; i2 < n2; ++i2) {
        if (dim_ > 2) x[2] = nodes[i2];
        fn(idx++, x);
      }
    }
  }
}

double default_half_length(double t_end) { return 16.0 * std::sqrt(1.0 + t_end); }

// ---------------------------------------------------------------------------
// Field arithmetic

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw InvalidArgument("field size does not match grid");
}

Field Field::sample(const Grid& g, const std::function<double(const std::array<double, 3>&)>& f) {
  Field out(g);
  g.for_each_node([&](std::size_t i, const std::array<double, 3>& x) { out.values[i] = f(x); });
  return out;
}

double Field::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

static void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidArgument("fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex s) {
  for (Complex& v : values) v *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// Wavevectors

Complex Wavevector::ik_power(const MultiIndex& beta) const {
  Complex out{1.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const int p = beta[a];
    if (p == 0) continue;
    if (nyquist[a] && (p % 2 == 1)) return Complex{};
    const Complex ik{0.0, k[a]};
    for (int r = 0; r < p; ++r) out *= ik;
  }
  return out;
}

void for_each_mode(const Grid& g, const std::function<void(std::size_t, const Wavevector&)>& fn) {
  const int n = g.n();
  const int dim = g.dim();
  const int half = n / 2;
  Wavevector w;
  w.dim = dim;
  auto set_axis = [&](int axis, int i, bool last) {
    int m;
    if (last) {
      m = (i == half) ? -half : i;
    } else {
      m = (i < half) ? i : i - n;
    }
    w.index[axis] = m;
    w.k[axis] = g.wavenumber(m);
    w.nyquist[axis] = (m == -half);
  };
  std::size_t idx = 0;
  if (dim == 1) {
    for (int i0 = 0; i0 <= half; ++i0) {
      set_axis(0, i0, true);
      fn(idx++, w);
    }
  } else if (dim == 2) {
    for (int i0 = 0; i0 < n; ++i0) {
      set_axis(0, i0, false);
      for (int i1 = 0; i1 <= half; ++i1) {
        set_axis(1, i1, true);
        fn(idx++, w);
      }
    }
  } else {
    for (int i0 = 0; i0 < n; ++i0) {
      set_axis(0, i0, false);
      for (int i1 = 0; i1 < n; ++i1) {
        set_axis(1, i1, false);
        for (int i2 = 0; i2 <= half; ++i2) {
          set_axis(2, i2, true);
          fn(idx++, w);
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// FFTW plans, cached per thread and per (dim, N). FFTW_ESTIMATE keeps the
// chosen algorithm, and hence every bit of the output, reproducible.

namespace {

class FftPlan {
public:
  FftPlan(int dim, int n) {
    std::array<int, 3> dims{n, n, n};
    std::size_t real_size = 1;
    for (int a = 0; a < dim; ++a) real_size *= static_cast<std::size_t>(n);
    const std::size_t complex_size = real_size / n * (n / 2 + 1);
    real_ = fftw_alloc_real(real_size);
    spec_ = fftw_alloc_complex(complex_size);
    forward_ = fftw_plan_dft_r2c(dim, dims.data(), real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r(dim, dims.data(), spec_, real_, FFTW_ESTIMATE);
    real_size_ = real_size;
    complex_size_ = complex_size;
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  void forward(const std::vector<double>& in, std::vector<Complex>& out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(forward_);
    out.resize(complex_size_);
    for (std::size_t i = 0; i < complex_size_; ++i) out[i] = Complex(spec_[i][0], spec_[i][1]);
  }

  void backward(const std::vector<Complex>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < complex_size_; ++i) {
      spec_[i][0] = in[i].real();
      spec_[i][1] = in[i].imag();
    }
    fftw_execute(backward_);
    out.resize(real_size_);
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (std::size_t i = 0; i < real_size_; ++i) out[i] = real_[i] * scale;
  }

private:
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
};

FftPlan& plan_for(const Grid& g) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
  auto key = std::make_pair(g.dim(), g.n());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<FftPlan>(g.dim(), g.n())).first;
  return *it->second;
}

} // namespace

SpectralField forward_transform(const Field& f) {
  SpectralField out(f.grid);
  plan_for(f.grid).forward(f.values, out.values);
  return out;
}

Field inverse_transform(const SpectralField& f) {
  Field out(f.grid);
  plan_for(f.grid).backward(f.values, out.values);
  return out;
}

double spectral_l2_norm(const SpectralField& f) {
  const int half = f.grid.n() / 2;
  const int n = f.grid.n();
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const int last = static_cast<int>(i % static_cast<std::size_t>(half + 1));
    const double w = (last == 0 || last == half) ? 1.0 : 2.0;
    s += w * std::norm(f.values[i]);
  }
  (void)n;
  const double count = static_cast<double>(f.grid.size());
  return std::sqrt(f.grid.cell_volume() * s / count);
}

// ---------------------------------------------------------------------------
// Multipliers

Multiplier Multiplier::heat(double t) {
  if (!(t >= 0.0)) throw InvalidArgument("heat multiplier needs t >= 0");
  Multiplier m(Kind::heat);
  m.t_ = t;
  return m;
}

Multiplier Multiplier::derivative(const MultiIndex& beta) {
  Multiplier m(Kind::derivative);
  m.beta_ = beta;
  return m;
}

Multiplier Multiplier::riesz(int j) {
  Multiplier m(Kind::riesz);
  m.j_ = j;
  return m;
}

Multiplier Multiplier::riesz_pair(int j, int k) {
  Multiplier m(Kind::riesz_pair);
  m.j_ = j;
  m.k_ = k;
  return m;
}

Multiplier Multiplier::inverse_gradient(int j) {
  Multiplier m(Kind::inverse_gradient);
  m.j_ = j;
  return m;
}

Multiplier Multiplier::neg_laplacian_power(double power) {
  Multiplier m(Kind::neg_laplacian_power);
  m.power_ = power;
  return m;
}

bool Multiplier::singular() const {
  switch (kind_) {
  case Kind::riesz:
  case Kind::riesz_pair:
  case Kind::inverse_gradient: return true;
  case Kind::neg_laplacian_power: return power_ < 0.0;
  default: return false;
  }
}

Complex Multiplier::operator()(const Wavevector& w) const {
  const double k2 = w.norm2();
  switch (kind_) {
  case Kind::heat: return {std::exp(-t_ * k2), 0.0};
  case Kind::derivative: return w.ik_power(beta_);
  case Kind::riesz: {
    if (w.is_zero() || w.nyquist[j_]) return {};
    return {0.0, w.k[j_] / std::sqrt(k2)};
  }
  case Kind::riesz_pair: {
    if (w.is_zero()) return {};
    if (j_ == k_) return {-w.k[j_] * w.k[j_] / k2, 0.0};
    if (w.nyquist[j_] || w.nyquist[k_]) return {};
    return {-w.k[j_] * w.k[k_] / k2, 0.0};
  }
  case Kind::inverse_gradient: {
    if (w.is_zero() || w.nyquist[j_]) return {};
    return {0.0, w.k[j_] / k2};
  }
  case Kind::neg_laplacian_power: {
    if (power_ == 0.0) return {1.0, 0.0};
    if (w.is_zero()) return {};
    return {std::pow(k2, power_), 0.0};
  }
  }
  return {};
}

static void check_mean_zero(const SpectralField& f, double tol) {
  double total = 0.0;
  const int half = f.grid.n() / 2;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const int last = static_cast<int>(i % static_cast<std::size_t>(half + 1));
    total += ((last == 0 || last == half) ? 1.0 : 2.0) * std::norm(f.values[i]);
  }
  const double mean = std::abs(f.values[0]);
  if (mean > tol * std::sqrt(total))
    throw IllPosed("singular Fourier multiplier applied to a field with nonzero mean");
}

SpectralField apply_multiplier(const SpectralField& f, std::span<const Multiplier> m, double mean_tol) {
  if (std::any_of(m.begin(), m.end(), [](const Multiplier& x) { return x.singular(); }))
    check_mean_zero(f, mean_tol);
  SpectralField out(f.grid);
  for_each_mode(f.grid, [&](std::size_t i, const Wavevector& w) {
    Complex s{1.0, 0.0};
    for (const auto& mult : m) s *= mult(w);
    out.values[i] = s * f.values[i];
  });
  return out;
}

SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m, double mean_tol) {
  return apply_multiplier(f, std::span<const Multiplier>(&m, 1), mean_tol);
}

Field apply_multiplier(const Field& f, std::span<const Multiplier> m, double mean_tol) {
  return inverse_transform(apply_multiplier(forward_transform(f), m, mean_tol));
}

Field apply_multiplier(const Field& f, const Multiplier& m, double mean_tol) {
  return apply_multiplier(f, std::span<const Multiplier>(&m, 1), mean_tol);
}

void dealias_in_place(SpectralField& f) {
  const double cutoff = f.grid.n() / 3.0;
  for_each_mode(f.grid, [&](std::size_t i, const Wavevector& w) {
    for (int a = 0; a < w.dim; ++a) {
      if (std::abs(w.index[a]) > cutoff) {
        f.values[i] = Complex{};
        return;
      }
    }
  });
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  dealias_in_place(out);
  return out;
}

// ---------------------------------------------------------------------------
// Norms and parity

static double lp_from_pointwise(const Grid& g, const std::vector<double>& mag, double q) {
  if (!(q >= 1.0)) throw InvalidArgument("Lebesgue exponent must be >= 1");
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : mag) m = std::max(m, v);
    return m;
  }
  double s = 0.0;
  if (q == 1.0) {
    for (double v : mag) s += v;
    return g.cell_volume() * s;
  }
  if (q == 2.0) {
    for (double v : mag) s += v * v;
    return std::sqrt(g.cell_volume() * s);
  }
  for (double v : mag) s += std::pow(v, q);
  return std::pow(g.cell_volume() * s, 1.0 / q);
}

double lp_norm(const Field& f, double q) {
  std::vector<double> mag(f.values.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(f.values[i]);
  return lp_from_pointwise(f.grid, mag, q);
}

double lp_norm(std::span<const Field> components, double q) {
  if (components.empty()) throw InvalidArgument("lp_norm of an empty component set");
  const Grid& g = components.front().grid;
  std::vector<double> mag(g.size(), 0.0);
  for (const auto& c : components) {
    require_same_grid(g, c.grid);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += c.values[i] * c.values[i];
  }
  for (double& v : mag) v = std::sqrt(v);
  return lp_from_pointwise(g, mag, q);
}

const char* to_string(Parity p) {
  switch (p) {
  case Parity::odd: return "odd-type";
  case Parity::even: return "even-type";
  case Parity::mixed: return "mixed";
  }
  return "mixed";
}

Field reflect(const Field& f) {
  const int n = f.grid.n();
  const int dim = f.grid.dim();
  Field out(f.grid);
  const std::size_t n1 = dim > 1 ? n : 1, n2 = dim > 2 ? n : 1;
  for (std::size_t i0 = 0; i0 < static_cast<std::size_t>(n); ++i0)
    for (std::size_t i1 = 0; i1 < n1; ++i1)
      for (std::size_t i2 = 0; i2 < n2; ++i2) {
        const std::size_t r0 = n - 1 - i0;
        const std::size_t r1 = dim > 1 ? n - 1 - i1 : 0;
        const std::size_t r2 = dim > 2 ? n - 1 - i2 : 0;
        out.values[(i0 * n1 + i1) * n2 + i2] = f.values[(r0 * n1 + r1) * n2 + r2];
      }
  return out;
}

} // namespace nsasym
