#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nsasym/multi_index.hpp"

namespace nsasym {

using Complex = std::complex<double>;

/// Periodic, cell-centered discretization of the box [-L, L)^dim.
///
/// Nodes sit at x_j = (j + 1/2 - N/2) h with h = 2L/N, so the node set is
/// mapped onto itself by x -> -x. Wavenumbers are k = (pi/L) m for integer
/// m in [-N/2, N/2).
class Grid {
public:
  Grid(int dim, int n, double half_length);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double half_length() const { return half_length_; }
  double spacing() const { return 2.0 * half_length_ / n_; }
  /// Quadrature weight h^dim.
  double cell_volume() const;

  std::size_t size() const { return size_; }
  /// Number of stored modes in the real-to-complex (half) spectrum.
  std::size_t spectral_size() const { return spectral_size_; }

  double node(int j) const { return (j + 0.5 - 0.5 * n_) * spacing(); }
  double wavenumber(int m) const;

  /// Same node count on a box stretched by lambda; its nodes are lambda * x_j.
  Grid scaled(double lambda) const { return Grid(dim_, n_, lambda * half_length_); }

  bool operator==(const Grid& other) const;

  /// Calls fn(flat_index, x) for every node, x padded with zeros past dim.
  void for_each_node(const std::function<void(std::size_t, const std::array<double, 3>&)>& fn) const;

private:
  int dim_;
  int n_;
  double half_length_;
  std::size_t size_;
  std::size_t spectral_size_;
};

/// Default box half-length for a run ending at t_end: Gaussian tails of
/// the heat kernel are below 1e-12 at the boundary.
double default_half_length(double t_end);

/// Real field sampled at the grid nodes (row-major, axis 0 slowest).
struct Field {
  Grid grid;
  std::vector<double> values;

  explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> v);

  static Field sample(const Grid& g, const std::function<double(const std::array<double, 3>&)>& f);

  double sum() const;
  double max_abs() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Half spectrum produced by the real-to-complex transform. Layout: axes
/// 0..dim-2 full length N, last axis N/2 + 1.
struct SpectralField {
  Grid grid;
  std::vector<Complex> values;

  explicit SpectralField(const Grid& g) : grid(g), values(g.spectral_size(), Complex{}) {}

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator*=(Complex s);
};

/// Wavevector of one stored mode, with flags marking Nyquist components.
struct Wavevector {
  int dim = 0;
  std::array<int, 3> index{0, 0, 0};
  std::array<double, 3> k{0.0, 0.0, 0.0};
  std::array<bool, 3> nyquist{false, false, false};

  double norm2() const { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }
  bool is_zero() const { return index[0] == 0 && index[1] == 0 && index[2] == 0; }
  bool any_nyquist() const { return nyquist[0] || nyquist[1] || nyquist[2]; }
  /// (i k)^beta, zero if beta is odd along an axis sitting at Nyquist.
  Complex ik_power(const MultiIndex& beta) const;
};

/// Calls fn(flat_spectral_index, wavevector) for every stored mode.
void for_each_mode(const Grid& g, const std::function<void(std::size_t, const Wavevector&)>& fn);

SpectralField forward_transform(const Field& f);
Field inverse_transform(const SpectralField& f);

/// Discrete L2 norm computed from the spectrum (Parseval).
double spectral_l2_norm(const SpectralField& f);

/// Fourier multiplier. Kinds with a |xi|^-p singularity at the origin set
/// the zero-mode coefficient to 0 and require mean-zero input.
class Multiplier {
public:
  enum class Kind { heat, derivative, riesz, riesz_pair, inverse_gradient, neg_laplacian_power };

  static Multiplier heat(double t);
  static Multiplier derivative(const MultiIndex& beta);
  static Multiplier riesz(int j);
  static Multiplier riesz_pair(int j, int k);
  static Multiplier inverse_gradient(int j);
  /// (-Delta)^power, i.e. |xi|^{2 power}; negative powers are singular.
  static Multiplier neg_laplacian_power(double power);

  Kind kind() const { return kind_; }
  bool singular() const;
  Complex operator()(const Wavevector& w) const;

private:
  Multiplier(Kind kind) : kind_(kind) {}
  Kind kind_;
  double t_ = 0.0;
  double power_ = 0.0;
  MultiIndex beta_;
  int j_ = 0;
  int k_ = 0;
};

/// Default relative tolerance for the mean-zero precondition of singular
/// multipliers.
inline constexpr double kMeanZeroTolerance = 1e-8;

/// Pointwise product of the spectrum with the multipliers, in the caller's
/// representation. Throws IllPosed when a singular multiplier meets a field
/// with nonzero mean.
Field apply_multiplier(const Field& f, std::span<const Multiplier> m, double mean_tol = kMeanZeroTolerance);
Field apply_multiplier(const Field& f, const Multiplier& m, double mean_tol = kMeanZeroTolerance);
SpectralField apply_multiplier(const SpectralField& f, std::span<const Multiplier> m,
                               double mean_tol = kMeanZeroTolerance);
SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m,
                               double mean_tol = kMeanZeroTolerance);

/// 2/3-rule truncation: zero every mode with some |m_i| > N/3.
SpectralField dealias(const SpectralField& f);
void dealias_in_place(SpectralField& f);

/// h^{n/q} (sum |f|^q)^{1/q}; q = infinity gives max |f|.
double lp_norm(const Field& f, double q);
/// Same norm of the pointwise Euclidean length of a vector/tensor field.
double lp_norm(std::span<const Field> components, double q);

enum class Parity { odd, even, mixed };
const char* to_string(Parity p);

/// f(-x) on the node set.
Field reflect(const Field& f);

} // namespace nsasym
