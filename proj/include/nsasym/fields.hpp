#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsasym/grid.hpp"
#include "nsasym/multi_index.hpp"

namespace nsasym {

/// Number of independent components of an antisymmetric n x n tensor.
int pair_count(int dim);
/// The (i, j), i < j, stored at position p: (0,1) in 2D; (0,1), (0,2), (1,2) in 3D.
std::pair<int, int> pair_at(int dim, int p);
/// Position of the pair {i, j}, i != j, regardless of order.
int pair_index(int dim, int i, int j);

/// Antisymmetric vorticity tensor; only entries with i < j are stored.
struct VorticityField {
  Grid grid;
  double time = 0.0;
  std::vector<Field> components;

  explicit VorticityField(const Grid& g, double t = 0.0);

  /// omega^{ij} including sign; zero for i == j.
  Field entry(int i, int j) const;
};

struct VelocityField {
  Grid grid;
  double time = 0.0;
  std::vector<Field> components;

  explicit VelocityField(const Grid& g, double t = 0.0);
};

/// psi(x) = sum_a c_a (x - x0)^a exp(-|x - x0|^2 / (2 sigma^2)).
struct GaussPoly {
  int dim = 2;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double sigma = 1.0;
  std::map<MultiIndex, double> coef;

  double operator()(const std::array<double, 3>& x) const;
  GaussPoly derivative(int axis) const;
  GaussPoly operator*(double s) const;
  /// Closed-form integral of (-x)^alpha psi(x) over R^n.
  double moment(const MultiIndex& alpha) const;
  bool empty() const;
};

/// Closed-form integral of y^k exp(-y^2 / (2 sigma^2)) over R.
double gaussian_moment_1d(int k, double sigma);

enum class Recipe { potential_bump, perturbed_bump };
Recipe parse_recipe(const std::string& name);
const char* to_string(Recipe r);

struct InitialDataSpec {
  Recipe recipe = Recipe::perturbed_bump;
  /// Approximate peak speed of the initial velocity. Zero gives zero data.
  double amplitude = 0.05;
  std::uint64_t seed = 1;
  /// Gaussian width sigma of the potentials.
  double width = 1.0;
};

/// Potentials generating the initial data: one scalar stream function in
/// 1D (a = psi') and 2D (a = (d_2 psi, -d_1 psi)), three components of a
/// vector potential in 3D (a = curl psi).
std::vector<GaussPoly> initial_potentials(const InitialDataSpec& spec, int dim);

/// Closed-form velocity a = curl-type derivative of the potentials.
std::vector<GaussPoly> initial_velocity_closed_form(const std::vector<GaussPoly>& potentials, int dim);

/// omega_0^{ij} = d_i a^j - d_j a^i from the potentials, computed with
/// spectral derivatives of the sampled potentials so that the discrete
/// mean vanishes exactly.
VorticityField make_initial_vorticity(const InitialDataSpec& spec, const Grid& grid);

/// Zero-mean 1D initial data a = psi' for the Burgers oracle.
Field make_initial_burgers(const InitialDataSpec& spec, const Grid& grid);

/// Fraction of the discrete L1 mass on nodes with max_i |x_i| >= 0.9 L.
double boundary_mass_fraction(std::span<const Field> components);

inline constexpr double kBoundaryMassThreshold = 1e-10;

/// Throws IllPosed when the boundary mass fraction exceeds threshold.
void require_decay_at_boundary(std::span<const Field> components,
                               double threshold = kBoundaryMassThreshold);

/// h^n sum (-x)^alpha f(x), no boundary check.
double raw_moment(const Field& f, const MultiIndex& alpha);

/// h^n sum |x^alpha f(x)|, the scale against which raw_moment is judged.
double abs_moment(const Field& f, const MultiIndex& alpha);

/// Moment of every stored component, after the boundary-mass check.
std::vector<double> moment(const VorticityField& w, const MultiIndex& alpha);

/// M_alpha^{ij} = int (-y)^alpha omega^{ij}(y) dy for |alpha| <= max_order.
struct MomentTable {
  int dim = 2;
  int max_order = 0;
  std::map<MultiIndex, std::vector<double>> entries;

  /// M_alpha^{ij} with antisymmetric sign; 0 for i == j.
  double value(const MultiIndex& alpha, int i, int j) const;
};

MomentTable moment_table(const VorticityField& w, int max_order);

/// || |x|^k f ||_{L^q} of the pointwise Euclidean length of the components.
double weighted_norm(std::span<const Field> components, int k, double q);

/// Labels the components by comparing f(-x) with f(x) and -f(x) on the
/// symmetric node set: even-type if max|f(-x) - f(x)| <= tol ||f||_inf,
/// else odd-type if max|f(-x) + f(x)| <= tol ||f||_inf, else mixed. The
/// zero field is reported as even-type.
Parity parity_classify(std::span<const Field> components, double tol = 1e-9);
Parity parity_classify(const Field& f, double tol = 1e-9);

} // namespace nsasym
