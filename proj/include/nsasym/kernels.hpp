#pragma once

#include <string>
#include <vector>

#include "nsasym/grid.hpp"
#include "nsasym/multi_index.hpp"

namespace nsasym {

enum class KernelBase { heat, riesz_pair, inverse_gradient };

/// Symbolic kernel d_t^l grad^beta B G(t), where B is the identity, the
/// Riesz pair R^j R^k, or the inverse gradient d_j (-Delta)^{-1}.
struct KernelDescriptor {
  int l = 0;
  MultiIndex beta;
  KernelBase base = KernelBase::heat;
  int j = 0;
  int k = 0;

  static KernelDescriptor heat(int l, const MultiIndex& beta);
  static KernelDescriptor riesz_pair(int l, const MultiIndex& beta, int j, int k);
  static KernelDescriptor inverse_gradient(int l, const MultiIndex& beta, int j);

  /// m such that lambda^{n+m} K(lambda^2 t, lambda x) = K(t, x).
  int scale_order() const;
  Parity parity() const;
  std::string to_string() const;

  /// Fourier symbol factors, evaluated at time t.
  std::vector<Multiplier> multipliers(double t) const;
};

/// G(t,x) = (4 pi t)^{-n/2} exp(-|x|^2 / 4t) at the nodes.
Field heat_kernel(double t, const Grid& grid);

/// Coefficients (constant term first) of p_k in
/// d^k/dz^k exp(-z^2/4) = p_k(z) exp(-z^2/4).
std::vector<double> hermite_factor(int k);

/// d_t^l grad^beta G(t,x), evaluated in closed form: d_t^l = Delta^l, and
/// grad^a G(t,x) = (4 pi)^{-n/2} t^{-(n+|a|)/2} prod_i p_{a_i}(z_i) exp(-|z|^2/4)
/// with z = x / sqrt(t).
Field heat_kernel_derivative(int l, const MultiIndex& beta, double t, const Grid& grid);

/// Same quantity at a single point.
double heat_kernel_derivative_at(int l, const MultiIndex& beta, double t, const std::array<double, 3>& x,
                                 int dim);

/// Discrete spectrum of the periodized kernel: its exact symbol sampled at
/// the grid wavevectors, phase-shifted to the cell-centered nodes. Zero mode
/// of singular symbols and all Nyquist modes are set to 0.
SpectralField composed_kernel_spectrum(const KernelDescriptor& d, double t, const Grid& grid);

/// Inverse transform of composed_kernel_spectrum.
Field composed_kernel(const KernelDescriptor& d, double t, const Grid& grid);

/// Multiplies a half spectrum laid out for grid by the kernel-construction
/// factor (node phase and N^n / (2L)^n), turning a sampled continuous
/// transform into the DFT of the corresponding periodized function.
void apply_node_phase(SpectralField& f);

struct ScalingResidual {
  double absolute = 0.0;
  /// absolute / max |K(t, .)|
  double relative = 0.0;
};

/// max |lambda^{n+m} K(lambda^2 t, lambda x) - K(t, x)| over the nodes of
/// grid, evaluating the left side on grid.scaled(lambda) whose nodes are
/// exactly lambda x.
ScalingResidual kernel_scaling_check(const KernelDescriptor& d, double t, double lambda, const Grid& grid);

} // namespace nsasym
