#pragma once

// Bernstein approximation calculus on cubes and its lift to functionals on
// measures: B_n, the measure discretization chi_n, the lift P_n, the cutoff
// maps and the composed cylindrical approximation.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dk/functional.hpp"
#include "dk/measure.hpp"
#include "dk/smooth_function.hpp"

namespace dk {

inline constexpr int kMaxBernsteinDimension = 2;
inline constexpr int kMaxBernsteinDegree = 64;

/// Tensor Bernstein basis of degree n on a cube [a,b]^d.
///
/// Basis functions are phi_j(x) = prod_k C(n,j_k) t_k^{j_k} (1-t_k)^{n-j_k}
/// with t_k = (x_k - a)/(b - a), so they sum to one on the cube. Multi-indices
/// are flattened with the first coordinate varying fastest.
class BernsteinGrid {
 public:
  BernsteinGrid(Box box, int degree);

  const Box& box() const { return box_; }
  int degree() const { return degree_; }
  int dimension() const { return box_.dimension(); }
  /// (n+1)^d
  std::size_t size() const { return size_; }

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> j) const;
  /// Grid point a^n_j.
  Vec node(std::size_t flat) const;

  /// phi_j(x). Throws if x is outside the box or j is not a valid multi-index.
  double basis(std::span<const int> j, std::span<const double> x) const;
  /// All (n+1)^d basis values at x.
  Vec basis_all(std::span<const double> x) const;
  /// Partial derivative of every basis function at x; orders[k] is the
  /// derivative order in coordinate k.
  Vec basis_all_derivative(std::span<const double> x, std::span<const int> orders) const;
  /// Gradients (size()*d, basis-major) and Laplacians (size()) of every basis function.
  Vec basis_all_gradients(std::span<const double> x) const;
  Vec basis_all_laplacians(std::span<const double> x) const;

 private:
  void check_point(std::span<const double> x) const;
  // 1-d values of d^r/dx^r b_{j,n} for j = 0..n in coordinate k.
  Vec axis_derivative(double xk, int order) const;

  Box box_;
  int degree_;
  std::size_t size_;
};

/// The polynomial B_n(g) = sum_j g(a_j) phi_j with exact derivatives.
class BernsteinPolynomial {
 public:
  BernsteinPolynomial(BernsteinGrid grid, Vec coefficients);

  const BernsteinGrid& grid() const { return grid_; }
  const Vec& coefficients() const { return coefficients_; }

  double value(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return value(x); }
  double derivative(std::span<const double> x, std::span<const int> orders) const;
  Vec gradient(std::span<const double> x) const;
  double laplacian(std::span<const double> x) const;

 private:
  BernsteinGrid grid_;
  Vec coefficients_;
};

using ScalarField = std::function<double(std::span<const double>)>;

/// B_n(g). Throws if g is not finite at some grid point.
BernsteinPolynomial bernstein_operator(const BernsteinGrid& grid, const ScalarField& g);

/// The weights <phi_j, mu> for every grid point (zeros kept).
Vec discretize_weights(const BernsteinGrid& grid, const AtomicMeasure& mu);
/// chi_n(mu) = sum_j <phi_j, mu> delta_{a_j}; grid points with zero weight are dropped.
AtomicMeasure discretize_measure(const BernsteinGrid& grid, const AtomicMeasure& mu);
/// Atomic measure sum_j z_j delta_{a_j} with zero entries dropped.
AtomicMeasure grid_measure(const BernsteinGrid& grid, std::span<const double> z);

/// P_n(F)(mu) = F(chi_n(mu)), a cylindrical functional with coordinates
/// z_j = <phi_j, mu> and outer map u_n^F(z) = F(sum_j z_j delta_{a_j}).
/// Defined for measures supported in the grid's box and points in the box.
class BernsteinLift final : public Functional {
 public:
  BernsteinLift(BernsteinGrid grid, FunctionalPtr base);
  std::string family() const override { return "bernstein_lift"; }

  const BernsteinGrid& grid() const { return grid_; }
  const FunctionalPtr& base() const { return base_; }

  Vec coordinates(const AtomicMeasure& mu) const { return discretize_weights(grid_, mu); }
  double outer(std::span<const double> z) const;

  /// c_j = F'(chi_n(mu); a_j), so that P_n'(F)(mu; .) = sum_j c_j phi_j.
  Vec first_derivative_coefficients(const AtomicMeasure& mu) const;
  /// C_{ji} = F''(chi_n(mu); a_j, a_i), row-major.
  Vec second_derivative_coefficients(const AtomicMeasure& mu) const;
  /// P_n'(F)(mu; .) as a polynomial, i.e. B_n(F'(chi_n(mu); .)).
  BernsteinPolynomial first_derivative_polynomial(const AtomicMeasure& mu) const;

 protected:
  double do_value(const AtomicMeasure& mu) const override;
  double do_first(const AtomicMeasure& mu, std::span<const double> x) const override;
  void do_first_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<double> out) const override;
  double do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const override;
  double do_second(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const override;
  void do_second_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y,
                          std::span<double> out) const override;
  double do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const override;

 private:
  BernsteinGrid grid_;
  FunctionalPtr base_;
};

FunctionalPtr lift_functional(const BernsteinGrid& grid, FunctionalPtr F);

/// theta_psi(mu)(dx) = psi(x) mu(dx); atoms whose new weight is 0 are dropped.
AtomicMeasure cutoff_measure(const SmoothFunction& psi, const AtomicMeasure& mu);

/// Gamma_psi(F)(mu) = F(theta_psi(mu)) for a compactly supported cutoff psi.
/// All derivatives vanish identically at points outside the open support.
class CutoffFunctional final : public Functional {
 public:
  CutoffFunctional(SmoothFunction psi, FunctionalPtr base);
  std::string family() const override { return "cutoff"; }

  const SmoothFunction& cutoff() const { return psi_; }
  const FunctionalPtr& base() const { return base_; }

 protected:
  double do_value(const AtomicMeasure& mu) const override;
  double do_first(const AtomicMeasure& mu, std::span<const double> x) const override;
  void do_first_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<double> out) const override;
  double do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const override;
  double do_second(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const override;
  void do_second_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y,
                          std::span<double> out) const override;
  double do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const override;

 private:
  bool inside(std::span<const double> x) const;

  SmoothFunction psi_;
  Box support_;
  FunctionalPtr base_;
};

FunctionalPtr cutoff_functional(SmoothFunction psi, FunctionalPtr F);

/// psi_n: values in [0,1], 1 on [-n+1, n-1]^d, 0 outside (-n, n)^d, with a
/// unit-width transition so that derivative bounds do not depend on n.
SmoothFunction build_cutoff(int n, int dimension);

/// F_n = Gamma_{psi_n}(P_N(F restricted to K_n)), K_n = [-n, n]^d.
FunctionalPtr cylindrical_approximation(FunctionalPtr F, int stage, int degree);

struct ConvergenceRow {
  int n;
  double sup_err_F;
  double sup_err_F1;
  double sup_err_F2;
  std::size_t samples;
};

/// Max errors of P_n(F), P_n'(F), P_n''(F) against F, F', F'' over a sample
/// of measures (supported in the box) and points (x and all pairs (x, y)).
std::vector<ConvergenceRow> convergence_table(const FunctionalPtr& F, const Box& box, std::span<const int> degrees,
                                              std::span<const AtomicMeasure> measures,
                                              std::span<const Vec> points);

}  // namespace dk
