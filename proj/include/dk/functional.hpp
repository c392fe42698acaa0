#pragma once

// Functionals on finite measures with first and second functional
// derivatives, plus the difference-quotient oracles that check them.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dk/measure.hpp"
#include "dk/smooth_function.hpp"

namespace dk {

/// Membership tag for C^{k,m}_b: k measure derivatives, m spatial ones.
struct Smoothness {
  int k = 2;
  int m = 2;
};

/// Smooth map f: R^p -> R with exact gradient and Hessian, used as the outer
/// map of cylindrical functionals f(<phi_1,mu>, ..., <phi_p,mu>).
class OuterMap {
 public:
  enum class Kind { linear, quadratic, saturated_quadratic, product };

  /// Univariate factor of a product map.
  struct Factor {
    enum class Kind { linear, sine, tanh } kind = Kind::linear;
    double a = 1.0;  // slope, or amplitude for sine/tanh
    double b = 0.0;  // intercept, or frequency for sine/tanh
    double c = 0.0;  // phase for sine

    double value(double z) const;
    double d1(double z) const;
    double d2(double z) const;
    /// sup of |value|, |d1| over |z| <= r.
    double value_bound(double r) const;
    double d1_bound(double r) const;
  };

  /// c + a.z
  static OuterMap linear(Vec a, double c = 0.0);
  /// c + a.z + z^T Q z, Q given row-major (p x p) and symmetrized.
  static OuterMap quadratic(Vec Q, Vec a, double c = 0.0);
  /// s * tanh(q(z) / s) with q the quadratic above.
  static OuterMap saturated_quadratic(Vec Q, Vec a, double c, double saturation);
  /// prod_i g_i(z_i)
  static OuterMap product(std::vector<Factor> factors);

  Kind kind() const { return kind_; }
  int arity() const { return arity_; }

  double value(std::span<const double> z) const;
  Vec gradient(std::span<const double> z) const;
  /// Row-major p x p Hessian.
  Vec hessian(std::span<const double> z) const;
  /// Componentwise bound on |grad f| over the box |z_i| <= radius[i].
  Vec gradient_bound(std::span<const double> radius) const;

  const Vec& quadratic_form() const { return Q_; }
  const Vec& linear_part() const { return a_; }
  double constant_part() const { return c_; }
  double saturation() const { return saturation_; }
  const std::vector<Factor>& factors() const { return factors_; }

 private:
  OuterMap(Kind kind, int arity) : kind_(kind), arity_(arity) {}
  double q(std::span<const double> z) const;
  Vec q_gradient(std::span<const double> z) const;

  Kind kind_;
  int arity_;
  Vec Q_;
  Vec a_;
  double c_ = 0.0;
  double saturation_ = 1.0;
  std::vector<Factor> factors_;
};

/// A functional F on M_F(R^d).
///
/// The public entry points validate dimensions and the smoothness tag, then
/// forward to the family implementation. Every second derivative exposed here
/// is symmetric in (x, y).
class Functional {
 public:
  Functional(int dimension, Smoothness smoothness);
  virtual ~Functional() = default;

  int dimension() const { return dimension_; }
  Smoothness smoothness() const { return smoothness_; }
  virtual std::string family() const = 0;

  double value(const AtomicMeasure& mu) const;

  /// dF/dmu(x) and its spatial gradient / Laplacian in x.
  double first_derivative(const AtomicMeasure& mu, std::span<const double> x) const;
  void first_derivative_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<double> out) const;
  Vec first_derivative_gradient(const AtomicMeasure& mu, std::span<const double> x) const;
  double first_derivative_laplacian(const AtomicMeasure& mu, std::span<const double> x) const;
  /// Gradients at many points (flat, point-major); shares per-measure work.
  void first_derivative_gradients(const AtomicMeasure& mu, std::span<const double> points, std::span<double> out) const;

  /// d^2F/dmu^2(x, y), its gradient in x, and grad_x . grad_y of it at y = x.
  double second_derivative(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const;
  Vec second_derivative_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const;
  double mixed_divergence_at_diagonal(const AtomicMeasure& mu, std::span<const double> x) const;

  /// Bound on |dF/dmu(x)| over N_C x R^d, when the family can certify one.
  virtual std::optional<double> first_derivative_bound(double mass_bound) const;

 protected:
  virtual double do_value(const AtomicMeasure& mu) const = 0;
  virtual double do_first(const AtomicMeasure& mu, std::span<const double> x) const = 0;
  virtual void do_first_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<double> out) const = 0;
  virtual double do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const = 0;
  virtual void do_first_gradients(const AtomicMeasure& mu, std::span<const double> points, std::span<double> out) const;
  virtual double do_second(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const = 0;
  virtual void do_second_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y,
                                  std::span<double> out) const = 0;
  virtual double do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const = 0;

 private:
  void check_measure(const AtomicMeasure& mu) const;
  void check_point(std::span<const double> x) const;
  void require_order(int k, const char* what) const;

  int dimension_;
  Smoothness smoothness_;
};

using FunctionalPtr = std::shared_ptr<const Functional>;

/// F(mu) = c for every mu. family() is "zero" when c == 0.
class ConstantFunctional final : public Functional {
 public:
  ConstantFunctional(int dimension, double value);
  std::string family() const override { return value_ == 0.0 ? "zero" : "constant"; }
  double constant() const { return value_; }
  std::optional<double> first_derivative_bound(double) const override { return 0.0; }

 protected:
  double do_value(const AtomicMeasure&) const override { return value_; }
  double do_first(const AtomicMeasure&, std::span<const double>) const override { return 0.0; }
  void do_first_gradient(const AtomicMeasure&, std::span<const double>, std::span<double> out) const override;
  double do_first_laplacian(const AtomicMeasure&, std::span<const double>) const override { return 0.0; }
  double do_second(const AtomicMeasure&, std::span<const double>, std::span<const double>) const override { return 0.0; }
  void do_second_gradient(const AtomicMeasure&, std::span<const double>, std::span<const double>,
                          std::span<double> out) const override;
  double do_mixed_divergence(const AtomicMeasure&, std::span<const double>) const override { return 0.0; }

 private:
  double value_;
};

/// F(mu) = 1/2 iint V1(x-y) mu(dx) mu(dy) + int V2 dmu, V1 even.
/// The double sum over atoms includes the diagonal i == j.
class InteractionFunctional final : public Functional {
 public:
  InteractionFunctional(SmoothFunction v1, SmoothFunction v2, Smoothness smoothness = {});
  std::string family() const override { return "interaction"; }
  const SmoothFunction& pair_potential() const { return v1_; }
  const SmoothFunction& external_potential() const { return v2_; }
  std::optional<double> first_derivative_bound(double mass_bound) const override;

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
  SmoothFunction v1_;
  SmoothFunction v2_;
};

/// G(mu) = f(<phi_1,mu>, ..., <phi_p,mu>).
class CylindricalFunctional final : public Functional {
 public:
  CylindricalFunctional(OuterMap outer, std::vector<SmoothFunction> inner, Smoothness smoothness = {});
  std::string family() const override { return "cylindrical"; }
  const OuterMap& outer() const { return outer_; }
  const std::vector<SmoothFunction>& inner() const { return inner_; }
  /// z_i = <phi_i, mu>.
  Vec coordinates(const AtomicMeasure& mu) const;
  std::optional<double> first_derivative_bound(double mass_bound) const override;

 protected:
  double do_value(const AtomicMeasure& mu) const override;
  double do_first(const AtomicMeasure& mu, std::span<const double> x) const override;
  void do_first_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<double> out) const override;
  double do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const override;
  void do_first_gradients(const AtomicMeasure& mu, std::span<const double> points, std::span<double> out) const override;
  double do_second(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const override;
  void do_second_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y,
                          std::span<double> out) const override;
  double do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const override;

 private:
  OuterMap outer_;
  std::vector<SmoothFunction> inner_;
};

/// (F + G)(mu) = F(mu) + G(mu); every derivative adds.
class SumFunctional final : public Functional {
 public:
  SumFunctional(FunctionalPtr f, FunctionalPtr g);
  std::string family() const override { return "sum"; }
  const FunctionalPtr& first() const { return f_; }
  const FunctionalPtr& second() const { return g_; }
  std::optional<double> first_derivative_bound(double mass_bound) const override;

 protected:
  double do_value(const AtomicMeasure& mu) const override;
  double do_first(const AtomicMeasure& mu, std::span<const double> x) const override;
  void do_first_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<double> out) const override;
  double do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const override;
  void do_first_gradients(const AtomicMeasure& mu, std::span<const double> points, std::span<double> out) const override;
  double do_second(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const override;
  void do_second_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y,
                          std::span<double> out) const override;
  double do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const override;

 private:
  FunctionalPtr f_;
  FunctionalPtr g_;
};

FunctionalPtr make_zero(int dimension);
FunctionalPtr make_constant(int dimension, double value);
FunctionalPtr make_interaction(SmoothFunction v1, SmoothFunction v2);
FunctionalPtr make_cylindrical(OuterMap outer, std::vector<SmoothFunction> inner);
FunctionalPtr make_sum(FunctionalPtr f, FunctionalPtr g);

// Difference-quotient oracles for the defining limits of dF/dmu, d^2F/dmu^2.

/// (F(mu + eps delta_x) - F(mu)) / eps.
double fd_first_derivative(const Functional& F, const AtomicMeasure& mu, std::span<const double> x, double eps);
/// (F(mu+eps dx+eps dy) - F(mu+eps dx) - F(mu+eps dy) + F(mu)) / eps^2.
double fd_second_derivative(const Functional& F, const AtomicMeasure& mu, std::span<const double> x,
                            std::span<const double> y, double eps);
/// Richardson-extrapolated one-sided quotient using steps eps, eps/2, ...,
/// eps/2^(levels-1); removes the O(eps^j) terms for j < levels.
double richardson_first_derivative(const Functional& F, const AtomicMeasure& mu, std::span<const double> x,
                                   double eps, int levels = 3);

}  // namespace dk
