#pragma once

// Closed-form catalog of test functions with exact gradient and Laplacian.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dk/measure.hpp"

namespace dk {

enum class SmoothKind {
  constant,              // c
  gaussian_bump,         // A exp(-|x-c|^2 / (2 w^2))
  cosine_wave,           // A cos(k.x + theta)
  compact_bump_product,  // A prod_k h((x_k - c_k) / r_k),  h(t) = exp(1 - 1/(1-t^2)) on |t|<1
  plateau_product,       // prod_k p(x_k): 1 on |x_k| <= inner, 0 on |x_k| >= outer
  affine,                // c + a.x          (unbounded)
  quadratic,             // A |x - c|^2      (unbounded)
};

std::string_view to_string(SmoothKind kind);
std::optional<SmoothKind> smooth_kind_from_string(std::string_view name);

/// A catalog test function on R^d. Immutable value type.
///
/// The bounded kinds are C_b^infinity. `affine` and `quadratic` are not
/// bounded; they exist as local surrogates for which Ito expansions are exact
/// (their bounds report +infinity).
class SmoothFunction {
 public:
  static SmoothFunction constant(int dimension, double value);
  static SmoothFunction gaussian_bump(Vec center, double width, double amplitude = 1.0);
  static SmoothFunction cosine_wave(Vec wavevector, double amplitude = 1.0, double phase = 0.0);
  static SmoothFunction compact_bump_product(Vec center, Vec radii, double amplitude = 1.0);
  /// Smooth plateau: 1 on [-inner, inner]^d, 0 outside (-outer, outer)^d.
  static SmoothFunction plateau_product(int dimension, double inner, double outer);
  static SmoothFunction affine(Vec slope, double offset = 0.0);
  static SmoothFunction quadratic(Vec center, double scale = 1.0);

  SmoothKind kind() const { return kind_; }
  int dimension() const { return dimension_; }

  double eval(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return eval(x); }
  void gradient(std::span<const double> x, std::span<double> out) const;
  Vec gradient(std::span<const double> x) const;
  double laplacian(std::span<const double> x) const;

  /// sup |phi|, sup |grad phi|, sup |Laplacian phi| over R^d.
  double bound() const;
  double gradient_bound() const;
  double laplacian_bound() const;

  /// Closed box outside of which phi and all its derivatives vanish.
  std::optional<Box> support() const;
  /// phi(x) == phi(-x), decided from the parameters.
  bool is_even() const;

  // Parameter access (meaning depends on kind).
  double amplitude() const { return amplitude_; }
  const Vec& center() const { return center_; }
  const Vec& scales() const { return scales_; }
  const Vec& wavevector() const { return wavevector_; }
  double phase() const { return phase_; }
  double inner() const { return inner_; }
  double outer() const { return outer_; }

 private:
  SmoothFunction(SmoothKind kind, int dimension);
  void check(std::span<const double> x) const;

  SmoothKind kind_;
  int dimension_;
  double amplitude_ = 1.0;  // also: constant value, affine offset, quadratic scale
  Vec center_;              // gaussian/bump/quadratic center
  Vec scales_;              // gaussian width (size 1) or bump radii
  Vec wavevector_;          // cosine wavevector or affine slope
  double phase_ = 0.0;
  double inner_ = 0.0;
  double outer_ = 0.0;
};

namespace profile {

/// h(t) = exp(1 - 1/(1 - t^2)) on |t| < 1, else 0, with derivatives.
struct Jet {
  double value;
  double d1;
  double d2;
};
Jet bump(double t);
/// Smooth step S(u): 0 for u <= 0, 1 for u >= 1, C^infinity in between.
Jet smooth_step(double u);
/// One-dimensional plateau p(s): 1 on |s| <= inner, 0 on |s| >= outer.
Jet plateau(double s, double inner, double outer);

double bump_d1_bound();
double bump_d2_bound();
double step_d1_bound();
double step_d2_bound();

}  // namespace profile

}  // namespace dk
