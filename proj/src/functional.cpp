#include "dk/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dk {

// ---------------------------------------------------------------- OuterMap

double OuterMap::Factor::value(double z) const {
  switch (kind) {
    case Kind::linear: return a * z + b;
    case Kind::sine: return a * std::sin(b * z + c);
    case Kind::tanh: return a * std::tanh(b * z);
  }
  return 0.0;
}

double OuterMap::Factor::d1(double z) const {
  switch (kind) {
    case Kind::linear: return a;
    case Kind::sine: return a * b * std::cos(b * z + c);
    case Kind::tanh: {
      const double t = std::tanh(b * z);
      return a * b * (1.0 - t * t);
    }
  }
  return 0.0;
}

double OuterMap::Factor::d2(double z) const {
  switch (kind) {
    case Kind::linear: return 0.0;
    case Kind::sine: return -a * b * b * std::sin(b * z + c);
    case Kind::tanh: {
      const double t = std::tanh(b * z);
      return -2.0 * a * b * b * t * (1.0 - t * t);
    }
  }
  return 0.0;
}

double OuterMap::Factor::value_bound(double r) const {
  switch (kind) {
    case Kind::linear: return std::abs(a) * r + std::abs(b);
    case Kind::sine:
    case Kind::tanh: return std::abs(a);
  }
  return std::numeric_limits<double>::infinity();
}

double OuterMap::Factor::d1_bound(double) const {
  switch (kind) {
    case Kind::linear: return std::abs(a);
    case Kind::sine:
    case Kind::tanh: return std::abs(a * b);
  }
  return std::numeric_limits<double>::infinity();
}

OuterMap OuterMap::linear(Vec a, double c) {
  if (a.empty()) throw std::invalid_argument("OuterMap::linear: need at least one coordinate");
  OuterMap f(Kind::linear, static_cast<int>(a.size()));
  f.a_ = std::move(a);
  f.c_ = c;
  return f;
}

OuterMap OuterMap::quadratic(Vec Q, Vec a, double c) {
  const std::size_t p = a.size();
  if (p == 0) throw std::invalid_argument("OuterMap::quadratic: need at least one coordinate");
  if (Q.size() != p * p) throw std::invalid_argument("OuterMap::quadratic: Q must be p x p with p = len(a)");
  OuterMap f(Kind::quadratic, static_cast<int>(p));
  f.Q_.assign(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) f.Q_[i * p + j] = 0.5 * (Q[i * p + j] + Q[j * p + i]);
  f.a_ = std::move(a);
  f.c_ = c;
  return f;
}

OuterMap OuterMap::saturated_quadratic(Vec Q, Vec a, double c, double saturation) {
  if (!(saturation > 0.0)) throw std::invalid_argument("OuterMap::saturated_quadratic: saturation must be > 0");
  OuterMap f = quadratic(std::move(Q), std::move(a), c);
  f.kind_ = Kind::saturated_quadratic;
  f.saturation_ = saturation;
  return f;
}

OuterMap OuterMap::product(std::vector<Factor> factors) {
  if (factors.empty()) throw std::invalid_argument("OuterMap::product: need at least one factor");
  OuterMap f(Kind::product, static_cast<int>(factors.size()));
  f.factors_ = std::move(factors);
  return f;
}

double OuterMap::q(std::span<const double> z) const {
  const std::size_t p = a_.size();
  double v = c_;
  for (std::size_t i = 0; i < p; ++i) {
    v += a_[i] * z[i];
    for (std::size_t j = 0; j < p; ++j) v += z[i] * Q_[i * p + j] * z[j];
  }
  return v;
}

Vec OuterMap::q_gradient(std::span<const double> z) const {
  const std::size_t p = a_.size();
  Vec g(a_);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) g[i] += 2.0 * Q_[i * p + j] * z[j];
  return g;
}

double OuterMap::value(std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(arity_)) throw std::invalid_argument("OuterMap: wrong arity");
  switch (kind_) {
    case Kind::linear: {
      double v = c_;
      for (std::size_t i = 0; i < z.size(); ++i) v += a_[i] * z[i];
      return v;
    }
    case Kind::quadratic: return q(z);
    case Kind::saturated_quadratic: return saturation_ * std::tanh(q(z) / saturation_);
    case Kind::product: {
      double v = 1.0;
      for (std::size_t i = 0; i < z.size(); ++i) v *= factors_[i].value(z[i]);
      return v;
    }
  }
  return 0.0;
}

Vec OuterMap::gradient(std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(arity_)) throw std::invalid_argument("OuterMap: wrong arity");
  const std::size_t p = z.size();
  switch (kind_) {
    case Kind::linear: return a_;
    case Kind::quadratic: return q_gradient(z);
    case Kind::saturated_quadratic: {
      const double t = std::tanh(q(z) / saturation_);
      Vec g = q_gradient(z);
      for (double& gi : g) gi *= 1.0 - t * t;
      return g;
    }
    case Kind::product: {
      Vec g(p);
      for (std::size_t i = 0; i < p; ++i) {
        double v = factors_[i].d1(z[i]);
        for (std::size_t j = 0; j < p; ++j)
          if (j != i) v *= factors_[j].value(z[j]);
        g[i] = v;
      }
      return g;
    }
  }
  return {};
}

Vec OuterMap::hessian(std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(arity_)) throw std::invalid_argument("OuterMap: wrong arity");
  const std::size_t p = z.size();
  Vec h(p * p, 0.0);
  switch (kind_) {
    case Kind::linear: return h;
    case Kind::quadratic:
      for (std::size_t i = 0; i < p * p; ++i) h[i] = 2.0 * Q_[i];
      return h;
    case Kind::saturated_quadratic: {
      const double t = std::tanh(q(z) / saturation_);
      const double sech2 = 1.0 - t * t;
      const Vec g = q_gradient(z);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
          h[i * p + j] = sech2 * 2.0 * Q_[i * p + j] - 2.0 / saturation_ * t * sech2 * g[i] * g[j];
      return h;
    }
    case Kind::product:
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
          double v = i == j ? factors_[i].d2(z[i]) : factors_[i].d1(z[i]) * factors_[j].d1(z[j]);
          for (std::size_t l = 0; l < p; ++l)
            if (l != i && l != j) v *= factors_[l].value(z[l]);
          h[i * p + j] = v;
        }
      }
      return h;
  }
  return h;
}

Vec OuterMap::gradient_bound(std::span<const double> radius) const {
  if (radius.size() != static_cast<std::size_t>(arity_)) throw std::invalid_argument("OuterMap: wrong arity");
  const std::size_t p = radius.size();
  Vec b(p, 0.0);
  switch (kind_) {
    case Kind::linear:
      for (std::size_t i = 0; i < p; ++i) b[i] = std::abs(a_[i]);
      return b;
    case Kind::quadratic:
    case Kind::saturated_quadratic:
      // sech^2 <= 1, so the quadratic's bound also covers the saturated map.
      for (std::size_t i = 0; i < p; ++i) {
        b[i] = std::abs(a_[i]);
        for (std::size_t j = 0; j < p; ++j) b[i] += 2.0 * std::abs(Q_[i * p + j]) * radius[j];
      }
      return b;
    case Kind::product:
      for (std::size_t i = 0; i < p; ++i) {
        double v = factors_[i].d1_bound(radius[i]);
        for (std::size_t j = 0; j < p; ++j)
          if (j != i) v *= factors_[j].value_bound(radius[j]);
        b[i] = v;
      }
      return b;
  }
  return b;
}

// -------------------------------------------------------------- Functional

Functional::Functional(int dimension, Smoothness smoothness) : dimension_(dimension), smoothness_(smoothness) {
  if (dimension < 1) throw std::invalid_argument("Functional: dimension must be >= 1");
  if (smoothness.k < 0 || smoothness.k > 2) throw std::invalid_argument("Functional: k must be in {0,1,2}");
}

void Functional::check_measure(const AtomicMeasure& mu) const {
  if (mu.dimension() != dimension_)
    throw std::invalid_argument(family() + " functional: measure dimension " + std::to_string(mu.dimension()) +
                                " != " + std::to_string(dimension_));
}

void Functional::check_point(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension_))
    throw std::invalid_argument(family() + " functional: point dimension " + std::to_string(x.size()) +
                                " != " + std::to_string(dimension_));
}

void Functional::require_order(int k, const char* what) const {
  if (smoothness_.k < k)
    throw std::domain_error(family() + " functional tagged C^{" + std::to_string(smoothness_.k) +
                            "}: " + what + " requires k >= " + std::to_string(k));
}

double Functional::value(const AtomicMeasure& mu) const {
  check_measure(mu);
  return do_value(mu);
}

double Functional::first_derivative(const AtomicMeasure& mu, std::span<const double> x) const {
  require_order(1, "first_derivative");
  check_measure(mu);
  check_point(x);
  return do_first(mu, x);
}

void Functional::first_derivative_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                           std::span<double> out) const {
  require_order(1, "first_derivative_gradient");
  check_measure(mu);
  check_point(x);
  if (out.size() != x.size()) throw std::invalid_argument("first_derivative_gradient: output has wrong size");
  do_first_gradient(mu, x, out);
}

Vec Functional::first_derivative_gradient(const AtomicMeasure& mu, std::span<const double> x) const {
  Vec out(x.size());
  first_derivative_gradient(mu, x, out);
  return out;
}

double Functional::first_derivative_laplacian(const AtomicMeasure& mu, std::span<const double> x) const {
  require_order(1, "first_derivative_laplacian");
  check_measure(mu);
  check_point(x);
  return do_first_laplacian(mu, x);
}

void Functional::first_derivative_gradients(const AtomicMeasure& mu, std::span<const double> points,
                                            std::span<double> out) const {
  require_order(1, "first_derivative_gradients");
  check_measure(mu);
  if (points.size() % static_cast<std::size_t>(dimension_) != 0 || out.size() != points.size())
    throw std::invalid_argument("first_derivative_gradients: inconsistent buffer sizes");
  do_first_gradients(mu, points, out);
}

void Functional::do_first_gradients(const AtomicMeasure& mu, std::span<const double> points,
                                    std::span<double> out) const {
  const auto d = static_cast<std::size_t>(dimension_);
  for (std::size_t i = 0; i * d < points.size(); ++i)
    do_first_gradient(mu, points.subspan(i * d, d), out.subspan(i * d, d));
}

double Functional::second_derivative(const AtomicMeasure& mu, std::span<const double> x,
                                     std::span<const double> y) const {
  require_order(2, "second_derivative");
  check_measure(mu);
  check_point(x);
  check_point(y);
  return do_second(mu, x, y);
}

Vec Functional::second_derivative_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                           std::span<const double> y) const {
  require_order(2, "second_derivative_gradient");
  check_measure(mu);
  check_point(x);
  check_point(y);
  Vec out(x.size());
  do_second_gradient(mu, x, y, out);
  return out;
}

double Functional::mixed_divergence_at_diagonal(const AtomicMeasure& mu, std::span<const double> x) const {
  require_order(2, "mixed_divergence_at_diagonal");
  check_measure(mu);
  check_point(x);
  return do_mixed_divergence(mu, x);
}

std::optional<double> Functional::first_derivative_bound(double) const { return std::nullopt; }

// --------------------------------------------------------------- families

ConstantFunctional::ConstantFunctional(int dimension, double value)
    : Functional(dimension, Smoothness{2, std::numeric_limits<int>::max()}), value_(value) {}

void ConstantFunctional::do_first_gradient(const AtomicMeasure&, std::span<const double>,
                                           std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

void ConstantFunctional::do_second_gradient(const AtomicMeasure&, std::span<const double>, std::span<const double>,
                                            std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

InteractionFunctional::InteractionFunctional(SmoothFunction v1, SmoothFunction v2, Smoothness smoothness)
    : Functional(v1.dimension(), smoothness), v1_(std::move(v1)), v2_(std::move(v2)) {
  if (v2_.dimension() != v1_.dimension())
    throw std::invalid_argument("InteractionFunctional: V1 and V2 dimensions differ");
  if (!v1_.is_even()) throw std::invalid_argument("InteractionFunctional: V1 must be even, V1(x) = V1(-x)");
}

double InteractionFunctional::do_value(const AtomicMeasure& mu) const {
  const auto d = static_cast<std::size_t>(dimension());
  Vec diff(d);
  double pair = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto xi = mu.location(i);
    double row = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const auto xj = mu.location(j);
      for (std::size_t k = 0; k < d; ++k) diff[k] = xi[k] - xj[k];
      row += mu.weight(j) * v1_.eval(diff);
    }
    pair += mu.weight(i) * row;
  }
  return 0.5 * pair + integrate(v2_, mu);
}

double InteractionFunctional::do_first(const AtomicMeasure& mu, std::span<const double> x) const {
  const auto d = x.size();
  Vec diff(d);
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const auto y = mu.location(j);
    for (std::size_t k = 0; k < d; ++k) diff[k] = x[k] - y[k];
    s += mu.weight(j) * v1_.eval(diff);
  }
  return s + v2_.eval(x);
}

void InteractionFunctional::do_first_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                              std::span<double> out) const {
  const auto d = x.size();
  Vec diff(d), g(d);
  v2_.gradient(x, out);
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const auto y = mu.location(j);
    for (std::size_t k = 0; k < d; ++k) diff[k] = x[k] - y[k];
    v1_.gradient(diff, g);
    for (std::size_t k = 0; k < d; ++k) out[k] += mu.weight(j) * g[k];
  }
}

double InteractionFunctional::do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const {
  const auto d = x.size();
  Vec diff(d);
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const auto y = mu.location(j);
    for (std::size_t k = 0; k < d; ++k) diff[k] = x[k] - y[k];
    s += mu.weight(j) * v1_.laplacian(diff);
  }
  return s + v2_.laplacian(x);
}

double InteractionFunctional::do_second(const AtomicMeasure&, std::span<const double> x,
                                        std::span<const double> y) const {
  Vec diff(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - y[k];
  return v1_.eval(diff);
}

void InteractionFunctional::do_second_gradient(const AtomicMeasure&, std::span<const double> x,
                                               std::span<const double> y, std::span<double> out) const {
  Vec diff(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - y[k];
  v1_.gradient(diff, out);
}

double InteractionFunctional::do_mixed_divergence(const AtomicMeasure&, std::span<const double> x) const {
  // grad_x . grad_y V1(x - y) = -Laplacian V1(x - y); at y = x this is -Laplacian V1(0).
  const Vec zero(x.size(), 0.0);
  return -v1_.laplacian(zero);
}

std::optional<double> InteractionFunctional::first_derivative_bound(double mass_bound) const {
  const double b = mass_bound * v1_.bound() + v2_.bound();
  if (!std::isfinite(b)) return std::nullopt;
  return b;
}

CylindricalFunctional::CylindricalFunctional(OuterMap outer, std::vector<SmoothFunction> inner,
                                             Smoothness smoothness)
    : Functional(inner.empty() ? 1 : inner.front().dimension(), smoothness),
      outer_(std::move(outer)),
      inner_(std::move(inner)) {
  if (inner_.empty()) throw std::invalid_argument("CylindricalFunctional: need at least one inner function");
  if (static_cast<int>(inner_.size()) != outer_.arity())
    throw std::invalid_argument("CylindricalFunctional: outer arity " + std::to_string(outer_.arity()) +
                                " != number of inner functions " + std::to_string(inner_.size()));
  for (const auto& phi : inner_) {
    if (phi.dimension() != dimension())
      throw std::invalid_argument("CylindricalFunctional: inner functions must share one dimension");
  }
}

Vec CylindricalFunctional::coordinates(const AtomicMeasure& mu) const {
  Vec z(inner_.size());
  for (std::size_t i = 0; i < inner_.size(); ++i) z[i] = integrate(inner_[i], mu);
  return z;
}

double CylindricalFunctional::do_value(const AtomicMeasure& mu) const { return outer_.value(coordinates(mu)); }

double CylindricalFunctional::do_first(const AtomicMeasure& mu, std::span<const double> x) const {
  const Vec g = outer_.gradient(coordinates(mu));
  double s = 0.0;
  for (std::size_t i = 0; i < inner_.size(); ++i) s += g[i] * inner_[i].eval(x);
  return s;
}

void CylindricalFunctional::do_first_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                              std::span<double> out) const {
  do_first_gradients(mu, x, out);
}

void CylindricalFunctional::do_first_gradients(const AtomicMeasure& mu, std::span<const double> points,
                                               std::span<double> out) const {
  const auto d = static_cast<std::size_t>(dimension());
  const Vec g = outer_.gradient(coordinates(mu));
  Vec grad(d);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t pt = 0; pt * d < points.size(); ++pt) {
    const auto x = points.subspan(pt * d, d);
    for (std::size_t i = 0; i < inner_.size(); ++i) {
      inner_[i].gradient(x, grad);
      for (std::size_t k = 0; k < d; ++k) out[pt * d + k] += g[i] * grad[k];
    }
  }
}

double CylindricalFunctional::do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const {
  const Vec g = outer_.gradient(coordinates(mu));
  double s = 0.0;
  for (std::size_t i = 0; i < inner_.size(); ++i) s += g[i] * inner_[i].laplacian(x);
  return s;
}

double CylindricalFunctional::do_second(const AtomicMeasure& mu, std::span<const double> x,
                                        std::span<const double> y) const {
  const std::size_t p = inner_.size();
  const Vec h = outer_.hessian(coordinates(mu));
  Vec px(p), py(p);
  for (std::size_t i = 0; i < p; ++i) {
    px[i] = inner_[i].eval(x);
    py[i] = inner_[i].eval(y);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) s += h[i * p + j] * px[i] * py[j];
  return s;
}

void CylindricalFunctional::do_second_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                               std::span<const double> y, std::span<double> out) const {
  const std::size_t p = inner_.size();
  const std::size_t d = x.size();
  const Vec h = outer_.hessian(coordinates(mu));
  std::fill(out.begin(), out.end(), 0.0);
  Vec grad(d);
  for (std::size_t i = 0; i < p; ++i) {
    double coeff = 0.0;
    for (std::size_t j = 0; j < p; ++j) coeff += h[i * p + j] * inner_[j].eval(y);
    inner_[i].gradient(x, grad);
    for (std::size_t k = 0; k < d; ++k) out[k] += coeff * grad[k];
  }
}

double CylindricalFunctional::do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const {
  const std::size_t p = inner_.size();
  const std::size_t d = x.size();
  const Vec h = outer_.hessian(coordinates(mu));
  std::vector<Vec> grads(p);
  for (std::size_t i = 0; i < p; ++i) grads[i] = inner_[i].gradient(x);
  double s = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += grads[i][k] * grads[j][k];
      s += h[i * p + j] * dot;
    }
  }
  return s;
}

std::optional<double> CylindricalFunctional::first_derivative_bound(double mass_bound) const {
  Vec radius(inner_.size());
  for (std::size_t i = 0; i < inner_.size(); ++i) radius[i] = mass_bound * inner_[i].bound();
  const Vec gb = outer_.gradient_bound(radius);
  double s = 0.0;
  for (std::size_t i = 0; i < inner_.size(); ++i) s += gb[i] * inner_[i].bound();
  if (!std::isfinite(s)) return std::nullopt;
  return s;
}

// ------------------------------------------------------------------- sum

SumFunctional::SumFunctional(FunctionalPtr f, FunctionalPtr g)
    : Functional(f ? f->dimension() : 0,
                 Smoothness{f && g ? std::min(f->smoothness().k, g->smoothness().k) : 0,
                            f && g ? std::min(f->smoothness().m, g->smoothness().m) : 0}),
      f_(std::move(f)),
      g_(std::move(g)) {
  if (!f_ || !g_) throw std::invalid_argument("SumFunctional: null summand");
  if (f_->dimension() != g_->dimension()) throw std::invalid_argument("SumFunctional: dimension mismatch");
}

std::optional<double> SumFunctional::first_derivative_bound(double mass_bound) const {
  const auto a = f_->first_derivative_bound(mass_bound);
  const auto b = g_->first_derivative_bound(mass_bound);
  if (!a || !b) return std::nullopt;
  return *a + *b;
}

double SumFunctional::do_value(const AtomicMeasure& mu) const { return f_->value(mu) + g_->value(mu); }

double SumFunctional::do_first(const AtomicMeasure& mu, std::span<const double> x) const {
  return f_->first_derivative(mu, x) + g_->first_derivative(mu, x);
}

void SumFunctional::do_first_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                      std::span<double> out) const {
  const Vec a = f_->first_derivative_gradient(mu, x);
  const Vec b = g_->first_derivative_gradient(mu, x);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + b[k];
}

double SumFunctional::do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const {
  return f_->first_derivative_laplacian(mu, x) + g_->first_derivative_laplacian(mu, x);
}

void SumFunctional::do_first_gradients(const AtomicMeasure& mu, std::span<const double> points,
                                       std::span<double> out) const {
  Vec b(out.size());
  f_->first_derivative_gradients(mu, points, out);
  g_->first_derivative_gradients(mu, points, b);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
}

double SumFunctional::do_second(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y) const {
  return f_->second_derivative(mu, x, y) + g_->second_derivative(mu, x, y);
}

void SumFunctional::do_second_gradient(const AtomicMeasure& mu, std::span<const double> x, std::span<const double> y,
                                       std::span<double> out) const {
  const Vec a = f_->second_derivative_gradient(mu, x, y);
  const Vec b = g_->second_derivative_gradient(mu, x, y);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + b[k];
}

double SumFunctional::do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const {
  return f_->mixed_divergence_at_diagonal(mu, x) + g_->mixed_divergence_at_diagonal(mu, x);
}

FunctionalPtr make_zero(int dimension) { return std::make_shared<ConstantFunctional>(dimension, 0.0); }

FunctionalPtr make_constant(int dimension, double value) {
  return std::make_shared<ConstantFunctional>(dimension, value);
}

FunctionalPtr make_interaction(SmoothFunction v1, SmoothFunction v2) {
  return std::make_shared<InteractionFunctional>(std::move(v1), std::move(v2));
}

FunctionalPtr make_cylindrical(OuterMap outer, std::vector<SmoothFunction> inner) {
  return std::make_shared<CylindricalFunctional>(std::move(outer), std::move(inner));
}

// ---------------------------------------------------------------- oracles

double fd_first_derivative(const Functional& F, const AtomicMeasure& mu, std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("fd_first_derivative: eps must be > 0");
  return (F.value(mu.plus_atom(x, eps)) - F.value(mu)) / eps;
}

double fd_second_derivative(const Functional& F, const AtomicMeasure& mu, std::span<const double> x,
                            std::span<const double> y, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("fd_second_derivative: eps must be > 0");
  const AtomicMeasure mx = mu.plus_atom(x, eps);
  const AtomicMeasure mxy = mx.plus_atom(y, eps);
  const AtomicMeasure my = mu.plus_atom(y, eps);
  return (F.value(mxy) - F.value(mx) - F.value(my) + F.value(mu)) / (eps * eps);
}

double richardson_first_derivative(const Functional& F, const AtomicMeasure& mu, std::span<const double> x,
                                   double eps, int levels) {
  if (levels < 1) throw std::invalid_argument("richardson_first_derivative: levels must be >= 1");
  std::vector<Vec> table(static_cast<std::size_t>(levels));
  double h = eps;
  for (int j = 0; j < levels; ++j, h *= 0.5) {
    auto& row = table[static_cast<std::size_t>(j)];
    row.resize(static_cast<std::size_t>(j + 1));
    row[0] = fd_first_derivative(F, mu, x, h);
    double factor = 1.0;
    for (int m = 1; m <= j; ++m) {
      factor *= 2.0;
      const auto& prev = table[static_cast<std::size_t>(j - 1)];
      row[static_cast<std::size_t>(m)] =
          (factor * row[static_cast<std::size_t>(m - 1)] - prev[static_cast<std::size_t>(m - 1)]) / (factor - 1.0);
    }
  }
  return table.back().back();
}

FunctionalPtr make_sum(FunctionalPtr f, FunctionalPtr g) {
  return std::make_shared<SumFunctional>(std::move(f), std::move(g));
}

}  // namespace dk
