#include "dk/smooth_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(const Vec& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); }

// Supremum of |f| over a fine uniform grid of [lo, hi], padded by 1%.
template <class Fn>
double sampled_sup(Fn f, double lo, double hi) {
  constexpr int kSamples = 200000;
  double best = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / kSamples;
    best = std::max(best, std::abs(f(t)));
  }
  return 1.01 * best;
}

// Product-form evaluation shared by compact_bump_product and plateau_product.
// jets[k] holds the 1-d profile jet in coordinate k, already scaled to x-derivatives.
struct ProductJet {
  double value;
  Vec grad;
  double lap;
};

ProductJet combine(const std::vector<profile::Jet>& jets) {
  const std::size_t d = jets.size();
  ProductJet out{1.0, Vec(d, 0.0), 0.0};
  for (const auto& j : jets) out.value *= j.value;
  for (std::size_t k = 0; k < d; ++k) {
    double others = 1.0;
    for (std::size_t m = 0; m < d; ++m) {
      if (m != k) others *= jets[m].value;
    }
    out.grad[k] = jets[k].d1 * others;
    out.lap += jets[k].d2 * others;
  }
  return out;
}

}  // namespace

namespace profile {

Jet bump(double t) {
  const double s = 1.0 - t * t;
  if (!(s > 0.0)) return {0.0, 0.0, 0.0};
  const double h = std::exp(1.0 - 1.0 / s);
  if (h == 0.0) return {0.0, 0.0, 0.0};
  const double g1 = -2.0 * t / (s * s);
  const double g2 = -2.0 / (s * s) - 8.0 * t * t / (s * s * s);
  return {h, h * g1, h * (g1 * g1 + g2)};
}

Jet smooth_step(double u) {
  if (u <= 0.0) return {0.0, 0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0, 0.0};
  // f(u) = exp(-1/u); A = f(u), B = f(1-u); S = A / (A + B).
  const double v = 1.0 - u;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / v);
  const double a1 = a / (u * u);
  const double a2 = a * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
  const double b1 = -b / (v * v);
  const double b2 = b * (1.0 / (v * v * v * v) - 2.0 / (v * v * v));
  const double den = a + b;
  const double num = a1 * b - a * b1;
  const double num1 = a2 * b - a * b2;
  const double den1 = a1 + b1;
  return {a / den, num / (den * den), (num1 * den - 2.0 * num * den1) / (den * den * den)};
}

Jet plateau(double s, double inner, double outer) {
  const double r = std::abs(s);
  if (r <= inner) return {1.0, 0.0, 0.0};
  if (r >= outer) return {0.0, 0.0, 0.0};
  const double width = outer - inner;
  const Jet step = smooth_step((outer - r) / width);
  const double sign = s < 0.0 ? -1.0 : 1.0;
  return {step.value, -sign * step.d1 / width, step.d2 / (width * width)};
}

double bump_d1_bound() {
  static const double v = sampled_sup([](double t) { return bump(t).d1; }, -1.0, 1.0);
  return v;
}
double bump_d2_bound() {
  static const double v = sampled_sup([](double t) { return bump(t).d2; }, -1.0, 1.0);
  return v;
}
double step_d1_bound() {
  static const double v = sampled_sup([](double u) { return smooth_step(u).d1; }, 0.0, 1.0);
  return v;
}
double step_d2_bound() {
  static const double v = sampled_sup([](double u) { return smooth_step(u).d2; }, 0.0, 1.0);
  return v;
}

}  // namespace profile

std::string_view to_string(SmoothKind kind) {
  switch (kind) {
    case SmoothKind::constant: return "constant";
    case SmoothKind::gaussian_bump: return "gaussian_bump";
    case SmoothKind::cosine_wave: return "cosine_wave";
    case SmoothKind::compact_bump_product: return "compact_bump_product";
    case SmoothKind::plateau_product: return "plateau_product";
    case SmoothKind::affine: return "affine";
    case SmoothKind::quadratic: return "quadratic";
  }
  return "unknown";
}

std::optional<SmoothKind> smooth_kind_from_string(std::string_view name) {
  for (auto k : {SmoothKind::constant, SmoothKind::gaussian_bump, SmoothKind::cosine_wave,
                 SmoothKind::compact_bump_product, SmoothKind::plateau_product, SmoothKind::affine,
                 SmoothKind::quadratic}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

SmoothFunction::SmoothFunction(SmoothKind kind, int dimension) : kind_(kind), dimension_(dimension) {
  if (dimension < 1) throw std::invalid_argument("SmoothFunction: dimension must be >= 1");
}

SmoothFunction SmoothFunction::constant(int dimension, double value) {
  SmoothFunction f(SmoothKind::constant, dimension);
  f.amplitude_ = value;
  return f;
}

SmoothFunction SmoothFunction::gaussian_bump(Vec center, double width, double amplitude) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be > 0");
  SmoothFunction f(SmoothKind::gaussian_bump, static_cast<int>(center.size()));
  f.center_ = std::move(center);
  f.scales_ = {width};
  f.amplitude_ = amplitude;
  return f;
}

SmoothFunction SmoothFunction::cosine_wave(Vec wavevector, double amplitude, double phase) {
  SmoothFunction f(SmoothKind::cosine_wave, static_cast<int>(wavevector.size()));
  f.wavevector_ = std::move(wavevector);
  f.amplitude_ = amplitude;
  f.phase_ = phase;
  return f;
}

SmoothFunction SmoothFunction::compact_bump_product(Vec center, Vec radii, double amplitude) {
  if (center.size() != radii.size())
    throw std::invalid_argument("compact_bump_product: center and radii lengths differ");
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("compact_bump_product: radii must be > 0");
  }
  SmoothFunction f(SmoothKind::compact_bump_product, static_cast<int>(center.size()));
  f.center_ = std::move(center);
  f.scales_ = std::move(radii);
  f.amplitude_ = amplitude;
  return f;
}

SmoothFunction SmoothFunction::plateau_product(int dimension, double inner, double outer) {
  if (!(inner >= 0.0) || !(outer > inner))
    throw std::invalid_argument("plateau_product: need 0 <= inner < outer");
  SmoothFunction f(SmoothKind::plateau_product, dimension);
  f.inner_ = inner;
  f.outer_ = outer;
  return f;
}

SmoothFunction SmoothFunction::affine(Vec slope, double offset) {
  SmoothFunction f(SmoothKind::affine, static_cast<int>(slope.size()));
  f.wavevector_ = std::move(slope);
  f.amplitude_ = offset;
  return f;
}

SmoothFunction SmoothFunction::quadratic(Vec center, double scale) {
  SmoothFunction f(SmoothKind::quadratic, static_cast<int>(center.size()));
  f.center_ = std::move(center);
  f.amplitude_ = scale;
  return f;
}

void SmoothFunction::check(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension_))
    throw std::invalid_argument("SmoothFunction(" + std::string(to_string(kind_)) + "): point has dimension " +
                                std::to_string(x.size()) + ", expected " + std::to_string(dimension_));
}

double SmoothFunction::eval(std::span<const double> x) const {
  check(x);
  const std::size_t d = x.size();
  switch (kind_) {
    case SmoothKind::constant:
      return amplitude_;
    case SmoothKind::gaussian_bump: {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) r2 += (x[k] - center_[k]) * (x[k] - center_[k]);
      const double w = scales_[0];
      return amplitude_ * std::exp(-r2 / (2.0 * w * w));
    }
    case SmoothKind::cosine_wave: {
      double arg = phase_;
      for (std::size_t k = 0; k < d; ++k) arg += wavevector_[k] * x[k];
      return amplitude_ * std::cos(arg);
    }
    case SmoothKind::compact_bump_product: {
      double v = amplitude_;
      for (std::size_t k = 0; k < d; ++k) v *= profile::bump((x[k] - center_[k]) / scales_[k]).value;
      return v;
    }
    case SmoothKind::plateau_product: {
      double v = 1.0;
      for (std::size_t k = 0; k < d; ++k) v *= profile::plateau(x[k], inner_, outer_).value;
      return v;
    }
    case SmoothKind::affine: {
      double v = amplitude_;
      for (std::size_t k = 0; k < d; ++k) v += wavevector_[k] * x[k];
      return v;
    }
    case SmoothKind::quadratic: {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) r2 += (x[k] - center_[k]) * (x[k] - center_[k]);
      return amplitude_ * r2;
    }
  }
  return 0.0;
}

void SmoothFunction::gradient(std::span<const double> x, std::span<double> out) const {
  check(x);
  const std::size_t d = x.size();
  if (out.size() != d) throw std::invalid_argument("SmoothFunction::gradient: output has wrong size");
  switch (kind_) {
    case SmoothKind::constant:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case SmoothKind::gaussian_bump: {
      const double w2 = scales_[0] * scales_[0];
      const double e = eval(x);
      for (std::size_t k = 0; k < d; ++k) out[k] = -e * (x[k] - center_[k]) / w2;
      return;
    }
    case SmoothKind::cosine_wave: {
      double arg = phase_;
      for (std::size_t k = 0; k < d; ++k) arg += wavevector_[k] * x[k];
      const double s = -amplitude_ * std::sin(arg);
      for (std::size_t k = 0; k < d; ++k) out[k] = s * wavevector_[k];
      return;
    }
    case SmoothKind::compact_bump_product: {
      std::vector<profile::Jet> jets(d);
      for (std::size_t k = 0; k < d; ++k) {
        auto j = profile::bump((x[k] - center_[k]) / scales_[k]);
        jets[k] = {j.value, j.d1 / scales_[k], j.d2 / (scales_[k] * scales_[k])};
      }
      const auto p = combine(jets);
      for (std::size_t k = 0; k < d; ++k) out[k] = amplitude_ * p.grad[k];
      return;
    }
    case SmoothKind::plateau_product: {
      std::vector<profile::Jet> jets(d);
      for (std::size_t k = 0; k < d; ++k) jets[k] = profile::plateau(x[k], inner_, outer_);
      const auto p = combine(jets);
      std::copy(p.grad.begin(), p.grad.end(), out.begin());
      return;
    }
    case SmoothKind::affine:
      std::copy(wavevector_.begin(), wavevector_.end(), out.begin());
      return;
    case SmoothKind::quadratic:
      for (std::size_t k = 0; k < d; ++k) out[k] = 2.0 * amplitude_ * (x[k] - center_[k]);
      return;
  }
}

Vec SmoothFunction::gradient(std::span<const double> x) const {
  Vec out(x.size());
  gradient(x, out);
  return out;
}

double SmoothFunction::laplacian(std::span<const double> x) const {
  check(x);
  const std::size_t d = x.size();
  switch (kind_) {
    case SmoothKind::constant:
    case SmoothKind::affine:
      return 0.0;
    case SmoothKind::gaussian_bump: {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) r2 += (x[k] - center_[k]) * (x[k] - center_[k]);
      const double w2 = scales_[0] * scales_[0];
      const double e = amplitude_ * std::exp(-r2 / (2.0 * w2));
      return e * (r2 / (w2 * w2) - static_cast<double>(d) / w2);
    }
    case SmoothKind::cosine_wave:
      return -norm2(wavevector_) * eval(x);
    case SmoothKind::compact_bump_product: {
      std::vector<profile::Jet> jets(d);
      for (std::size_t k = 0; k < d; ++k) {
        auto j = profile::bump((x[k] - center_[k]) / scales_[k]);
        jets[k] = {j.value, j.d1 / scales_[k], j.d2 / (scales_[k] * scales_[k])};
      }
      return amplitude_ * combine(jets).lap;
    }
    case SmoothKind::plateau_product: {
      std::vector<profile::Jet> jets(d);
      for (std::size_t k = 0; k < d; ++k) jets[k] = profile::plateau(x[k], inner_, outer_);
      return combine(jets).lap;
    }
    case SmoothKind::quadratic:
      return 2.0 * amplitude_ * static_cast<double>(d);
  }
  return 0.0;
}

double SmoothFunction::bound() const {
  switch (kind_) {
    case SmoothKind::constant:
    case SmoothKind::gaussian_bump:
    case SmoothKind::cosine_wave:
    case SmoothKind::compact_bump_product:
      return std::abs(amplitude_);
    case SmoothKind::plateau_product:
      return 1.0;
    case SmoothKind::affine:
      return norm2(wavevector_) == 0.0 ? std::abs(amplitude_) : kInf;
    case SmoothKind::quadratic:
      return amplitude_ == 0.0 ? 0.0 : kInf;
  }
  return kInf;
}

double SmoothFunction::gradient_bound() const {
  const double d = static_cast<double>(dimension_);
  switch (kind_) {
    case SmoothKind::constant:
      return 0.0;
    case SmoothKind::gaussian_bump:
      // max_r r exp(-r^2/2w^2) / w^2 is attained at r = w.
      return std::abs(amplitude_) * std::exp(-0.5) / scales_[0];
    case SmoothKind::cosine_wave:
      return std::abs(amplitude_) * std::sqrt(norm2(wavevector_));
    case SmoothKind::compact_bump_product: {
      double s = 0.0;
      for (double r : scales_) s += 1.0 / (r * r);
      return std::abs(amplitude_) * profile::bump_d1_bound() * std::sqrt(s);
    }
    case SmoothKind::plateau_product:
      return profile::step_d1_bound() / (outer_ - inner_) * std::sqrt(d);
    case SmoothKind::affine:
      return std::sqrt(norm2(wavevector_));
    case SmoothKind::quadratic:
      return amplitude_ == 0.0 ? 0.0 : kInf;
  }
  return kInf;
}

double SmoothFunction::laplacian_bound() const {
  const double d = static_cast<double>(dimension_);
  switch (kind_) {
    case SmoothKind::constant:
    case SmoothKind::affine:
      return 0.0;
    case SmoothKind::gaussian_bump:
      return std::abs(amplitude_) * d / (scales_[0] * scales_[0]);
    case SmoothKind::cosine_wave:
      return std::abs(amplitude_) * norm2(wavevector_);
    case SmoothKind::compact_bump_product: {
      double s = 0.0;
      for (double r : scales_) s += 1.0 / (r * r);
      return std::abs(amplitude_) * profile::bump_d2_bound() * s;
    }
    case SmoothKind::plateau_product: {
      const double w = outer_ - inner_;
      return profile::step_d2_bound() / (w * w) * d;
    }
    case SmoothKind::quadratic:
      return 2.0 * std::abs(amplitude_) * d;
  }
  return kInf;
}

std::optional<Box> SmoothFunction::support() const {
  const auto d = static_cast<std::size_t>(dimension_);
  switch (kind_) {
    case SmoothKind::compact_bump_product: {
      Vec lo(d), hi(d);
      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = center_[k] - scales_[k];
        hi[k] = center_[k] + scales_[k];
      }
      return Box(std::move(lo), std::move(hi));
    }
    case SmoothKind::plateau_product:
      return Box::cube(dimension_, -outer_, outer_);
    default:
      return std::nullopt;
  }
}

bool SmoothFunction::is_even() const {
  auto all_zero = [](const Vec& v) { return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; }); };
  switch (kind_) {
    case SmoothKind::constant:
    case SmoothKind::plateau_product:
      return true;
    case SmoothKind::gaussian_bump:
    case SmoothKind::compact_bump_product:
    case SmoothKind::quadratic:
      return all_zero(center_) || amplitude_ == 0.0;
    case SmoothKind::cosine_wave:
      return phase_ == 0.0 || all_zero(wavevector_) || amplitude_ == 0.0;
    case SmoothKind::affine:
      return all_zero(wavevector_);
  }
  return false;
}

}  // namespace dk
