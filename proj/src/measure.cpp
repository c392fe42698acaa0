#include "dk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dk/smooth_function.hpp"

namespace dk {

Box::Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.empty() || lower.size() != upper.size())
    throw std::invalid_argument("Box: lower/upper must be nonempty and of equal length");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!(lower[k] < upper[k]))
      throw std::invalid_argument("Box: lower[" + std::to_string(k) + "] must be < upper");
  }
}

Box Box::cube(int dimension, double a, double b) {
  if (dimension < 1) throw std::invalid_argument("Box::cube: dimension must be >= 1");
  return Box(Vec(static_cast<std::size_t>(dimension), a), Vec(static_cast<std::size_t>(dimension), b));
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < lower[k] || x[k] > upper[k]) return false;
  }
  return true;
}

bool Box::is_cube() const {
  for (std::size_t k = 1; k < lower.size(); ++k) {
    if (lower[k] != lower[0] || upper[k] != upper[0]) return false;
  }
  return true;
}

AtomicMeasure::AtomicMeasure(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw std::invalid_argument("AtomicMeasure: dimension must be >= 1");
}

AtomicMeasure::AtomicMeasure(int dimension, Vec locations, Vec weights)
    : AtomicMeasure(dimension) {
  if (locations.size() != weights.size() * static_cast<std::size_t>(dimension))
    throw std::invalid_argument("AtomicMeasure: locations.size() != weights.size() * dimension");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("AtomicMeasure: atom weights must be finite and > 0");
  }
  for (double x : locations) {
    if (!std::isfinite(x)) throw std::invalid_argument("AtomicMeasure: non-finite atom location");
  }
  locations_ = std::move(locations);
  weights_ = std::move(weights);
}

void AtomicMeasure::add_atom(std::span<const double> x, double w) {
  if (x.size() != static_cast<std::size_t>(dimension_))
    throw std::invalid_argument("AtomicMeasure::add_atom: dimension mismatch");
  if (!(w > 0.0) || !std::isfinite(w))
    throw std::invalid_argument("AtomicMeasure::add_atom: weight must be finite and > 0");
  locations_.insert(locations_.end(), x.begin(), x.end());
  weights_.push_back(w);
}

AtomicMeasure AtomicMeasure::plus_atom(std::span<const double> x, double w) const {
  AtomicMeasure out = *this;
  out.add_atom(x, w);
  return out;
}

double integrate(const SmoothFunction& phi, const AtomicMeasure& mu) {
  if (phi.dimension() != mu.dimension())
    throw std::invalid_argument("integrate: function dimension " + std::to_string(phi.dimension()) +
                                " != measure dimension " + std::to_string(mu.dimension()));
  return integrate([&](std::span<const double> x) { return phi.eval(x); }, mu);
}

double total_mass(const AtomicMeasure& mu) {
  // Same order and operations as integrate(1, mu): w * 1.0 == w exactly.
  double sum = 0.0;
  for (double w : mu.weights()) sum += w;
  return sum;
}

double bounded_lipschitz_distance(const AtomicMeasure& mu, const AtomicMeasure& nu,
                                  std::span<const SmoothFunction> probes) {
  if (probes.empty()) throw std::invalid_argument("bounded_lipschitz_distance: empty probe set");
  if (mu.dimension() != nu.dimension())
    throw std::invalid_argument("bounded_lipschitz_distance: dimension mismatch");
  double best = 0.0;
  for (const auto& phi : probes) best = std::max(best, std::abs(integrate(phi, mu) - integrate(phi, nu)));
  return best;
}

MassBound::MassBound(double c) : C(c) {
  if (!(c > 0.0)) throw std::invalid_argument("MassBound: C must be > 0");
}

bool in_mass_ball(const AtomicMeasure& mu, MassBound bound) { return total_mass(mu) <= bound.C; }

}  // namespace dk
