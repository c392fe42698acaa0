#pragma once

// Atomic finite measures on R^d and their elementary calculus.

#include <cstddef>
#include <span>
#include <vector>

namespace dk {

using Vec = std::vector<double>;

class SmoothFunction;

/// Axis-aligned box [lower, upper] in R^d.
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lower, Vec upper);

  /// The cube [a,b]^d.
  static Box cube(int dimension, double a, double b);

  int dimension() const { return static_cast<int>(lower.size()); }
  bool contains(std::span<const double> x) const;
  bool is_cube() const;
};

/// Finite positive measure sum_i w_i delta_{x_i}, stored as a flat
/// location array (atom-major) and a weight array.
///
/// Atoms are kept in insertion order and never merged or sorted; every
/// reduction over a measure walks the atoms in that order.
class AtomicMeasure {
 public:
  explicit AtomicMeasure(int dimension);
  /// `locations` holds size()*dimension coordinates, atom-major.
  AtomicMeasure(int dimension, Vec locations, Vec weights);

  int dimension() const { return dimension_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  std::span<const double> location(std::size_t i) const {
    return {locations_.data() + i * static_cast<std::size_t>(dimension_),
            static_cast<std::size_t>(dimension_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }

  std::span<const double> locations() const { return locations_; }
  std::span<const double> weights() const { return weights_; }

  /// Appends an atom; the weight must be finite and > 0.
  void add_atom(std::span<const double> x, double w);
  /// Copy of this measure with one extra atom appended.
  AtomicMeasure plus_atom(std::span<const double> x, double w) const;

  friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;

 private:
  int dimension_;
  Vec locations_;
  Vec weights_;
};

/// <phi, mu> for an arbitrary callable phi(span<const double>) -> double.
template <class Fn>
double integrate(const Fn& phi, const AtomicMeasure& mu) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) sum += mu.weight(i) * phi(mu.location(i));
  return sum;
}

/// <phi, mu>; throws std::invalid_argument on dimension mismatch.
double integrate(const SmoothFunction& phi, const AtomicMeasure& mu);

/// Sum of weights. Bit-identical to integrate(1, mu).
double total_mass(const AtomicMeasure& mu);

/// Surrogate for the bounded-Lipschitz metric: the largest discrepancy
/// |<phi,mu> - <phi,nu>| over a caller-certified probe catalog (each probe
/// bounded by 1 with Lipschitz constant <= 1).
double bounded_lipschitz_distance(const AtomicMeasure& mu, const AtomicMeasure& nu,
                                  std::span<const SmoothFunction> probes);

struct MassBound {
  double C;
  explicit MassBound(double c);
};

/// mu in N_C, i.e. total_mass(mu) <= C (boundary included).
bool in_mass_ball(const AtomicMeasure& mu, MassBound bound);

}  // namespace dk
