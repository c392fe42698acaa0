#pragma once

// Reproducible random measures and points for tests and batch experiments.

#include <cstddef>

#include "dk/measure.hpp"
#include "dk/rng.hpp"

namespace dk {

/// Point uniform in the cube [a, b]^d.
inline Vec random_point(rng::Stream& s, int dimension, double a, double b) {
  Vec x(static_cast<std::size_t>(dimension));
  for (auto& v : x) v = s.uniform(a, b);
  return x;
}

/// `atoms` atoms uniform in [a, b]^d with positive weights summing to a total
/// mass drawn uniformly from [0.1, 1] * max_mass (so the result lies in N_C
/// for C = max_mass up to rounding of the last weight).
inline AtomicMeasure random_measure(rng::Stream& s, int dimension, std::size_t atoms, double a, double b,
                                    double max_mass) {
  AtomicMeasure mu(dimension);
  const double mass = max_mass * s.uniform(0.1, 1.0);
  Vec raw(atoms);
  double total = 0.0;
  for (auto& r : raw) {
    r = s.uniform(0.05, 1.0);
    total += r;
  }
  for (std::size_t i = 0; i < atoms; ++i) mu.add_atom(random_point(s, dimension, a, b), mass * raw[i] / total);
  return mu;
}

}  // namespace dk
