#pragma once

// Mean-field Langevin particle systems whose empirical measures solve the
// Dean-Kawasaki martingale problem, plus the admissibility test that decides
// whether such a solution exists for given (nu, alpha).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dk/functional.hpp"
#include "dk/measure.hpp"

namespace dk {

enum class AdmissibilityReason { ok, mass_times_alpha_not_integer, unequal_atom_weights, zero_mass };

std::string to_string(AdmissibilityReason reason);

struct AdmissibilityReport {
  bool admissible = false;
  int n = 0;  // particle count; 0 unless admissible
  AdmissibilityReason reason = AdmissibilityReason::zero_mass;
  double mass = 0.0;
  double mass_times_alpha = 0.0;
};

/// Admissible iff b*alpha is within tol*max(1, b*alpha) of an integer n >= 1
/// and nu has exactly n atoms, each of weight b/n within tol*(b/n).
/// Coincident atoms count separately. Never throws for bad measures or alpha;
/// throws std::invalid_argument if tol is outside (0, 1e-3].
AdmissibilityReport check_admissibility(const AtomicMeasure& nu, double alpha, double tol = 1e-9);

struct SimConfig {
  int dimension = 1;
  double alpha = 1.0;
  AtomicMeasure initial{1};
  FunctionalPtr drift;  // null means F = 0
  double dt = 0.0;      // 0 means t_final / 1000
  double t_final = 1.0;
  std::size_t n_paths = 1;
  std::uint64_t master_seed = 0;
  double admissibility_tol = 1e-9;
};

/// Uniform grid used by the integrator: K steps of size t_final / K, where
/// K = t_final / dt rounded when within 1e-9 of an integer, otherwise rounded up.
std::size_t step_count(double dt, double t_final);

/// One simulated ensemble member.
///
/// positions holds (steps+1) * n * d coordinates (time-major, then particle).
/// normals holds steps * n * d standard normals; the Wiener increment of
/// particle i over step k is sqrt(step) * normals.
struct MeasurePath {
  int dimension = 1;
  std::size_t n = 0;
  double mass = 0.0;
  double step = 0.0;
  std::size_t path_index = 0;
  std::uint64_t master_seed = 0;
  Vec times;
  Vec positions;
  Vec normals;

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double particle_weight() const { return mass / static_cast<double>(n); }
  /// sqrt(n / b), the noise amplitude of each particle.
  double diffusion() const;
  /// All particle positions at grid index k (n * d values).
  std::span<const double> snapshot(std::size_t k) const;
  std::span<const double> position(std::size_t k, std::size_t i) const;
  /// Wiener increment of particle i over [t_k, t_{k+1}].
  Vec increment(std::size_t k, std::size_t i) const;
};

/// Validates the config and returns the admissibility report; throws
/// std::invalid_argument describing the first problem.
AdmissibilityReport validate(const SimConfig& config);

/// Euler-Maruyama path number `index`, with drift -grad dF/dmu(mu_k) and
/// noise sqrt(n/b) dw. The result depends only on (config, index).
MeasurePath simulate_path(const SimConfig& config, std::size_t index);

/// All config.n_paths paths. threads = 0 uses hardware concurrency.
std::vector<MeasurePath> simulate(const SimConfig& config, unsigned threads = 1);

/// (b/n) sum_i delta_{X^i(t_k)}.
AtomicMeasure empirical_measure(const MeasurePath& path, std::size_t k);

/// mu~_t = (1/b) mu_{bt}: weights divided by b, times by b, and increments by
/// sqrt(b) (the stored normals are unchanged). Throws if b is not the path mass.
MeasurePath rescale_path(const MeasurePath& path, double b);
/// Inverse of rescale_path; exact when b is a power of two.
MeasurePath unrescale_path(const MeasurePath& path, double b);

}  // namespace dk
