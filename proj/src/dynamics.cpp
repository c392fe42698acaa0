#include "dk/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dk/parallel.hpp"
#include "dk/rng.hpp"

namespace dk {

std::string to_string(AdmissibilityReason reason) {
  switch (reason) {
    case AdmissibilityReason::ok: return "ok";
    case AdmissibilityReason::mass_times_alpha_not_integer: return "mass_times_alpha_not_integer";
    case AdmissibilityReason::unequal_atom_weights: return "unequal_atom_weights";
    case AdmissibilityReason::zero_mass: return "zero_mass";
  }
  return "unknown";
}

AdmissibilityReport check_admissibility(const AtomicMeasure& nu, double alpha, double tol) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw std::invalid_argument("check_admissibility: tol must be in (0, 1e-3]");
  AdmissibilityReport r;
  r.mass = total_mass(nu);
  if (nu.empty() || !(r.mass > 0.0)) {
    r.reason = AdmissibilityReason::zero_mass;
    return r;
  }
  r.mass_times_alpha = r.mass * alpha;
  const double nearest = std::round(r.mass_times_alpha);
  if (!std::isfinite(r.mass_times_alpha) || nearest < 1.0 ||
      std::abs(r.mass_times_alpha - nearest) > tol * std::max(1.0, r.mass_times_alpha)) {
    r.reason = AdmissibilityReason::mass_times_alpha_not_integer;
    return r;
  }
  const auto n = static_cast<std::size_t>(nearest);
  const double w = r.mass / nearest;
  bool equal = nu.size() == n;
  for (std::size_t i = 0; equal && i < nu.size(); ++i) equal = std::abs(nu.weight(i) - w) <= tol * w;
  if (!equal) {
    r.reason = AdmissibilityReason::unequal_atom_weights;
    return r;
  }
  r.admissible = true;
  r.n = static_cast<int>(n);
  r.reason = AdmissibilityReason::ok;
  return r;
}

std::size_t step_count(double dt, double t_final) {
  if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("step_count: dt and t_final must be positive");
  const double ratio = t_final / dt;
  const double nearest = std::round(ratio);
  const double k = std::abs(ratio - nearest) <= 1e-9 * ratio ? nearest : std::ceil(ratio);
  return static_cast<std::size_t>(std::max(1.0, k));
}

double MeasurePath::diffusion() const { return std::sqrt(static_cast<double>(n) / mass); }

std::span<const double> MeasurePath::snapshot(std::size_t k) const {
  if (k >= times.size()) throw std::out_of_range("MeasurePath: time index out of range");
  const std::size_t block = n * static_cast<std::size_t>(dimension);
  return {positions.data() + k * block, block};
}

std::span<const double> MeasurePath::position(std::size_t k, std::size_t i) const {
  if (i >= n) throw std::out_of_range("MeasurePath: particle index out of range");
  return snapshot(k).subspan(i * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension));
}

Vec MeasurePath::increment(std::size_t k, std::size_t i) const {
  if (k >= steps()) throw std::out_of_range("MeasurePath: step index out of range");
  if (i >= n) throw std::out_of_range("MeasurePath: particle index out of range");
  const auto d = static_cast<std::size_t>(dimension);
  const double s = std::sqrt(step);
  Vec out(d);
  for (std::size_t c = 0; c < d; ++c) out[c] = s * normals[(k * n + i) * d + c];
  return out;
}

AdmissibilityReport validate(const SimConfig& config) {
  if (config.dimension < 1) throw std::invalid_argument("SimConfig: dimension must be >= 1");
  if (config.initial.dimension() != config.dimension)
    throw std::invalid_argument("SimConfig: initial measure dimension does not match");
  if (config.drift && config.drift->dimension() != config.dimension)
    throw std::invalid_argument("SimConfig: drift functional dimension does not match");
  if (!(config.alpha > 0.0) || !std::isfinite(config.alpha)) throw std::invalid_argument("SimConfig: alpha must be > 0");
  if (!(config.t_final > 0.0) || !std::isfinite(config.t_final))
    throw std::invalid_argument("SimConfig: t_final must be > 0");
  const double dt = config.dt == 0.0 ? config.t_final / 1000.0 : config.dt;
  if (!(dt > 0.0) || !(dt < config.t_final)) throw std::invalid_argument("SimConfig: need 0 < dt < t_final");
  if (config.n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
  const auto report = check_admissibility(config.initial, config.alpha, config.admissibility_tol);
  if (!report.admissible)
    throw std::invalid_argument("SimConfig: initial measure not admissible: " + to_string(report.reason) +
                                " (b*alpha = " + std::to_string(report.mass_times_alpha) + ")");
  return report;
}

MeasurePath simulate_path(const SimConfig& config, std::size_t index) {
  const auto report = validate(config);
  const double dt = config.dt == 0.0 ? config.t_final / 1000.0 : config.dt;
  const std::size_t K = step_count(dt, config.t_final);
  if (K > UINT32_MAX || index >= UINT32_MAX) throw std::invalid_argument("simulate_path: index exceeds counter range");

  MeasurePath path;
  path.dimension = config.dimension;
  path.n = static_cast<std::size_t>(report.n);
  path.mass = report.mass;
  path.step = config.t_final / static_cast<double>(K);
  path.path_index = index;
  path.master_seed = config.master_seed;

  const auto d = static_cast<std::size_t>(config.dimension);
  const std::size_t block = path.n * d;
  path.times.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) path.times[k] = config.t_final * static_cast<double>(k) / static_cast<double>(K);
  path.positions.resize((K + 1) * block);
  path.normals.resize(K * block);
  std::copy(config.initial.locations().begin(), config.initial.locations().end(), path.positions.begin());

  const double sigma = path.diffusion();
  const double sqrt_step = std::sqrt(path.step);
  const double weight = path.particle_weight();
  const auto key = rng::key_from_seed(config.master_seed);
  const bool has_drift = config.drift && config.drift->family() != "zero";
  Vec grad(block, 0.0);
  Vec weights(path.n, weight);

  for (std::size_t k = 0; k < K; ++k) {
    const double* x = path.positions.data() + k * block;
    double* next = path.positions.data() + (k + 1) * block;
    double* z = path.normals.data() + k * block;
    if (has_drift) {
      AtomicMeasure mu(config.dimension, Vec(x, x + block), weights);
      config.drift->first_derivative_gradients(mu, {x, block}, grad);
    }
    for (std::size_t i = 0; i < path.n; ++i) {
      rng::standard_normals(key, static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(k),
                            static_cast<std::uint32_t>(i), {z + i * d, d});
    }
    for (std::size_t j = 0; j < block; ++j) next[j] = x[j] - grad[j] * path.step + sigma * sqrt_step * z[j];
  }
  return path;
}

std::vector<MeasurePath> simulate(const SimConfig& config, unsigned threads) {
  validate(config);
  return parallel_map<MeasurePath>(config.n_paths, threads,
                                   [&](std::size_t i) { return simulate_path(config, i); });
}

AtomicMeasure empirical_measure(const MeasurePath& path, std::size_t k) {
  const auto x = path.snapshot(k);
  return AtomicMeasure(path.dimension, Vec(x.begin(), x.end()), Vec(path.n, path.particle_weight()));
}

namespace {

void check_mass(const MeasurePath& path, double expected, const char* who) {
  if (!(std::abs(path.mass - expected) <= 1e-12 * std::abs(expected)))
    throw std::invalid_argument(std::string(who) + ": b does not match the path mass");
}

}  // namespace

MeasurePath rescale_path(const MeasurePath& path, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("rescale_path: b must be > 0");
  check_mass(path, b, "rescale_path");
  MeasurePath out = path;
  out.mass = path.mass / b;
  out.step = path.step / b;
  for (auto& t : out.times) t /= b;
  return out;
}

MeasurePath unrescale_path(const MeasurePath& path, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("unrescale_path: b must be > 0");
  check_mass(path, 1.0, "unrescale_path");
  MeasurePath out = path;
  out.mass = path.mass * b;
  out.step = path.step * b;
  for (auto& t : out.times) t *= b;
  return out;
}

}  // namespace dk
