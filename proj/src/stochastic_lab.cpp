#include "dk/stochastic_lab.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

#include "dk/parallel.hpp"

namespace dk {

namespace {

void check_dimension(int expected, int got, const char* what) {
  if (expected != got) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

// Trapezoidal running integral of samples f on the grid t.
Vec cumulative_trapezoid(const Vec& t, const Vec& f) {
  Vec out(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k - 1] + f[k]);
  return out;
}

Vec drift_gradients(const AtomicMeasure& mu, const Functional* F) {
  Vec g(mu.size() * static_cast<std::size_t>(mu.dimension()), 0.0);
  if (F != nullptr) {
    check_dimension(F->dimension(), mu.dimension(), "drift functional");
    F->first_derivative_gradients(mu, mu.locations(), g);
  }
  return g;
}

}  // namespace

GeneratorTerms phi_generator(const AtomicMeasure& mu, const SmoothFunction& phi, const Functional* F, double alpha) {
  check_dimension(phi.dimension(), mu.dimension(), "phi_generator");
  const auto d = static_cast<std::size_t>(mu.dimension());
  const Vec gF = drift_gradients(mu, F);
  GeneratorTerms t;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.location(i);
    const double w = mu.weight(i);
    const Vec g = phi.gradient(x);
    double dot = 0.0;
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dot += g[c] * gF[i * d + c];
      sq += g[c] * g[c];
    }
    t.laplacian += w * phi.laplacian(x);
    t.transport -= w * dot;
    t.qv_density += w * sq;
  }
  t.laplacian *= 0.5 * alpha;
  return t;
}

GeneratorTerms functional_generator(const AtomicMeasure& mu, const Functional& G, const Functional* F, double alpha) {
  check_dimension(G.dimension(), mu.dimension(), "functional_generator");
  const auto d = static_cast<std::size_t>(mu.dimension());
  const Vec gF = drift_gradients(mu, F);
  Vec gG(mu.size() * d);
  G.first_derivative_gradients(mu, mu.locations(), gG);
  GeneratorTerms t;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.location(i);
    const double w = mu.weight(i);
    double dot = 0.0;
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dot += gG[i * d + c] * gF[i * d + c];
      sq += gG[i * d + c] * gG[i * d + c];
    }
    t.laplacian += w * G.first_derivative_laplacian(mu, x);
    t.transport -= w * dot;
    t.second_order += w * G.mixed_divergence_at_diagonal(mu, x);
    t.qv_density += w * sq;
  }
  t.laplacian *= 0.5 * alpha;
  t.second_order *= 0.5;
  return t;
}

MartingaleSeries build_M_phi(const MeasurePath& path, const SmoothFunction& phi, const Functional* F, double alpha) {
  check_dimension(phi.dimension(), path.dimension, "build_M_phi");
  if (F != nullptr) check_dimension(F->dimension(), path.dimension, "build_M_phi");
  const std::size_t m = path.times.size();
  Vec level(m);
  Vec drift(m);
  Vec density(m);
  for (std::size_t k = 0; k < m; ++k) {
    const AtomicMeasure mu = empirical_measure(path, k);
    level[k] = integrate(phi, mu);
    const auto terms = phi_generator(mu, phi, F, alpha);
    drift[k] = terms.drift();
    density[k] = terms.qv_density;
  }
  MartingaleSeries s;
  s.times = path.times;
  const Vec integral = cumulative_trapezoid(path.times, drift);
  s.predicted_qv = cumulative_trapezoid(path.times, density);
  s.values.resize(m);
  for (std::size_t k = 0; k < m; ++k) s.values[k] = (level[k] - level[0]) - integral[k];
  return s;
}

MartingaleSeries build_M_G(const MeasurePath& path, const Functional& G, const Functional* F, double alpha) {
  check_dimension(G.dimension(), path.dimension, "build_M_G");
  if (F != nullptr) check_dimension(F->dimension(), path.dimension, "build_M_G");
  if (G.smoothness().k < 2) throw std::domain_error("build_M_G: G needs two measure derivatives");
  const std::size_t m = path.times.size();
  Vec level(m);
  Vec drift(m);
  Vec density(m);
  for (std::size_t k = 0; k < m; ++k) {
    const AtomicMeasure mu = empirical_measure(path, k);
    level[k] = G.value(mu);
    const auto terms = functional_generator(mu, G, F, alpha);
    drift[k] = terms.drift();
    density[k] = terms.qv_density;
  }
  MartingaleSeries s;
  s.times = path.times;
  const Vec integral = cumulative_trapezoid(path.times, drift);
  s.predicted_qv = cumulative_trapezoid(path.times, density);
  s.values.resize(m);
  for (std::size_t k = 0; k < m; ++k) s.values[k] = (level[k] - level[0]) - integral[k];
  return s;
}

double ito_drift_oracle(const MeasurePath& path, const Functional& G, const Functional* F, double alpha,
                        std::size_t k) {
  const auto* cyl = dynamic_cast<const CylindricalFunctional*>(&G);
  if (cyl == nullptr) throw std::invalid_argument("ito_drift_oracle: G must be cylindrical");
  check_dimension(G.dimension(), path.dimension, "ito_drift_oracle");
  const double sigma2 = static_cast<double>(path.n) / path.mass;
  if (!(std::abs(alpha - sigma2) <= 1e-9 * sigma2))
    throw std::invalid_argument("ito_drift_oracle: alpha must equal n/b of the path");

  const auto d = static_cast<std::size_t>(path.dimension);
  const auto& inner = cyl->inner();
  const std::size_t p = inner.size();
  const AtomicMeasure mu = empirical_measure(path, k);
  const Vec gF = drift_gradients(mu, F);
  const double w = path.particle_weight();

  // Drift and bracket of each coordinate z_q = w sum_i phi_q(X^i).
  Vec z(p, 0.0);
  Vec dz(p, 0.0);
  Vec bracket(p * p, 0.0);
  for (std::size_t i = 0; i < path.n; ++i) {
    const auto x = path.position(k, i);
    std::vector<Vec> grads(p);
    for (std::size_t q = 0; q < p; ++q) {
      grads[q] = inner[q].gradient(x);
      double transport = 0.0;
      for (std::size_t c = 0; c < d; ++c) transport -= grads[q][c] * gF[i * d + c];
      z[q] += w * inner[q].eval(x);
      dz[q] += w * (transport + 0.5 * sigma2 * inner[q].laplacian(x));
    }
    for (std::size_t q = 0; q < p; ++q) {
      for (std::size_t r = 0; r < p; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += grads[q][c] * grads[r][c];
        bracket[q * p + r] += w * w * sigma2 * dot;
      }
    }
  }
  const Vec grad = cyl->outer().gradient(z);
  const Vec hess = cyl->outer().hessian(z);
  double out = 0.0;
  for (std::size_t q = 0; q < p; ++q) out += grad[q] * dz[q];
  for (std::size_t q = 0; q < p * p; ++q) out += 0.5 * hess[q] * bracket[q];
  return out;
}

double realized_qv(const MartingaleSeries& series) {
  return series.values.empty() ? 0.0 : realized_qv(series, series.values.size() - 1);
}

double realized_qv(const MartingaleSeries& series, std::size_t upto) {
  if (upto >= series.values.size()) throw std::out_of_range("realized_qv: index out of range");
  double s = 0.0;
  for (std::size_t k = 0; k < upto; ++k) {
    const double dm = series.values[k + 1] - series.values[k];
    s += dm * dm;
  }
  return s;
}

double cross_variation(const MartingaleSeries& a, const MartingaleSeries& b) {
  if (a.times != b.times || a.values.size() != b.values.size())
    throw std::invalid_argument("cross_variation: series are on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < a.values.size(); ++k)
    s += (a.values[k + 1] - a.values[k]) * (b.values[k + 1] - b.values[k]);
  return s;
}

double predicted_cross(const MeasurePath& path, const SmoothFunction& phi, const Functional& G) {
  check_dimension(phi.dimension(), path.dimension, "predicted_cross");
  check_dimension(G.dimension(), path.dimension, "predicted_cross");
  const auto d = static_cast<std::size_t>(path.dimension);
  const std::size_t m = path.times.size();
  Vec density(m, 0.0);
  Vec gG(path.n * d);
  for (std::size_t k = 0; k < m; ++k) {
    const AtomicMeasure mu = empirical_measure(path, k);
    G.first_derivative_gradients(mu, mu.locations(), gG);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const Vec g = phi.gradient(mu.location(i));
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += g[c] * gG[i * d + c];
      density[k] += mu.weight(i) * dot;
    }
  }
  return m == 0 ? 0.0 : cumulative_trapezoid(path.times, density).back();
}

MartingaleSample sample_at(const MartingaleSeries& series, std::size_t k) {
  if (k >= series.values.size()) throw std::out_of_range("sample_at: index out of range");
  return {series.values[k], series.predicted_qv[k], realized_qv(series, k)};
}

std::size_t time_index(const Vec& times, double t) {
  if (times.empty()) throw std::invalid_argument("time_index: empty grid");
  const double slack = 1e-9 * std::max(1.0, std::abs(times.back()));
  if (t < times.front() - slack || t > times.back() + slack) throw std::out_of_range("time_index: t outside grid");
  std::size_t best = 0;
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
  return best;
}

std::pair<double, double> mean_and_se(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

MartingaleReport martingale_test(std::span<const MartingaleSample> samples, const MartingaleThresholds& thr) {
  if (samples.size() < 30) throw std::invalid_argument("martingale_test: need at least 30 paths");
  MartingaleReport r;
  r.paths = samples.size();
  Vec values(samples.size());
  double realized = 0.0;
  double predicted = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    values[i] = samples[i].value;
    realized += samples[i].realized_qv;
    predicted += samples[i].predicted_qv;
  }
  std::tie(r.mean, r.se) = mean_and_se(values);
  if (r.se > 0.0) {
    r.z = r.mean / r.se;
  } else {
    r.z = r.mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.mean);
  }
  r.realized_qv = realized / static_cast<double>(samples.size());
  r.predicted_qv = predicted / static_cast<double>(samples.size());
  r.qv_relative = r.predicted_qv >= thr.qv_abs_tol;
  const double diff = std::abs(r.realized_qv - r.predicted_qv);
  r.qv_error = r.qv_relative ? diff / r.predicted_qv : diff;
  const double qv_tol = r.qv_relative ? thr.qv_rel_tol : thr.qv_abs_tol;
  r.pass = std::abs(r.z) <= thr.z_max && r.qv_error <= qv_tol;
  return r;
}

MartingaleReport martingale_test(std::span<const MartingaleSeries> ensemble, double t,
                                 const MartingaleThresholds& thr) {
  if (ensemble.empty()) throw std::invalid_argument("martingale_test: empty ensemble");
  const std::size_t k = time_index(ensemble.front().times, t);
  std::vector<MartingaleSample> samples;
  samples.reserve(ensemble.size());
  for (const auto& s : ensemble) samples.push_back(sample_at(s, k));
  return martingale_test(samples, thr);
}

double girsanov_log_weight(const MeasurePath& path, const Functional& G, const Functional* F_base, double alpha) {
  const MartingaleSeries s = build_M_G(path, G, F_base, alpha);
  const double lw = -s.values.back() - 0.5 * s.predicted_qv.back();
  if (!std::isfinite(lw)) throw std::domain_error("girsanov_log_weight: non-finite log-weight");
  return lw;
}

double girsanov_weight(const MeasurePath& path, const Functional& G, const Functional* F_base, double alpha) {
  const double w = std::exp(girsanov_log_weight(path, G, F_base, alpha));
  if (!std::isfinite(w) || !(w > 0.0)) throw std::domain_error("girsanov_weight: weight is not a positive finite number");
  return w;
}

WeightedEnsemble make_weighted_ensemble(const SimConfig& config, FunctionalPtr G, unsigned threads) {
  validate(config);
  struct Item {
    Vec positions;
    double weight = 1.0;
  };
  const auto items = parallel_map<Item>(config.n_paths, threads, [&](std::size_t i) {
    const MeasurePath path = simulate_path(config, i);
    Item item;
    const auto x = path.snapshot(path.steps());
    item.positions.assign(x.begin(), x.end());
    if (G) item.weight = girsanov_weight(path, *G, config.drift.get(), config.alpha);
    return item;
  });
  WeightedEnsemble e;
  e.G = std::move(G);
  e.F_base = config.drift;
  const auto report = check_admissibility(config.initial, config.alpha, config.admissibility_tol);
  const double w = report.mass / static_cast<double>(report.n);
  for (const auto& item : items) {
    e.final_measures.emplace_back(config.dimension, item.positions, Vec(static_cast<std::size_t>(report.n), w));
    e.weights.push_back(item.weight);
  }
  return e;
}

Estimate reweighted_expectation(const Observable& observable, const WeightedEnsemble& ensemble) {
  if (ensemble.final_measures.size() != ensemble.weights.size())
    throw std::invalid_argument("reweighted_expectation: one weight per path required");
  Estimate e;
  e.paths = ensemble.weights.size();
  if (e.paths == 0) return e;
  Vec products(e.paths);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < e.paths; ++i) {
    products[i] = ensemble.weights[i] * observable(ensemble.final_measures[i]);
    weight_sum += ensemble.weights[i];
  }
  std::tie(e.estimate, e.se) = mean_and_se(products);
  e.mean_weight = weight_sum / static_cast<double>(e.paths);
  double product_sum = 0.0;
  for (double v : products) product_sum += v;
  e.self_normalized = product_sum / weight_sum;
  return e;
}

}  // namespace dk
