// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dk/bernstein.hpp"
#include "dk/dynamics.hpp"
#include "dk/parallel.hpp"
#include "dk/rng.hpp"
#include "dk/sampling.hpp"
#include "dk/stochastic_lab.hpp"

using namespace dk;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

AtomicMeasure equal_atoms(int d, const Vec& locations, double mass) {
  const std::size_t n = locations.size() / static_cast<std::size_t>(d);
  return AtomicMeasure(d, locations, Vec(n, mass / static_cast<double>(n)));
}

Vec spread(std::size_t n, int d, double lo, double hi) {
  Vec loc(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c)
      loc[i * d + c] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return loc;
}

FunctionalPtr reference_interaction(int d) {
  return make_interaction(SmoothFunction::gaussian_bump(Vec(d, 0.0), 1.0, 1.0),
                          SmoothFunction::cosine_wave(Vec(d, 1.0), 1.0));
}

// ---------------------------------------------------------------- criteria

Outcome admissibility_table() {
  int agree = 0, cases = 0;
  for (double b : {0.5, 1.0, 2.0})
    for (bool integral : {true, false})
      for (bool equal : {true, false}) {
        const double alpha = (integral ? 3.0 : 3.5) / b;
        const Vec loc{-1.0, 0.0, 1.0};
        const AtomicMeasure nu = equal ? equal_atoms(1, loc, b) : AtomicMeasure(1, loc, {0.2 * b, 0.3 * b, 0.5 * b});
        const bool expected = integral && equal;
        const auto r = check_admissibility(nu, alpha);
        const bool reason_ok = expected ? r.reason == AdmissibilityReason::ok && r.n == 3
                                        : r.reason != AdmissibilityReason::ok && r.n == 0;
        agree += (r.admissible == expected && reason_ok) ? 1 : 0;
        ++cases;
      }
  return {agree == cases && cases == 12, format("%d/%d cases agree", agree, cases)};
}

Outcome mass_conservation() {
  struct Case {
    int d;
    std::size_t n;
    double b;
  };
  std::size_t checked = 0, broken = 0;
  for (const Case& c : {Case{1, 3, 0.3}, Case{2, 5, 1.7}, Case{2, 4, 2.0}}) {
    SimConfig s;
    s.dimension = c.d;
    s.alpha = static_cast<double>(c.n) / c.b;
    s.initial = equal_atoms(c.d, spread(c.n, c.d, -1.0, 1.0), c.b);
    s.drift = reference_interaction(c.d);
    s.t_final = 0.5;
    s.dt = 0.005;
    s.n_paths = 20;
    s.master_seed = 11;
    for (const auto& p : simulate(s, 1)) {
      const double m0 = total_mass(empirical_measure(p, 0));
      for (std::size_t k = 0; k <= p.steps(); ++k) {
        ++checked;
        if (total_mass(empirical_measure(p, k)) != m0) ++broken;
      }
    }
  }
  return {broken == 0, format("%zu snapshots, %zu with a different mass", checked, broken)};
}

Outcome martingale_structure() {
  SimConfig s;
  s.dimension = 1;
  s.alpha = 8.0;
  s.initial = equal_atoms(1, spread(8, 1, -1.0, 1.0), 1.0);
  s.drift = reference_interaction(1);
  s.t_final = 0.5;
  s.dt = 5e-4;
  s.n_paths = 2000;
  s.master_seed = 20240611;
  validate(s);
  const auto phi = SmoothFunction::gaussian_bump({0.0}, 1.0);
  const auto samples = parallel_map<MartingaleSample>(s.n_paths, 1, [&](std::size_t i) {
    const auto series = build_M_phi(simulate_path(s, i), phi, s.drift.get(), s.alpha);
    return sample_at(series, series.values.size() - 1);
  });
  const auto r = martingale_test(samples);
  const bool pass = std::abs(r.z) <= 3.0 && r.qv_error <= 0.05;
  return {pass, format("z=%.3f, qv realized=%.5g predicted=%.5g rel.err=%.4f", r.z, r.realized_qv, r.predicted_qv,
                       r.qv_error)};
}

Outcome ito_formula() {
  rng::Stream stream(404);
  double worst = 0.0;
  int points = 0;
  for (int d : {1, 2}) {
    SimConfig s;
    s.dimension = d;
    s.alpha = 5.0 / 1.25;
    s.initial = equal_atoms(d, spread(5, d, -1.0, 1.0), 1.25);
    s.drift = reference_interaction(d);
    s.t_final = 0.5;
    s.dt = 0.005;
    s.n_paths = 10;
    s.master_seed = 12;
    const auto paths = simulate(s, 1);
    const auto G = make_cylindrical(OuterMap::quadratic({1.0}, {0.0}), {SmoothFunction::gaussian_bump(Vec(d, 0.2), 0.8)});
    for (int trial = 0; trial < 50; ++trial, ++points) {
      const auto& p = paths[stream.below(paths.size())];
      const std::size_t k = stream.below(p.times.size());
      const double oracle = ito_drift_oracle(p, *G, s.drift.get(), s.alpha, k);
      const double drift = functional_generator(empirical_measure(p, k), *G, s.drift.get(), s.alpha).drift();
      worst = std::max(worst, std::abs(drift - oracle) / (1.0 + std::abs(oracle)));
    }
  }
  return {worst <= 1e-10, format("%d points, max rel.err=%.3g", points, worst)};
}

Outcome girsanov() {
  SimConfig base;
  base.dimension = 1;
  base.alpha = 4.0;
  base.initial = equal_atoms(1, {-0.75, -0.25, 0.25, 0.75}, 1.0);
  base.t_final = 0.5;
  base.dt = 1e-3;
  base.n_paths = 2000;
  base.master_seed = 7;
  const auto F = reference_interaction(1);
  SimConfig direct = base;
  direct.drift = F;
  direct.master_seed = 8;
  const auto phi = SmoothFunction::gaussian_bump({0.0}, 1.0);
  const Observable obs = [&](const AtomicMeasure& mu) { return integrate(phi, mu); };
  const auto weighted = make_weighted_ensemble(base, F, 1);
  const auto plain = make_weighted_ensemble(direct, nullptr, 1);
  const auto ones = reweighted_expectation([](const AtomicMeasure&) { return 1.0; }, weighted);
  const auto rw = reweighted_expectation(obs, weighted);
  const auto dr = reweighted_expectation(obs, plain);
  const double z_weight = (ones.mean_weight - 1.0) / ones.se;
  const double z_cmp = (rw.estimate - dr.estimate) / std::hypot(rw.se, dr.se);
  return {std::abs(z_weight) <= 3.0 && std::abs(z_cmp) <= 3.0,
          format("mean weight=%.4f (z=%.2f); reweighted=%.5f direct=%.5f (z=%.2f)", ones.mean_weight, z_weight,
                 rw.estimate, dr.estimate, z_cmp)};
}

Outcome drift_free_variance() {
  struct Case {
    std::size_t n;
    double b, T;
  };
  double sxy = 0.0, sxx = 0.0;
  std::string detail;
  for (const Case& c : {Case{2, 1.0, 0.5}, Case{4, 2.0, 0.5}, Case{3, 0.5, 0.5}, Case{8, 1.0, 0.25}}) {
    SimConfig s;
    s.dimension = 2;
    s.alpha = static_cast<double>(c.n) / c.b;
    s.initial = equal_atoms(2, spread(c.n, 2, -1.0, 1.0), c.b);
    s.drift = make_zero(2);
    s.t_final = c.T;
    s.dt = c.T / 100.0;
    s.n_paths = 2000;
    s.master_seed = 13;
    const auto d = static_cast<std::size_t>(s.dimension);
    // Displacements X(T) - X(0), pooled over paths, particles and coordinates.
    const auto moments = parallel_map<std::pair<double, double>>(s.n_paths, 1, [&](std::size_t i) {
      const auto p = simulate_path(s, i);
      const auto start = p.snapshot(0), end = p.snapshot(p.steps());
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t j = 0; j < c.n * d; ++j) {
        const double u = end[j] - start[j];
        m1 += u;
        m2 += u * u;
      }
      return std::pair{m1, m2};
    });
    double m1 = 0.0, m2 = 0.0;
    for (const auto& [a, b] : moments) {
      m1 += a;
      m2 += b;
    }
    const double count = static_cast<double>(s.n_paths * c.n * d);
    const double var = (m2 - m1 * m1 / count) / (count - 1.0);
    const double x = static_cast<double>(c.n) / c.b * c.T;
    sxy += x * var;
    sxx += x * x;
    detail += format("(%zu,%g,%g): %.4f/%.4f ", c.n, c.b, c.T, var, x);
  }
  const double slope = sxy / sxx;
  return {std::abs(slope - 1.0) <= 0.05, format("slope=%.4f; ", slope) + detail};
}

Outcome bernstein_rate() {
  double worst = 0.0;
  for (int n : {4, 8, 16, 32}) {
    const BernsteinGrid grid(Box::cube(1, 0.0, 1.0), n);
    const auto B = bernstein_operator(grid, [](std::span<const double> x) { return x[0] * x[0]; });
    double sup = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = i / 2000.0;
      sup = std::max(sup, std::abs(B(Vec{x}) - x * x));
    }
    worst = std::max(worst, std::abs(sup - 0.25 / n));
  }
  return {worst <= 1e-12, format("max |sup err - 1/(4n)|=%.3g", worst)};
}

Outcome bernstein_convergence() {
  rng::Stream stream(808);
  std::vector<AtomicMeasure> measures;
  for (int i = 0; i < 20; ++i) measures.push_back(random_measure(stream, 1, 1 + stream.below(6), 0.0, 1.0, 1.0));
  std::vector<Vec> points;
  for (int i = 0; i <= 20; ++i) points.push_back({i / 20.0});
  const auto F = make_interaction(SmoothFunction::gaussian_bump({0.0}, 0.5), SmoothFunction::cosine_wave({3.0}, 1.0, 0.2));
  const int degrees[] = {4, 8, 16, 32};
  const auto rows = convergence_table(F, Box::cube(1, 0.0, 1.0), degrees, measures, points);
  const auto& lo = rows.front();
  const auto& hi = rows.back();
  const bool shrink = hi.sup_err_F < lo.sup_err_F && hi.sup_err_F1 < lo.sup_err_F1 && hi.sup_err_F2 < lo.sup_err_F2;

  const auto g = SmoothFunction::cosine_wave({4.0}, 1.0, 0.5);
  double mass_err = 0.0, duality_err = 0.0;
  for (int n : degrees) {
    const BernsteinGrid grid(Box::cube(1, 0.0, 1.0), n);
    const auto Bg = bernstein_operator(grid, [&](std::span<const double> x) { return g(x); });
    for (const auto& mu : measures) {
      const auto chi = discretize_measure(grid, mu);
      mass_err = std::max(mass_err, std::abs(total_mass(chi) - total_mass(mu)) / total_mass(mu));
      duality_err = std::max(duality_err, std::abs(integrate(g, chi) - integrate(Bg, mu)));
    }
  }
  return {shrink && mass_err <= 1e-12 && duality_err <= 1e-10,
          format("n=4 -> 32: F %.3g->%.3g, F' %.3g->%.3g, F'' %.3g->%.3g; mass %.2g; duality %.2g", lo.sup_err_F,
                 hi.sup_err_F, lo.sup_err_F1, hi.sup_err_F1, lo.sup_err_F2, hi.sup_err_F2, mass_err, duality_err)};
}

double fit_slope(const Vec& x, const Vec& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Outcome derivative_oracles() {
  struct Family {
    FunctionalPtr F;
    bool quadratic;
  };
  const std::vector<Family> families = {
      {make_interaction(SmoothFunction::gaussian_bump({0.0}, 1.0), SmoothFunction::cosine_wave({1.0}, 0.8, 0.2)), true},
      {make_cylindrical(OuterMap::quadratic({1.0, 0.3, 0.3, 2.0}, {1.0, -2.0}, 0.5),
                        {SmoothFunction::gaussian_bump({0.0}, 1.0), SmoothFunction::cosine_wave({2.0})}),
       true},
      {make_cylindrical(OuterMap::saturated_quadratic({1.0, 0.4, 0.4, -0.5}, {0.5, 1.0}, 0.1, 2.0),
                        {SmoothFunction::gaussian_bump({0.3}, 0.9), SmoothFunction::cosine_wave({1.5}, 1.0, 0.1)}),
       false},
      {make_cylindrical(OuterMap::product({{OuterMap::Factor::Kind::sine, 1.0, 2.0, 0.3},
                                           {OuterMap::Factor::Kind::tanh, 0.5, 1.5, 0.0}}),
                        {SmoothFunction::gaussian_bump({-0.2}, 1.1), SmoothFunction::compact_bump_product({-0.2}, {2.0})}),
       false},
  };
  rng::Stream stream(909);
  const Vec ladder{1e-3, 5e-4, 2.5e-4, 1.25e-4};
  double min_slope = INFINITY, exact_err = 0.0;
  int triples = 0, resolved = 0;
  for (int trial = 0; trial < 50; ++trial, ++triples) {
    const auto& fam = families[trial % families.size()];
    const auto mu = random_measure(stream, 1, 1 + stream.below(5), -1.0, 1.0, 1.0);
    const Vec x = random_point(stream, 1, -1.0, 1.0), y = random_point(stream, 1, -1.0, 1.0);
    const double d1 = fam.F->first_derivative(mu, x);
    const double d2 = fam.F->second_derivative(mu, x, y);
    Vec err1;
    for (double e : ladder) err1.push_back(std::abs(fd_first_derivative(*fam.F, mu, x, e) - d1));
    if (err1.back() > 1e-11) {
      min_slope = std::min(min_slope, fit_slope(ladder, err1));
      ++resolved;
    }
    if (fam.quadratic) {
      for (double e : {0.5, 0.1, 1e-2})
        exact_err = std::max(exact_err, std::abs(fd_second_derivative(*fam.F, mu, x, y, e) - d2) / (1.0 + std::abs(d2)));
    } else {
      Vec err2;
      for (double e : ladder) err2.push_back(std::abs(fd_second_derivative(*fam.F, mu, x, y, e) - d2));
      if (err2.back() > 1e-9) min_slope = std::min(min_slope, fit_slope(ladder, err2));
    }
  }
  return {min_slope >= 0.9 && exact_err <= 1e-9 && resolved > 0,
          format("%d triples; min order %.3f; quadratic-family second quotient max rel.err %.2g", triples, min_slope,
                 exact_err)};
}

double richardson(const std::function<double(double)>& quotient, double eps, int levels) {
  std::vector<double> t(levels);
  for (int i = 0; i < levels; ++i) t[i] = quotient(eps / std::ldexp(1.0, i));
  for (int j = 1; j < levels; ++j) {
    const double f = std::ldexp(1.0, j);
    for (int i = levels - 1; i >= j; --i) t[i] = (f * t[i] - t[i - 1]) / (f - 1.0);
  }
  return t[levels - 1];
}

Outcome cutoff_calculus() {
  rng::Stream stream(1010);
  double worst = 0.0;
  std::size_t nonzero_outside = 0, outside = 0;
  for (int d : {1, 2}) {
    const auto psi = build_cutoff(2, d);
    const auto F = make_interaction(SmoothFunction::gaussian_bump(Vec(d, 0.0), 0.8),
                                    SmoothFunction::cosine_wave(Vec(d, 1.3), 1.0, 0.4));
    const auto Gamma = cutoff_functional(psi, F);
    // Composition evaluated directly: weights multiplied by psi at each atom,
    // atoms where psi vanishes dropped.
    auto composed = [&](const AtomicMeasure& mu) {
      AtomicMeasure theta(d);
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const double w = mu.weight(i) * psi(mu.location(i));
        if (w > 0.0) theta.add_atom(mu.location(i), w);
      }
      return F->value(theta);
    };
    for (int trial = 0; trial < 25; ++trial) {
      const auto mu = random_measure(stream, d, 1 + stream.below(5), -2.5, 2.5, 1.0);
      const Vec x = random_point(stream, d, -1.95, 1.95);
      const double base = composed(mu);
      const double fd = richardson(
          [&](double e) {
            AtomicMeasure bumped = mu;
            bumped.add_atom(x, e);
            return (composed(bumped) - base) / e;
          },
          1e-2, 4);
      const double formula = F->first_derivative(cutoff_measure(psi, mu), x) * psi(x);
      const double scale = std::max(1.0, std::abs(formula));
      worst = std::max({worst, std::abs(fd - formula) / scale,
                        std::abs(Gamma->first_derivative(mu, x) - formula) / scale});
      Vec far(d, 0.0);
      far[trial % d] = (trial % 2 == 0 ? 1.0 : -1.0) * (2.0 + 3.0 * stream.uniform());
      ++outside;
      const Vec g = Gamma->first_derivative_gradient(mu, far);
      bool zero = Gamma->first_derivative(mu, far) == 0.0 && Gamma->first_derivative_laplacian(mu, far) == 0.0 &&
                  Gamma->second_derivative(mu, far, x) == 0.0 && Gamma->mixed_divergence_at_diagonal(mu, far) == 0.0;
      for (double v : g) zero = zero && v == 0.0;
      if (!zero) ++nonzero_outside;
    }
  }
  return {worst <= 1e-6 && nonzero_outside == 0,
          format("max rel.err %.3g; %zu/%zu outside points exactly zero", worst, outside - nonzero_outside, outside)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"admissibility table", admissibility_table},
      {"mass conservation", mass_conservation},
      {"martingale structure", martingale_structure},
      {"Ito formula", ito_formula},
      {"Girsanov reweighting", girsanov},
      {"drift-free variance", drift_free_variance},
      {"Bernstein classical rate", bernstein_rate},
      {"Bernstein lift convergence", bernstein_convergence},
      {"derivative oracles", derivative_oracles},
      {"cutoff calculus", cutoff_calculus},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
