#pragma once

// Martingales of the measure-valued martingale problem along simulated paths,
// their brackets, and Girsanov reweighting of path ensembles.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dk/dynamics.hpp"
#include "dk/functional.hpp"
#include "dk/measure.hpp"
#include "dk/smooth_function.hpp"

namespace dk {

/// M(t_k) and the predicted bracket Q(t_k) along one path.
struct MartingaleSeries {
  Vec times;
  Vec values;
  Vec predicted_qv;
  std::string quadrature = "trapezoid";
};

/// Pointwise drift of G(mu_t) split into its parts, and the bracket density.
///
/// For the dynamics dX = -grad dF/dmu dt + sqrt(n/b) dw:
///   laplacian = (alpha/2) <Lap dG/dmu, mu>
///   transport = -<grad dG/dmu . grad dF/dmu, mu>
///   second_order = 1/2 <div_x div_y d2G/dmu2 at y = x, mu>
///   qv_density = <|grad dG/dmu|^2, mu>
struct GeneratorTerms {
  double laplacian = 0.0;
  double transport = 0.0;
  double second_order = 0.0;
  double qv_density = 0.0;
  double drift() const { return laplacian + transport + second_order; }
};

/// Terms for G(mu) = <phi, mu>.
GeneratorTerms phi_generator(const AtomicMeasure& mu, const SmoothFunction& phi, const Functional* F, double alpha);
/// Terms for a general G with two measure derivatives.
GeneratorTerms functional_generator(const AtomicMeasure& mu, const Functional& G, const Functional* F, double alpha);

/// M_phi(t) = <phi,mu_t> - <phi,mu_0> - int_0^t drift ds, trapezoidal in time.
MartingaleSeries build_M_phi(const MeasurePath& path, const SmoothFunction& phi, const Functional* F, double alpha);
/// M^G(t) = G(mu_t) - G(mu_0) - int_0^t drift ds, trapezoidal in time.
MartingaleSeries build_M_G(const MeasurePath& path, const Functional& G, const Functional* F, double alpha);

/// Drift of f(<phi_1,mu_t>, ..., <phi_p,mu_t>) at grid index k computed by the
/// finite-dimensional Ito formula over the particle coordinates of the path.
/// G must be cylindrical and alpha must equal the path's n/b.
double ito_drift_oracle(const MeasurePath& path, const Functional& G, const Functional* F, double alpha,
                        std::size_t k);

/// sum_k (M(t_{k+1}) - M(t_k))^2 up to grid index `upto` (default: all).
double realized_qv(const MartingaleSeries& series);
double realized_qv(const MartingaleSeries& series, std::size_t upto);
/// sum_k dA_k dB_k; throws if the grids differ.
double cross_variation(const MartingaleSeries& a, const MartingaleSeries& b);
/// Trapezoidal int_0^T <grad phi . grad dG/dmu, mu_s> ds.
double predicted_cross(const MeasurePath& path, const SmoothFunction& phi, const Functional& G);

/// Per-path endpoint summary used by ensemble tests.
struct MartingaleSample {
  double value = 0.0;         // M(t)
  double predicted_qv = 0.0;  // Q(t)
  double realized_qv = 0.0;   // sum of squared increments up to t
};

MartingaleSample sample_at(const MartingaleSeries& series, std::size_t k);
/// Grid index whose time is closest to t; throws if t is outside the grid.
std::size_t time_index(const Vec& times, double t);

struct MartingaleThresholds {
  double z_max = 3.0;
  double qv_rel_tol = 0.05;
  double qv_abs_tol = 1e-8;  // used when the mean predicted bracket is below it
};

struct MartingaleReport {
  std::size_t paths = 0;
  double mean = 0.0;
  double se = 0.0;
  double z = 0.0;
  double realized_qv = 0.0;
  double predicted_qv = 0.0;
  double qv_error = 0.0;  // relative, or absolute when predicted_qv < qv_abs_tol
  bool qv_relative = true;
  bool pass = false;
};

/// z = mean / SE of M(t) over paths (0 when both vanish); passes when |z| and
/// the bracket error are within thresholds. Needs at least 30 samples.
MartingaleReport martingale_test(std::span<const MartingaleSample> samples, const MartingaleThresholds& thr = {});
MartingaleReport martingale_test(std::span<const MartingaleSeries> ensemble, double t,
                                 const MartingaleThresholds& thr = {});

/// log E^G(T) = -M^G(T) - 1/2 [M^G]_T along a path simulated with drift F_base.
/// Under the reweighted law the particle drift becomes -grad d(F_base+G)/dmu.
double girsanov_log_weight(const MeasurePath& path, const Functional& G, const Functional* F_base, double alpha);
/// exp of the log weight; throws std::domain_error when it is not finite.
double girsanov_weight(const MeasurePath& path, const Functional& G, const Functional* F_base, double alpha);

using Observable = std::function<double(const AtomicMeasure&)>;

/// Final measures of an ensemble with one positive weight per path.
struct WeightedEnsemble {
  std::vector<AtomicMeasure> final_measures;
  Vec weights;
  FunctionalPtr G;
  FunctionalPtr F_base;
};

/// Simulates config (drift = F_base) and weights every path by E^G(T).
/// Only final measures are kept. G = null gives unit weights.
WeightedEnsemble make_weighted_ensemble(const SimConfig& config, FunctionalPtr G, unsigned threads = 1);

struct Estimate {
  double estimate = 0.0;  // sum_i w_i Phi_i / N
  double se = 0.0;
  double mean_weight = 0.0;
  double self_normalized = 0.0;  // sum_i w_i Phi_i / sum_i w_i
  std::size_t paths = 0;
};

Estimate reweighted_expectation(const Observable& observable, const WeightedEnsemble& ensemble);

/// Sample mean and standard error (n-1 normalization), summed in index order.
std::pair<double, double> mean_and_se(std::span<const double> values);

}  // namespace dk
