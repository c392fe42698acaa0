#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "../support/oracles.hpp"
#include "dk/functional.hpp"
#include "dk/rng.hpp"
#include "dk/sampling.hpp"

using namespace dk;

namespace {

FunctionalPtr interaction(int d) {
  Vec zero(d, 0.0), k(d, 1.0);
  return make_interaction(SmoothFunction::gaussian_bump(zero, 1.0, 1.0), SmoothFunction::cosine_wave(k, 0.8, 0.2));
}

FunctionalPtr cylindrical(int d) {
  Vec c(d, 0.3), k(d, 1.5);
  return make_cylindrical(OuterMap::saturated_quadratic({1.0, 0.4, 0.4, -0.5}, {0.5, 1.0}, 0.1, 2.0),
                          {SmoothFunction::gaussian_bump(c, 0.9), SmoothFunction::cosine_wave(k, 1.0, 0.1)});
}

FunctionalPtr product_cylindrical(int d) {
  Vec c(d, -0.2);
  return make_cylindrical(OuterMap::product({{OuterMap::Factor::Kind::sine, 1.0, 2.0, 0.3},
                                             {OuterMap::Factor::Kind::tanh, 0.5, 1.5, 0.0}}),
                          {SmoothFunction::gaussian_bump(c, 1.1), SmoothFunction::compact_bump_product(c, Vec(d, 2.0))});
}

std::vector<FunctionalPtr> families(int d) {
  return {interaction(d), cylindrical(d), product_cylindrical(d),
          make_sum(interaction(d), cylindrical(d)), make_constant(d, 2.0)};
}

}  // namespace

TEST_CASE("interaction functional closed forms") {
  // F(mu) = 1/2 sum_ij w_i w_j V1(x_i - x_j) + sum_i w_i V2(x_i), diagonal included.
  const auto V1 = SmoothFunction::gaussian_bump({0.0}, 1.0);
  const auto V2 = SmoothFunction::cosine_wave({1.0});
  const auto F = make_interaction(V1, V2);
  AtomicMeasure mu(1, {0.0, 1.0}, {0.5, 1.5});
  const double e = std::exp(-0.5);
  const double expected = 0.5 * (0.25 + 2 * 0.75 * e + 2.25) + 0.5 * 1.0 + 1.5 * std::cos(1.0);
  CHECK(F->value(mu) == doctest::Approx(expected).epsilon(1e-15));
  const Vec x{0.3};
  const double first = 0.5 * std::exp(-0.045) + 1.5 * std::exp(-0.245) + std::cos(0.3);
  CHECK(F->first_derivative(mu, x) == doctest::Approx(first).epsilon(1e-14));
  CHECK(F->second_derivative(mu, x, Vec{-0.7}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  // mixed divergence of V1(x - y) at y = x is -Lap V1(0) = 1/w^2 for a unit gaussian.
  CHECK(F->mixed_divergence_at_diagonal(mu, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(F->first_derivative_bound(2.0).value() == doctest::Approx(3.0));
}

TEST_CASE("interaction needs an even pair potential") {
  CHECK_THROWS_AS(make_interaction(SmoothFunction::gaussian_bump({0.5}, 1.0), SmoothFunction::constant(1, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("cylindrical functional closed forms") {
  const auto phi = SmoothFunction::gaussian_bump({0.0}, 1.0);
  const auto G = make_cylindrical(OuterMap::quadratic({1.0}, {0.0}), {phi});
  AtomicMeasure mu(1, {0.0, 2.0}, {1.0, 1.0});
  const double z = 1.0 + std::exp(-2.0);
  CHECK(G->value(mu) == doctest::Approx(z * z).epsilon(1e-15));
  CHECK(G->first_derivative(mu, Vec{1.0}) == doctest::Approx(2 * z * std::exp(-0.5)).epsilon(1e-15));
  CHECK(G->second_derivative(mu, Vec{1.0}, Vec{0.0}) == doctest::Approx(2 * std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("first derivative: one-sided quotients converge at first order") {
  rng::Stream s(11);
  for (int d : {1, 2}) {
    for (const auto& F : families(d)) {
      if (F->family() == "constant") continue;
      CAPTURE(F->family());
      for (int trial = 0; trial < 10; ++trial) {
        const auto mu = random_measure(s, d, 4, -1, 1, 1.0);
        const Vec x = random_point(s, d, -1, 1);
        const double exact = F->first_derivative(mu, x);
        // The quotient error is eps/2 F''(x, x) + O(eps^2).
        const double lead = 0.5 * F->second_derivative(mu, x, x);
        Vec eps, err;
        for (double e = 1e-3; e > 1e-4; e *= 0.5) {
          const double q = fd_first_derivative(*F, mu, x, e);
          eps.push_back(e);
          err.push_back(std::abs(q - exact));
          CHECK(std::abs(q - exact - lead * e) <= 10.0 * e * e);
        }
        if (err.back() < 1e-11) continue;
        CHECK(oracle::log_slope(eps, err) >= 0.9);
        CHECK(std::abs(richardson_first_derivative(*F, mu, x, 1e-2, 3) - exact) < 1e-6 * (1 + std::abs(exact)));
      }
    }
  }
}

TEST_CASE("quadratic families: second quotient and two-level extrapolation are exact") {
  rng::Stream s(12);
  const auto quad = make_cylindrical(OuterMap::quadratic({1.0, 0.3, 0.3, 2.0}, {1.0, -2.0}, 0.5),
                                     {SmoothFunction::gaussian_bump({0.0}, 1.0), SmoothFunction::cosine_wave({2.0})});
  for (const auto& F : {interaction(1), quad}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto mu = random_measure(s, 1, 3, -1, 1, 1.0);
      const Vec x = random_point(s, 1, -1, 1), y = random_point(s, 1, -1, 1);
      const double f2 = F->second_derivative(mu, x, y);
      CHECK(std::abs(fd_second_derivative(*F, mu, x, y, 0.25) - f2) < 1e-12 * (1 + std::abs(f2)) * 100);
      const double f1 = F->first_derivative(mu, x);
      CHECK(std::abs(richardson_first_derivative(*F, mu, x, 0.25, 2) - f1) < 1e-12 * (1 + std::abs(f1)) * 100);
    }
  }
}

TEST_CASE("second derivative: quotients converge and the kernel is symmetric") {
  rng::Stream s(13);
  for (int d : {1, 2}) {
    for (const auto& F : families(d)) {
      CAPTURE(F->family());
      for (int trial = 0; trial < 8; ++trial) {
        const auto mu = random_measure(s, d, 3, -1, 1, 1.0);
        const Vec x = random_point(s, d, -1, 1), y = random_point(s, d, -1, 1);
        const double f2 = F->second_derivative(mu, x, y);
        CHECK(f2 == doctest::Approx(F->second_derivative(mu, y, x)).epsilon(1e-13));
        CHECK(std::abs(fd_second_derivative(*F, mu, x, y, 1e-3) - f2) < 2e-2 * (1 + std::abs(f2)));
      }
    }
  }
}

TEST_CASE("spatial derivatives of the measure derivatives match central differences") {
  rng::Stream s(14);
  for (int d : {1, 2}) {
    for (const auto& F : families(d)) {
      CAPTURE(F->family());
      for (int trial = 0; trial < 6; ++trial) {
        const auto mu = random_measure(s, d, 3, -1, 1, 1.0);
        const Vec x = random_point(s, d, -1, 1), y = random_point(s, d, -1, 1);
        const oracle::Field first = [&](const Vec& p) { return F->first_derivative(mu, p); };
        const Vec g = F->first_derivative_gradient(mu, x);
        const Vec gn = oracle::gradient(first, x);
        for (int k = 0; k < d; ++k) CHECK(oracle::close(g[k], gn[k], 1e-7));
        CHECK(oracle::close(F->first_derivative_laplacian(mu, x), oracle::laplacian(first, x), 1e-4));

        const oracle::Field second = [&](const Vec& p) { return F->second_derivative(mu, p, y); };
        const Vec g2 = F->second_derivative_gradient(mu, x, y);
        const Vec g2n = oracle::gradient(second, x);
        for (int k = 0; k < d; ++k) CHECK(oracle::close(g2[k], g2n[k], 1e-7));

        // sum_k d/dy_k of (d/dx_k F''(x, y)) at y = x
        double mixed = 0.0;
        const double h = 1e-5;
        for (int k = 0; k < d; ++k) {
          Vec yp = x, ym = x;
          yp[k] += h;
          ym[k] -= h;
          mixed += (F->second_derivative_gradient(mu, x, yp)[k] - F->second_derivative_gradient(mu, x, ym)[k]) / (2 * h);
        }
        CHECK(oracle::close(F->mixed_divergence_at_diagonal(mu, x), mixed, 1e-6));
      }
    }
  }
}

TEST_CASE("batched gradients equal pointwise gradients") {
  rng::Stream s(15);
  for (const auto& F : families(2)) {
    const auto mu = random_measure(s, 2, 5, -1, 1, 1.0);
    Vec out(mu.size() * 2);
    F->first_derivative_gradients(mu, mu.locations(), out);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const Vec g = F->first_derivative_gradient(mu, mu.location(i));
      CHECK(out[2 * i] == doctest::Approx(g[0]).epsilon(1e-14));
      CHECK(out[2 * i + 1] == doctest::Approx(g[1]).epsilon(1e-14));
    }
  }
}

TEST_CASE("sum functional adds every derivative") {
  rng::Stream s(16);
  const auto A = interaction(1), B = cylindrical(1);
  const auto S = make_sum(A, B);
  const auto mu = random_measure(s, 1, 3, -1, 1, 1.0);
  const Vec x{0.2}, y{-0.4};
  CHECK(S->value(mu) == doctest::Approx(A->value(mu) + B->value(mu)));
  CHECK(S->first_derivative_laplacian(mu, x) ==
        doctest::Approx(A->first_derivative_laplacian(mu, x) + B->first_derivative_laplacian(mu, x)));
  CHECK(S->second_derivative(mu, x, y) == doctest::Approx(A->second_derivative(mu, x, y) + B->second_derivative(mu, x, y)));
  CHECK_THROWS_AS(make_sum(interaction(1), interaction(2)), std::invalid_argument);
}

TEST_CASE("smoothness tags gate derivative access") {
  const InteractionFunctional F1(SmoothFunction::gaussian_bump({0.0}, 1.0), SmoothFunction::constant(1, 0.0),
                                 Smoothness{1, 2});
  AtomicMeasure mu(1, {0.0}, {1.0});
  CHECK_NOTHROW(F1.first_derivative(mu, Vec{0.0}));
  CHECK_THROWS_AS(F1.second_derivative(mu, Vec{0.0}, Vec{0.0}), std::domain_error);
  CHECK_THROWS_AS(F1.mixed_divergence_at_diagonal(mu, Vec{0.0}), std::domain_error);
}

TEST_CASE("dimension checks") {
  const auto F = interaction(2);
  AtomicMeasure mu1(1, {0.0}, {1.0});
  AtomicMeasure mu2(2, {0.0, 0.0}, {1.0});
  CHECK_THROWS_AS(F->value(mu1), std::invalid_argument);
  CHECK_THROWS_AS(F->first_derivative(mu2, Vec{0.0}), std::invalid_argument);
}

TEST_CASE("zero and constant functionals") {
  const auto Z = make_zero(1);
  const auto C = make_constant(1, 3.0);
  AtomicMeasure mu(1, {0.5}, {2.0});
  CHECK(Z->family() == "zero");
  CHECK(C->family() == "constant");
  CHECK(C->value(mu) == 3.0);
  CHECK(C->first_derivative(mu, Vec{0.0}) == 0.0);
  CHECK(C->second_derivative(mu, Vec{0.0}, Vec{1.0}) == 0.0);
  CHECK(C->first_derivative_gradient(mu, Vec{0.0}) == Vec{0.0});
}
