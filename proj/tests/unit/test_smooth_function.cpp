#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "../support/oracles.hpp"
#include "dk/rng.hpp"
#include "dk/sampling.hpp"
#include "dk/smooth_function.hpp"

using namespace dk;

namespace {

std::vector<SmoothFunction> catalog(int d) {
  std::vector<SmoothFunction> out;
  Vec c(d), k(d), r(d);
  for (int i = 0; i < d; ++i) {
    c[i] = 0.1 * (i + 1);
    k[i] = 1.0 + 0.5 * i;
    r[i] = 1.5 + 0.25 * i;
  }
  out.push_back(SmoothFunction::constant(d, 2.5));
  out.push_back(SmoothFunction::gaussian_bump(c, 0.8, 1.7));
  out.push_back(SmoothFunction::cosine_wave(k, 0.9, 0.4));
  out.push_back(SmoothFunction::compact_bump_product(c, r, 1.2));
  out.push_back(SmoothFunction::plateau_product(d, 0.5, 1.5));
  out.push_back(SmoothFunction::affine(k, -0.3));
  out.push_back(SmoothFunction::quadratic(c, 0.7));
  return out;
}

}  // namespace

TEST_CASE("closed-form values") {
  const auto g = SmoothFunction::gaussian_bump({1.0}, 2.0, 3.0);
  CHECK(g(std::vector<double>{1.0}) == 3.0);
  CHECK(g(std::vector<double>{3.0}) == doctest::Approx(3.0 * std::exp(-0.5)).epsilon(1e-15));
  const auto w = SmoothFunction::cosine_wave({2.0, 0.0}, 1.5, 0.25);
  CHECK(w(std::vector<double>{0.5, 9.0}) == doctest::Approx(1.5 * std::cos(1.25)).epsilon(1e-15));
  const auto b = SmoothFunction::compact_bump_product({0.0}, {1.0}, 2.0);
  CHECK(b(std::vector<double>{0.0}) == 2.0);
  CHECK(b(std::vector<double>{0.5}) == doctest::Approx(2.0 * std::exp(1.0 - 1.0 / 0.75)).epsilon(1e-14));
  CHECK(b(std::vector<double>{1.0}) == 0.0);
  CHECK(b(std::vector<double>{-3.0}) == 0.0);
  const auto q = SmoothFunction::quadratic({1.0, -1.0}, 0.5);
  CHECK(q(std::vector<double>{2.0, 1.0}) == 2.5);
  CHECK(q.laplacian(std::vector<double>{7.0, 3.0}) == 2.0);
  const auto a = SmoothFunction::affine({2.0, -1.0}, 0.5);
  CHECK(a(std::vector<double>{1.0, 1.0}) == 1.5);
}

TEST_CASE("gradients and Laplacians agree with central differences") {
  rng::Stream s(2024);
  for (int d : {1, 2, 3}) {
    for (const auto& f : catalog(d)) {
      CAPTURE(to_string(f.kind()));
      CAPTURE(d);
      const oracle::Field field = [&](const Vec& x) { return f(x); };
      for (int trial = 0; trial < 25; ++trial) {
        const Vec x = random_point(s, d, -1.6, 1.6);
        const Vec g = f.gradient(x);
        const Vec gn = oracle::gradient(field, x);
        for (int k = 0; k < d; ++k) CHECK(oracle::close(g[k], gn[k], 1e-6));
        CHECK(oracle::close(f.laplacian(x), oracle::laplacian(field, x), 2e-4));
      }
    }
  }
}

TEST_CASE("reported bounds dominate sampled values") {
  rng::Stream s(7);
  for (int d : {1, 2}) {
    for (const auto& f : catalog(d)) {
      CAPTURE(to_string(f.kind()));
      for (int trial = 0; trial < 400; ++trial) {
        const Vec x = random_point(s, d, -3.0, 3.0);
        CHECK(std::abs(f(x)) <= f.bound());
        double g2 = 0.0;
        for (double v : f.gradient(x)) g2 += v * v;
        CHECK(std::sqrt(g2) <= f.gradient_bound());
        CHECK(std::abs(f.laplacian(x)) <= f.laplacian_bound());
      }
    }
  }
  CHECK(std::isinf(SmoothFunction::affine({1.0}).bound()));
  CHECK(std::isinf(SmoothFunction::quadratic({0.0}).gradient_bound()));
}

TEST_CASE("compact kinds vanish exactly outside their support") {
  rng::Stream s(8);
  for (const auto& f : {SmoothFunction::compact_bump_product({0.2, -0.1}, {0.5, 0.8}, 1.0),
                        SmoothFunction::plateau_product(2, 1.0, 2.0)}) {
    const auto box = f.support();
    REQUIRE(box.has_value());
    for (int trial = 0; trial < 500; ++trial) {
      const Vec x = random_point(s, 2, -4.0, 4.0);
      if (box->contains(x)) continue;
      CHECK(f(x) == 0.0);
      CHECK(f.gradient(x) == Vec{0.0, 0.0});
      CHECK(f.laplacian(x) == 0.0);
    }
  }
  CHECK_FALSE(SmoothFunction::gaussian_bump({0.0}, 1.0).support().has_value());
}

TEST_CASE("plateau is one on the inner cube and within [0, 1]") {
  const auto p = SmoothFunction::plateau_product(2, 1.0, 2.0);
  CHECK(p(std::vector<double>{1.0, -1.0}) == 1.0);
  CHECK(p(std::vector<double>{0.3, 0.9}) == 1.0);
  CHECK(p.gradient(std::vector<double>{0.3, 0.9}) == Vec{0.0, 0.0});
  rng::Stream s(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = p(random_point(s, 2, -2.5, 2.5));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(SmoothFunction::plateau_product(1, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("evenness") {
  CHECK(SmoothFunction::gaussian_bump({0.0}, 1.0).is_even());
  CHECK_FALSE(SmoothFunction::gaussian_bump({0.5}, 1.0).is_even());
  CHECK(SmoothFunction::cosine_wave({1.0}, 1.0, 0.0).is_even());
  CHECK_FALSE(SmoothFunction::cosine_wave({1.0}, 1.0, 0.3).is_even());
  CHECK(SmoothFunction::constant(2, 1.0).is_even());
  CHECK(SmoothFunction::plateau_product(1, 0.5, 1.0).is_even());
}

TEST_CASE("kind names round-trip") {
  for (const auto& f : catalog(1)) CHECK(smooth_kind_from_string(to_string(f.kind())) == f.kind());
  CHECK_FALSE(smooth_kind_from_string("nope").has_value());
}

TEST_CASE("invalid parameters and dimensions") {
  CHECK_THROWS_AS(SmoothFunction::gaussian_bump({0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SmoothFunction::compact_bump_product({0.0}, {-1.0}), std::invalid_argument);
  const auto g = SmoothFunction::gaussian_bump({0.0, 0.0}, 1.0);
  CHECK_THROWS_AS(g(std::vector<double>{1.0}), std::invalid_argument);
}
