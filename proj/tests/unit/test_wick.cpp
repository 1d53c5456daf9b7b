#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "thermal/pathspace.hpp"
#include "thermal/quasifree.hpp"
#include "thermal/wick.hpp"

using namespace thermal;
using doctest::Approx;

TEST_CASE("low-degree Wick powers") {
  for (double y : {-1.7, 0.0, 0.4, 2.3})
    for (double c : {0.0, 0.5, 1.9}) {
      CHECK(wick_power(y, 0, c) == 1.0);
      CHECK(wick_power(y, 1, c) == y);
      CHECK(wick_power(y, 2, c) == Approx(y * y - c).epsilon(1e-15));
      CHECK(wick_power(y, 3, c) == Approx(y * y * y - 3 * c * y).epsilon(1e-15));
      CHECK(wick_power(y, 4, c) == Approx(std::pow(y, 4) - 6 * c * y * y + 3 * c * c).epsilon(1e-14));
    }
}

TEST_CASE("Wick powers match the Hermite recurrence") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double y = u(rng), c = std::abs(u(rng));
    const int n = i % 12;
    const double ref = oracle::hermite(y, n, c);
    CHECK(wick_power(y, n, c) == Approx(ref).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS(wick_power(1.0, max_wick_degree + 1, 1.0));
  CHECK(factorial(5) == 120.0);
}

TEST_CASE("Wick exponential") {
  CHECK(wick_exp(1.3, 0.0, 2.0) == 1.0);
  CHECK(wick_exp(0.0, 1.0, 2.0) == Approx(0.36787944117144233).epsilon(1e-15));
  for (double y : {-2.0, -0.5, 0.7, 2.0})
    for (double c : {0.0, 1.0, 2.0})
      for (double alpha : {-1.0, 0.5, 1.0})
        CHECK(std::abs(wick_exp_series(y, alpha, c, max_wick_degree) - wick_exp(y, alpha, c)) <= 1e-10);
}

TEST_CASE("reordering") {
  WickPolynomial p{{0.3, -1.2, 0.8, 0.5, 2.0}, 0.7};
  const auto same = reorder(p, 0.7);
  for (std::size_t j = 0; j < p.coeffs.size(); ++j) CHECK(same.coeffs[j] == Approx(p.coeffs[j]).epsilon(1e-15));

  // :y^2:_{1.5} = :y^2:_{0.4} - (1.5 - 0.4)
  const WickPolynomial sq{{0, 0, 1}, 1.5};
  const auto moved = reorder(sq, 0.4);
  CHECK(moved.coeffs[2] == Approx(1.0));
  CHECK(moved.coeffs[1] == Approx(0.0));
  CHECK(moved.coeffs[0] == Approx(-(1.5 - 0.4)).epsilon(1e-15));

  const auto there = reorder(p, 2.1);
  const auto back = reorder(there, 0.7);
  for (std::size_t j = 0; j < p.coeffs.size(); ++j) CHECK(std::abs(back.coeffs[j] - p.coeffs[j]) <= 1e-12);
  CHECK(there.coeffs.back() == p.coeffs.back());
  CHECK(there.degree() == p.degree());
  for (double y : {-1.0, 0.2, 1.6}) CHECK(there(y) == Approx(p(y)).epsilon(1e-12));

  // linearity
  WickPolynomial q{{1.0, 0.0, -0.3, 0.0, 0.1}, 0.7};
  WickPolynomial sum{{}, 0.7};
  for (std::size_t j = 0; j < 5; ++j) sum.coeffs.push_back(p.coeffs[j] + 2.0 * q.coeffs[j]);
  const auto rs = reorder(sum, 1.3), rp = reorder(p, 1.3), rq = reorder(q, 1.3);
  for (std::size_t j = 0; j < 5; ++j) CHECK(rs.coeffs[j] == Approx(rp.coeffs[j] + 2.0 * rq.coeffs[j]).epsilon(1e-12));

  const auto mono = to_monomials(WickPolynomial{{0, 0, 0, 0, 1}, 2.0});
  CHECK(mono[4] == 1.0);
  CHECK(mono[2] == Approx(-12.0));
  CHECK(mono[0] == Approx(12.0));
}

TEST_CASE("bounded-below validation") {
  CHECK_NOTHROW(WickPolynomial({{0, 0, 0, 0, 1.0}, 1.0}).validate_bounded_below());
  CHECK_THROWS(WickPolynomial({{0, 0, 0, 1.0}, 1.0}).validate_bounded_below());
  CHECK_THROWS(WickPolynomial({{0, 0, -1.0}, 1.0}).validate_bounded_below());
}

TEST_CASE("Gaussian pairings") {
  CHECK(pair_inner(0, 1.0, 2.0, 0.3) == 1.0);
  CHECK(pair_inner(1, 1.0, 2.0, 0.3) == Approx(0.3));
  CHECK(pair_inner(3, 1.0, 1.0, 0.5) == Approx(0.75));
  const auto [mean, err] = oracle::bivariate_mc(1.0, 1.0, 0.5, 400000, 13, [](double y, double z) {
    return oracle::hermite(y, 3, 1.0) * oracle::hermite(z, 3, 1.0);
  });
  CHECK(std::abs(mean - 0.75) < 5 * err);

  // cross-degree pairings vanish; orderings away from the true variances are handled by reordering
  const WickPolynomial a{{0.5, 1.0, 0.0, 2.0}, 0.3};
  const WickPolynomial b{{0.0, 0.0, 1.0}, 1.1};
  const double exact = wick_pair_expectation(a, b, 1.2, 0.9, 0.4);
  const auto [m2, e2] = oracle::bivariate_mc(1.2, 0.9, 0.4, 400000, 14, [&](double y, double z) { return a(y) * b(z); });
  CHECK(std::abs(exact - m2) < 5 * e2);
}

TEST_CASE("complex Wick powers") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double m = u(rng), c = u(rng);
    const int n = i % 7;
    CHECK(complex_wick_power(m, n, c) == Approx(oracle::complex_hermite(m, n, c)).epsilon(1e-10).scale(1.0));
  }
  const std::vector<double> coeffs{0.2, -0.4, 0.0, 1.0};
  const auto moved = reorder_complex(coeffs, 0.5, 1.7);
  const auto back = reorder_complex(moved, 1.7, 0.5);
  for (std::size_t j = 0; j < coeffs.size(); ++j) CHECK(std::abs(back[j] - coeffs[j]) <= 1e-12);
  for (double m : {0.1, 1.0, 2.5}) {
    double lhs = 0, rhs = 0;
    for (int n = 0; n < 4; ++n) {
      lhs += coeffs[n] * complex_wick_power(m, n, 0.5);
      rhs += moved[n] * complex_wick_power(m, n, 1.7);
    }
    CHECK(lhs == Approx(rhs).epsilon(1e-12));
  }

  // E[:|psi|^{2n}: :|psi'|^{2n}:] against MC with psi = (g1 + i g2)/sqrt(2)
  std::mt19937_64 g(5);
  std::normal_distribution<double> nd;
  const double rho = 0.6;
  double s = 0, ss = 0;
  const int samples = 400000;
  for (int i = 0; i < samples; ++i) {
    const double a1 = nd(g), a2 = nd(g), b1 = nd(g), b2 = nd(g);
    const double x1 = a1, x2 = a2;
    const double y1 = rho * a1 + std::sqrt(1 - rho * rho) * b1, y2 = rho * a2 + std::sqrt(1 - rho * rho) * b2;
    const double v = complex_wick_power(0.5 * (x1 * x1 + x2 * x2), 2, 1.0) *
                     complex_wick_power(0.5 * (y1 * y1 + y2 * y2), 2, 1.0);
    s += v;
    ss += v * v;
  }
  const double mean = s / samples, err = std::sqrt((ss / samples - mean * mean) / samples);
  CHECK(std::abs(mean - complex_pair_inner(2, rho)) < 5 * err);
  CHECK(complex_pair_inner(2, rho) == Approx(4.0 * std::pow(rho, 4)));
}

TEST_CASE("thermal Wick powers have zero mean on sampled paths") {
  const auto sys = DiagonalSystem::from_frequencies({1.0}, 1.0);
  SamplerOptions opt;
  opt.n_samples = 50000;
  opt.n_mats = 8192;
  opt.seed = 31;
  const auto e = sample_paths(sys, TimeGrid{1.0, 4}, opt);
  const double c = 0.5 * oracle::mode_kernel(0.0, 1.0, 1.0);
  for (int n = 1; n <= 4; ++n) {
    double s = 0, ss = 0;
    for (std::size_t i = 0; i < e.n_samples(); ++i) {
      const double v = wick_power(e(i, 0, 0), n, c);
      s += v;
      ss += v * v;
    }
    const double mean = s / e.n_samples();
    const double err = std::sqrt((ss / e.n_samples() - mean * mean) / e.n_samples());
    CHECK(std::abs(mean) < 5 * err);
  }
}
