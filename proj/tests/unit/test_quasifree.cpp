#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "thermal/quasifree.hpp"

using namespace thermal;
using doctest::Approx;

namespace {

TestVector random_real(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> c(n);
  for (auto& v : c) v = g(rng);
  return TestVector::real(c);
}

TestVector random_complex(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> c(n);
  for (auto& v : c) v = {g(rng), g(rng)};
  return TestVector(c);
}

}  // namespace

TEST_CASE("weyl expectation") {
  const auto sys = DiagonalSystem::from_frequencies({1.0}, 1.0);
  CHECK(weyl_expectation(sys, TestVector::zero(1)) == 1.0);
  // frozen from exp(-1/4 (1 + 2 oracle::bose(1)))
  CHECK(weyl_expectation(sys, TestVector::unit(1, 0)) == Approx(0.5821725756700977).epsilon(1e-14));
  const auto cold = DiagonalSystem::from_frequencies({1.0}, 800.0);
  CHECK(weyl_expectation(cold, TestVector::unit(1, 0, std::sqrt(2.0))) ==
        Approx(0.6065306597126334).epsilon(1e-14));
}

TEST_CASE("two-point function R") {
  const auto sys = DiagonalSystem::from_frequencies({0.7, 1.9, 3.1}, 1.3);
  std::mt19937_64 rng(1);
  const auto x = random_complex(3, rng);
  const auto y = random_complex(3, rng);
  CHECK(std::abs(two_point_R(sys, {0.4, 0.2}, TestVector::zero(3), y)) == 0.0);

  // t = 0, x = y: (1 + 2 rho) |x|^2 mode by mode
  const auto bf = bose_factor(sys);
  double expected = 0.0;
  for (std::size_t j = 0; j < 3; ++j) expected += bf.thermal_weight[j] * std::norm(x[j]);
  CHECK(two_point_R(sys, 0.0, x, x).real() == Approx(expected).epsilon(1e-13));

  const cplx edge = two_point_R(sys, {0.0, sys.beta()}, x, y);
  const cplx swapped = two_point_R(sys, 0.0, y, x);
  CHECK(std::abs(edge - swapped) <= 1e-12);
  for (double t : {-0.8, 0.3, 2.5}) {
    const cplx a = two_point_R(sys, {t, sys.beta()}, x, y);
    const cplx b = two_point_R(sys, {-t, 0.0}, y, x);
    CHECK(std::abs(a - b) <= 1e-12);
  }
  CHECK_THROWS_AS(two_point_R(sys, {0.0, -0.1}, x, y), std::domain_error);
  CHECK_THROWS_AS(two_point_R(sys, {0.0, 1.5}, x, y), std::domain_error);
}

TEST_CASE("periodic covariance") {
  CHECK(periodic_cov(0.0, 1.0, 1.0) == Approx(2.163953413738653).epsilon(1e-14));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double a = 0.2 + 5 * u(rng), beta = 0.3 + 4 * u(rng), s = 3 * (u(rng) - 0.5) * beta;
    CHECK(periodic_cov(s, a, beta) == Approx(oracle::mode_kernel(s, a, beta)).epsilon(1e-12));
    CHECK(periodic_cov(s, a, beta) == Approx(periodic_cov(-s, a, beta)).epsilon(1e-13));
    CHECK(periodic_cov(s, a, beta) == Approx(periodic_cov(beta - s, a, beta)).epsilon(1e-13));
  }
}

TEST_CASE("Euclidean covariance C") {
  const auto sys = DiagonalSystem::from_frequencies({1.0}, 1.0);
  const auto e = TestVector::unit(1, 0);
  CHECK(euclid_cov_C(sys, 0.0, e, e) == Approx(1.0819767068693265).epsilon(1e-14));
  CHECK(euclid_cov_C(sys, 0.0, e, e) == Approx(0.5 * (1 + 2 * oracle::bose(1.0))).epsilon(1e-14));

  const auto sys2 = DiagonalSystem::from_frequencies({1.0}, 2.0);
  // frozen from 1/2 oracle::mode_kernel(1, 1, 2)
  CHECK(euclid_cov_C(sys2, 1.0, e, e) == Approx(0.4254590641196608).epsilon(1e-14));

  const auto multi = DiagonalSystem::from_frequencies({0.5, 1.0, 2.5, 4.0}, 1.7);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_real(4, rng), y = random_real(4, rng);
    const double s = 1.7 * (i + 0.5) / 20.0;
    CHECK(euclid_cov_C(multi, s, x, y) == Approx(euclid_cov_C(multi, 1.7 - s, x, y)).epsilon(1e-12));
    CHECK(euclid_cov_C(multi, s, x, y) == Approx(euclid_cov_C(multi, s, y, x)).epsilon(1e-14));
  }
  // monotone decay on [0, beta/2]
  const auto x = random_real(4, rng);
  double prev = euclid_cov_C(multi, 0.0, x, x);
  for (int i = 1; i <= 20; ++i) {
    const double cur = euclid_cov_C(multi, 0.85 * i / 20.0, x, x);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK_THROWS_AS(euclid_cov_C(multi, 0.1, random_complex(4, rng), x), std::invalid_argument);
}

TEST_CASE("Green's functions of Weyl words") {
  const auto sys = DiagonalSystem::from_frequencies({0.8, 1.6}, 1.2);
  std::mt19937_64 rng(5);
  const auto x = random_real(2, rng), y = random_real(2, rng);

  const auto zero_word = WeylWord::with_times({{0.3, TestVector::zero(2)}, {1.1, TestVector::zero(2)}});
  CHECK(std::abs(greens_weyl(sys, zero_word) - 1.0) == 0.0);
  const auto single = WeylWord::with_times({{0.7, x}});
  CHECK(greens_weyl(sys, single).real() == Approx(weyl_expectation(sys, x)).epsilon(1e-14));
  CHECK(euclid_greens_weyl(sys, WeylWord::euclidean({0.4}, {x})) ==
        Approx(weyl_expectation(sys, x)).epsilon(1e-14));

  // equal-time pair against Gaussian MC of phi(x), phi(y) with covariance C(0)
  const double vxx = euclid_cov_C(sys, 0, x, x), vyy = euclid_cov_C(sys, 0, y, y);
  const double vxy = euclid_cov_C(sys, 0, x, y);
  const auto [mean, err] =
      oracle::bivariate_mc(vxx, vyy, vxy, 400000, 77, [](double a, double b) { return std::cos(a + b); });
  const cplx exact = greens_weyl(sys, WeylWord::with_times({{0.0, x}, {0.0, y}}));
  CHECK(std::abs(exact.imag()) < 1e-14);
  CHECK(std::abs(exact.real() - mean) < 5 * err);

  // Euclidean value for n=2, a=1, beta=2, s=(0,1)
  const auto one = DiagonalSystem::from_frequencies({1.0}, 2.0);
  const auto e = TestVector::unit(1, 0);
  const double c0 = 0.5 * oracle::mode_kernel(0, 1, 2), c1 = 0.5 * oracle::mode_kernel(1, 1, 2);
  CHECK(euclid_greens_weyl(one, WeylWord::euclidean({0.0, 1.0}, {e, e})) ==
        Approx(std::exp(-c0 - c1)).epsilon(1e-13));
  CHECK_THROWS(euclid_greens_weyl(one, WeylWord::euclidean({0.0, 2.5}, {e, e})));
  CHECK_THROWS(WeylWord::euclidean({1.0, 0.5}, {e, e}));
}

TEST_CASE("Euclidean words continue real-time words") {
  const auto sys = DiagonalSystem::from_frequencies({0.6, 1.3, 2.2}, 1.5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    std::vector<double> s(n);
    for (auto& v : s) v = 1.5 * u(rng);
    std::sort(s.begin(), s.end());
    std::vector<TestVector> args;
    std::vector<WeylFactor> factors;
    for (int i = 0; i < n; ++i) {
      args.push_back(random_real(3, rng));
      factors.push_back({cplx(0.0, s[i]), args.back()});
    }
    const double euclid = euclid_greens_weyl(sys, WeylWord::euclidean(s, args));
    const cplx cont = greens_weyl(sys, WeylWord::with_times(factors));
    CHECK(euclid > 0.0);
    CHECK(std::abs(cont - euclid) <= 1e-10 * euclid);
  }
}

TEST_CASE("KMS and time reversal") {
  const auto sys = DiagonalSystem::from_frequencies({0.9, 2.0}, 0.8);
  std::mt19937_64 rng(7);
  const auto x = random_complex(2, rng), y = random_complex(2, rng);
  CHECK(kms_residual(sys, TestVector::zero(2), y, 0.4) == 0.0);
  CHECK(kms_residual(sys, x, y, 0.3) <= 1e-10);
  CHECK(kms_residual(sys, x, y, 0.3, 0.4) > 1e-3);

  const auto xr = random_real(2, rng), yr = random_real(2, rng);
  CHECK(time_reversal_check(sys, xr, yr, 0.0) == 0.0);
  CHECK(time_reversal_check(sys, xr, yr, 1.7) <= 1e-10);
  const auto charged = build_charged(ModeGrid{1.0, 0, 1.0}, 1.0, 0.0);
  const TestVector xc(std::vector<cplx>{{0.3, 0.4}, {0.3, -0.4}});
  const TestVector yc(std::vector<cplx>{{-0.2, 0.9}, {-0.2, -0.9}});
  CHECK(time_reversal_check(charged, xc, yc, 0.9) <= 1e-10);
}

TEST_CASE("charged non-positivity witness") {
  const ModeGrid grid{1.0, 1, 1.0};
  const TestVector u(std::vector<cplx>{{1.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}});
  const TestVector v(std::vector<cplx>{{0.0, 1.0}, {1.0, 0.0}, {0.0, -0.5}});
  const auto zero = build_charged(grid, 1.0, 0.0);
  CHECK(std::abs(charged_nonpositivity_witness(zero, u, v, 0.25).imag()) <= 1e-12);
  const auto hot = build_charged(grid, 1.0, 0.1);
  CHECK(std::abs(charged_nonpositivity_witness(hot, u, v, 0.25).imag()) > 1e-6);
  CHECK(std::abs(charged_nonpositivity_witness(hot, u, u, 0.0).imag()) <= 1e-12);
  CHECK_THROWS(charged_nonpositivity_witness(build_neutral(grid, 1.0), u, v, 0.25));
}
