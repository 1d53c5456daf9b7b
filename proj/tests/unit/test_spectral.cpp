#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "thermal/spectral.hpp"

using namespace thermal;
using doctest::Approx;

TEST_CASE("dispersion values") {
  CHECK(dispersion(0.0, 1.0) == 1.0);
  CHECK(dispersion(3.0, 4.0) == 5.0);
  CHECK(dispersion(1.0, 1.0) == Approx(1.4142135623730951).epsilon(1e-15));
  const ModeGrid grid{0.3, 5, 0.7};
  for (double e : dispersion(grid)) CHECK(e >= grid.mass);
}

TEST_CASE("grid invariants") {
  CHECK_THROWS(ModeGrid{0.0, 2, 1.0}.validate());
  CHECK_THROWS(ModeGrid{1.0, -1, 1.0}.validate());
  CHECK_THROWS(ModeGrid{1.0, 2, 0.0}.validate());
  const ModeGrid grid{0.5, 3, 1.0};
  const auto k = grid.momenta();
  REQUIRE(k.size() == 7);
  for (std::size_t j = 0; j < k.size(); ++j) CHECK(k[j] == -k[k.size() - 1 - j]);
  CHECK(grid.box_length() == Approx(4.0 * std::numbers::pi));
}

TEST_CASE("bose occupation") {
  CHECK(bose_occupation(std::log(2.0)) == Approx(1.0).epsilon(1e-14));
  // frozen from oracle::bose(1)
  CHECK(bose_occupation(1.0) == Approx(0.5819767068693265).epsilon(1e-14));
  CHECK(bose_occupation(1.0) == Approx(oracle::bose(1.0)).epsilon(1e-14));
  CHECK(bose_occupation(1e4) == 0.0);
  CHECK(std::isfinite(bose_occupation(1e308)));
}

TEST_CASE("thermal weight equals coth") {
  const ModeGrid grid{0.37, 6, 0.8};
  for (double beta : {0.1, 1.0, 7.0}) {
    const auto sys = build_neutral(grid, beta);
    const auto bf = bose_factor(sys);
    for (std::size_t j = 0; j < sys.size(); ++j) {
      const double coth = 1.0 / std::tanh(0.5 * beta * sys.frequency(j));
      CHECK(bf.thermal_weight[j] == Approx(coth).epsilon(1e-12));
      CHECK(bf.rho[j] > 0.0);
    }
  }
}

TEST_CASE("neutral system frequencies") {
  const auto single = build_neutral(ModeGrid{1.0, 0, 1.0}, 1.0);
  REQUIRE(single.size() == 1);
  CHECK(single.frequency(0) == 1.0);

  const auto three = build_neutral(ModeGrid{1.0, 1, 1.0}, 1.0);
  REQUIRE(three.size() == 3);
  CHECK(three.frequency(0) == Approx(1.0));
  CHECK(three.frequency(1) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(three.frequency(2) == Approx(std::sqrt(2.0)).epsilon(1e-15));

  for (int m = 0; m < 6; ++m) CHECK(build_neutral(ModeGrid{0.5, m, 1.0}, 2.0).size() == std::size_t(2 * m + 1));
}

TEST_CASE("charged system occupations") {
  const auto sys = DiagonalSystem::charged({1.0}, 1.0, 0.5);
  REQUIRE(sys.size() == 2);
  const auto bf = bose_factor(sys);
  // frozen from oracle::bose(0.5), oracle::bose(1.5)
  CHECK(bf.rho[0] == Approx(1.5414940825367982).epsilon(1e-13));
  CHECK(bf.rho[1] == Approx(0.2872169167888683).epsilon(1e-13));
  CHECK(bf.rho[0] == Approx(oracle::bose(0.5)).epsilon(1e-14));
  CHECK(bf.rho[1] == Approx(oracle::bose(1.5)).epsilon(1e-14));
  CHECK(sys.charges()[0] == 1);
  CHECK(sys.charges()[1] == -1);

  const ModeGrid grid{0.5, 2, 1.0};
  const auto zero = build_charged(grid, 1.0, 0.0);
  const auto bz = bose_factor(zero);
  const std::size_t d = zero.block_size();
  for (std::size_t j = 0; j < d; ++j) CHECK(bz.rho[j] == bz.rho[d + j]);

  CHECK_THROWS_AS(build_charged(grid, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(build_charged(grid, 1.0, -1.2), std::domain_error);
}

TEST_CASE("kappa is an involution") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  const ModeGrid grid{0.5, 3, 1.0};
  for (const auto& sys : {build_neutral(grid, 1.0), build_charged(grid, 1.0, 0.3)}) {
    std::vector<cplx> c(sys.size());
    for (auto& v : c) v = {n(rng), n(rng)};
    const TestVector x(c);
    const TestVector back = kappa(sys, kappa(sys, x));
    for (std::size_t j = 0; j < x.size(); ++j) CHECK(back[j] == x[j]);
  }
}

TEST_CASE("time-zero embedding") {
  const ModeGrid grid{1.0, 0, 1.0};
  const auto sys = build_neutral(grid, 1.0);
  const std::vector<cplx> zero{0.0};
  const auto z = kg_time_zero_embedding(grid, sys, zero);
  CHECK(z[0] == cplx(0.0));
  const std::vector<cplx> one{1.0};
  const auto x = kg_time_zero_embedding(grid, sys, one);
  // 1 / (sqrt(2) 2 pi)
  CHECK(x[0].real() == Approx(0.11253953951963826).epsilon(1e-14));
  CHECK(x[0].imag() == 0.0);

  const ModeGrid wide{0.4, 5, 1.3};
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  std::vector<double> u(wide.size());
  for (auto& v : u) v = n(rng);
  const auto neutral = build_neutral(wide, 1.0);
  CHECK(is_kappa_real(neutral, kg_time_zero_embedding_lattice(wide, neutral, u), 1e-14));
  const auto charged = build_charged(wide, 1.0, 0.2);
  CHECK(is_kappa_real(charged, kg_time_zero_embedding_lattice(wide, charged, u), 1e-14));
  CHECK_THROWS(kg_time_zero_embedding(wide, neutral, one));
}

TEST_CASE("real-mode map preserves the inner product") {
  const ModeGrid grid{0.5, 4, 1.0};
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n;
  std::vector<cplx> f(grid.size()), g(grid.size());
  for (auto& v : f) v = {n(rng), n(rng)};
  for (auto& v : g) v = {n(rng), n(rng)};
  cplx direct = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) direct += std::conj(f[j]) * g[j] * grid.delta_k;
  const TestVector x(to_real_modes(grid, f)), y(to_real_modes(grid, g));
  const cplx mapped = inner(x, y);
  CHECK(mapped.real() == Approx(direct.real()).epsilon(1e-13));
  CHECK(mapped.imag() == Approx(direct.imag()).epsilon(1e-13));
}
