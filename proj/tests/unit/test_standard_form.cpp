#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "thermal/standard_form.hpp"

using namespace thermal;
using doctest::Approx;

namespace {

FiniteKmsSystem two_level() {
  FiniteKmsSystem s;
  s.hamiltonian = Eigen::MatrixXcd::Zero(2, 2);
  s.hamiltonian(1, 1) = 1.0;
  s.beta = 1.0;
  s.potential = Eigen::VectorXd::Zero(2);
  return s;
}

Eigen::MatrixXcd random_operator(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

}  // namespace

TEST_CASE("vectorization conventions") {
  std::mt19937_64 rng(1);
  const auto a = random_operator(3, rng), b = random_operator(3, rng), x = random_operator(3, rng);
  CHECK((unvectorize(vectorize(x), 3) - x).norm() == 0.0);
  CHECK(vectorize(x)(1) == x(0, 1));
  const auto form = gns_build(random_kms_system(3, 1.0, 2));
  CHECK((form.left(a) * vectorize(x) - vectorize(a * x)).norm() <= 1e-12);
  CHECK((unvectorize(form.apply_j(vectorize(x)), 3) - x.adjoint()).norm() <= 1e-14);
  CHECK((form.apply_j(form.apply_j(vectorize(b))) - vectorize(b)).norm() <= 1e-14);
  const Eigen::MatrixXcd p = form.swap();
  CHECK((p * p - Eigen::MatrixXcd::Identity(9, 9)).norm() == 0.0);
}

TEST_CASE("two-level Gibbs vector") {
  const auto form = gns_build(two_level());
  const double z = std::sqrt(1.0 + std::exp(-1.0));
  Eigen::VectorXcd expected(4);
  expected << 1.0 / z, 0.0, 0.0, std::exp(-0.5) / z;
  CHECK((form.omega() - expected).norm() <= 1e-15);
  CHECK(std::abs(form.state(Eigen::MatrixXcd::Identity(2, 2)) - 1.0) <= 1e-15);
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(2, 2);
  n(1, 1) = 1.0;
  CHECK(form.state(n).real() == Approx(std::exp(-1.0) / (1 + std::exp(-1.0))).epsilon(1e-15));
  CHECK((form.liouvillean() * form.omega()).norm() <= 1e-15);
}

TEST_CASE("GNS construction") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto form = gns_build(random_kms_system(2 + seed % 4, 0.5 + seed * 0.3, seed));
    const auto r = gns_verify(form);
    CHECK(r.l_omega <= 1e-10);
    CHECK(r.j_squared <= 1e-10);
    CHECK(r.jlj <= 1e-10);
    CHECK(r.j_omega <= 1e-10);
    CHECK(r.state_vs_trace <= 1e-10);
  }
  std::mt19937_64 rng(3);
  const auto sys = random_kms_system(4, 1.3, 21);
  const auto form = gns_build(sys);
  const auto a = random_operator(4, rng);
  CHECK(std::abs(form.state(a) - oracle::gibbs_expectation(sys.hamiltonian, 1.3, a)) <= 1e-12);

  auto big = sys;
  big.hamiltonian = Eigen::MatrixXcd::Identity(65, 65);
  big.potential = Eigen::VectorXd::Zero(65);
  CHECK_THROWS(big.validate());
  auto wrong = sys;
  wrong.hamiltonian(0, 1) += 1.0;
  CHECK_THROWS(wrong.validate());
}

TEST_CASE("KMS condition") {
  std::mt19937_64 rng(4);
  const auto form = gns_build(random_kms_system(4, 0.9, 8));
  const auto a = random_operator(4, rng), b = random_operator(4, rng);
  const std::vector<double> times{-1.0, 0.0, 0.4, 2.2};
  const Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(4, 4);
  CHECK(kms_verify(form, one, one, times) <= 1e-14);
  CHECK(kms_verify(form, a, b, times) <= 1e-10);
  CHECK(kms_verify(form, a, b, times, 0.45) > 1e-3);
}

TEST_CASE("perturbed vector and Liouvillean") {
  const auto form = gns_build(random_kms_system(4, 1.1, 5));
  const auto base = perturb(form, Eigen::VectorXd::Zero(4));
  CHECK((base.omega_v - form.omega()).norm() <= 1e-13);
  CHECK((base.h_v - form.liouvillean()).norm() <= 1e-13);

  // constant V only shifts H_V by c (x) 1; Omega_V is unchanged up to normalization
  const auto shifted = perturb(form, Eigen::VectorXd::Constant(4, 2.5));
  CHECK((shifted.omega_v - form.omega()).norm() <= 1e-12);
  const Eigen::MatrixXcd l_v = shifted.h_v - form.conjugate_by_j(form.left(Eigen::MatrixXcd::Identity(4, 4) * 2.5));
  CHECK((l_v - form.liouvillean()).norm() <= 1e-12);

  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto f = gns_build(random_kms_system(2 + seed % 5, 0.4 + 0.4 * seed, 100 + seed));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(f.dim());
    for (auto& x : v) x = g(rng);
    const auto r = liouvillean_verify(f, v);
    CHECK(r.pass());
    CHECK(r.gibbs <= 1e-10);
  }
}

TEST_CASE("perturbations compose") {
  const auto form = gns_build(random_kms_system(3, 1.0, 9));
  Eigen::VectorXd v1(3), v2(3);
  v1 << 0.3, -0.2, 0.9;
  v2 << -0.5, 0.4, 0.1;
  auto sys1 = form.system();
  sys1.hamiltonian += Eigen::MatrixXcd(v1.cast<cplx>().asDiagonal());
  const auto form1 = gns_build(sys1);
  const auto direct = perturb(form, v1 + v2);
  const auto twice = perturb(form1, v2);
  CHECK((direct.omega_v - twice.omega_v).norm() <= 1e-12);
}

TEST_CASE("gauge sectors") {
  auto free = random_kms_system(3, 1.0, 4);
  const auto plain = gauge_sector_check(gns_build(free));
  CHECK(plain.kernel_dim == 9);
  CHECK(plain.span_dim == 9);
  CHECK(plain.max_sine <= 1e-10);

  const std::vector<int> pm{1, -1};
  const auto two = gauge_sector_check(gns_build(random_kms_system(2, 1.0, 5, pm)));
  CHECK(two.kernel_dim == 2);
  CHECK(two.span_dim == 2);
  CHECK(two.q_omega <= 1e-12);

  const std::vector<int> mixed{2, 0, -1, 1, 0};
  const auto r = gauge_sector_check(gns_build(random_kms_system(5, 0.8, 6, mixed)));
  CHECK(r.kernel_dim == r.span_dim);
  CHECK(r.max_sine <= 1e-10);
  CHECK(r.q_omega <= 1e-12);
}

TEST_CASE("oscillator two-point function") {
  OscillatorSpec spec;
  const auto s0 = oscillator_two_point(spec, 0.0);
  CHECK(s0.truncation_error <= 1e-6);
  CHECK(std::abs(s0.value - 0.5 * oracle::mode_kernel(0.0, 1.0, 1.0)) <= 1e-6);
  const auto mid = oscillator_two_point(spec, 0.5);
  CHECK(std::abs(mid.value - 0.5 * oracle::mode_kernel(0.5, 1.0, 1.0)) <= 1e-6);
  CHECK(mid.value < s0.value);
  spec.potential = {0.0, 0.0, 0.0, 0.0, 0.1};
  const auto q = oscillator_two_point(spec, 0.25);
  const auto q_mirror = oscillator_two_point(spec, 0.75);
  CHECK(q.value == Approx(q_mirror.value).epsilon(1e-7));
  CHECK(q.value < 0.5 * oracle::mode_kernel(0.25, 1.0, 1.0));
}

TEST_CASE("Feynman-Kac cross-check") {
  OscillatorSpec spec;
  spec.potential = {0.0, 0.0, 0.0, 0.0, 0.1};
  SamplerOptions opt;
  opt.n_samples = 40000;
  opt.n_mats = 8192;
  opt.seed = 12;
  opt.shards = 4;
  const auto r = feynman_kac_crosscheck(spec, 32, 8, opt);
  CHECK(r.pass);
  CHECK(r.ess > 1000.0);
  CHECK(r.free_closed_form == Approx(0.5 * oracle::mode_kernel(0.25, 1.0, 1.0)).epsilon(1e-14));
}
