#include "thermal/quasifree.hpp"

#include <cmath>
#include <stdexcept>

namespace thermal {

double weyl_expectation(const DiagonalSystem& system, const TestVector& x) {
  check_dimension(system, x);
  const auto bf = bose_factor(system);
  double q = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) q += bf.thermal_weight[j] * std::norm(x[j]);
  return std::exp(-0.25 * q);
}

namespace {

void check_strip(const DiagonalSystem& system, cplx t) {
  const double im = t.imag();
  if (im < -strip_tolerance || im > system.beta() + strip_tolerance)
    throw std::domain_error("two_point_R: Im t outside [0, beta]");
}

/// R(t)(x,y) without the strip check.
cplx two_point_unchecked(const DiagonalSystem& system, cplx t, const TestVector& x,
                         const TestVector& y) {
  const cplx i(0.0, 1.0);
  const double beta = system.beta();
  cplx sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double a = system.frequency(j);
    const double denom = -std::expm1(-beta * a);
    // (1+rho) e^{ita} and rho e^{-ita} = e^{-ita - beta a}/(1 - e^{-beta a})
    const cplx forward = std::exp(i * t * a) / denom;
    const cplx backward = std::exp(-i * t * a - beta * a) / denom;
    sum += std::conj(x[j]) * forward * y[j] + std::conj(y[j]) * backward * x[j];
  }
  return sum;
}

double diagonal_exponent(const TestVector& x,
                         const std::vector<double>& weight) {
  double q = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) q += weight[j] * std::norm(x[j]);
  return -0.25 * q;
}

}  // namespace

cplx two_point_R(const DiagonalSystem& system, cplx t, const TestVector& x, const TestVector& y) {
  check_dimension(system, x);
  check_dimension(system, y);
  check_strip(system, t);
  return two_point_unchecked(system, t, x, y);
}

double periodic_cov(double s, double a, double beta) {
  if (!(a > 0.0) || !(beta > 0.0)) throw std::invalid_argument("periodic_cov: a, beta must be > 0");
  double r = std::fmod(s, beta);
  if (r < 0.0) r += beta;
  // r(s) = r(beta - s); evaluate on [0, beta/2] so both terms stay bounded.
  if (r > 0.5 * beta) r = beta - r;
  return (std::exp(-r * a) + std::exp((r - beta) * a)) / -std::expm1(-beta * a);
}

double euclid_cov_C(const DiagonalSystem& system, double s, const TestVector& x,
                    const TestVector& y) {
  check_dimension(system, x);
  check_dimension(system, y);
  if (s < -strip_tolerance || s > system.beta() + strip_tolerance)
    throw std::domain_error("euclid_cov_C: s outside [0, beta]");
  if (!is_kappa_real(system, x) || !is_kappa_real(system, y))
    throw std::invalid_argument("euclid_cov_C: arguments must be kappa-real");
  cplx sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    sum += std::conj(x[j]) * y[j] * periodic_cov(s, system.frequency(j), system.beta());
  return 0.5 * sum.real();
}

WeylWord WeylWord::with_times(std::vector<WeylFactor> factors) {
  WeylWord w;
  w.factors_ = std::move(factors);
  return w;
}

WeylWord WeylWord::euclidean(const std::vector<double>& s, std::vector<TestVector> args) {
  if (s.size() != args.size()) throw std::invalid_argument("WeylWord: times/args size mismatch");
  for (std::size_t j = 1; j < s.size(); ++j)
    if (s[j] < s[j - 1]) throw std::invalid_argument("WeylWord: Euclidean times must be ordered");
  WeylWord w;
  w.euclidean_ = true;
  for (std::size_t j = 0; j < s.size(); ++j)
    w.factors_.push_back({cplx(0.0, s[j]), std::move(args[j])});
  return w;
}

cplx greens_weyl(const DiagonalSystem& system, const WeylWord& word) {
  const auto bf = bose_factor(system);
  const auto& f = word.factors();
  cplx exponent = 0.0;
  for (const auto& factor : f) {
    check_dimension(system, factor.arg);
    exponent += diagonal_exponent(factor.arg, bf.thermal_weight);
  }
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const cplx dt = f[j].time - f[i].time;
      check_strip(system, dt);
      exponent -= 0.5 * two_point_unchecked(system, dt, f[i].arg, f[j].arg);
    }
  return std::exp(exponent);
}

double euclid_greens_weyl(const DiagonalSystem& system, const WeylWord& word) {
  if (!word.is_euclidean()) throw std::invalid_argument("euclid_greens_weyl: not a Euclidean word");
  const auto& f = word.factors();
  if (!f.empty() && f.back().time.imag() - f.front().time.imag() > system.beta() + strip_tolerance)
    throw std::domain_error("euclid_greens_weyl: s_n - s_1 exceeds beta");
  double exponent = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j) {
      const double ds = std::abs(f[i].time.imag() - f[j].time.imag());
      exponent -= 0.5 * euclid_cov_C(system, ds, f[i].arg, f[j].arg);
    }
  return std::exp(exponent);
}

double kms_residual(const DiagonalSystem& system, const TestVector& x, const TestVector& y,
                    double t, double imaginary_shift) {
  const double shift = imaginary_shift < 0.0 ? system.beta() : imaginary_shift;
  const auto lhs =
      greens_weyl(system, WeylWord::with_times({{cplx(0.0, 0.0), x}, {cplx(t, shift), y}}));
  const auto rhs =
      greens_weyl(system, WeylWord::with_times({{cplx(t, 0.0), y}, {cplx(0.0, 0.0), x}}));
  return std::abs(lhs - rhs);
}

double time_reversal_check(const DiagonalSystem& system, const TestVector& x,
                           const TestVector& y, double t) {
  if (!is_kappa_real(system, x) || !is_kappa_real(system, y))
    throw std::invalid_argument("time_reversal_check: arguments must be kappa-real");
  const auto forward = greens_weyl(system, WeylWord::with_times({{0.0, x}, {t, y}}));
  const auto backward = greens_weyl(system, WeylWord::with_times({{0.0, x}, {-t, y}}));
  return std::abs(forward - std::conj(backward));
}

cplx charged_nonpositivity_witness(const DiagonalSystem& system, const TestVector& u,
                                   const TestVector& v, double s) {
  if (system.sector() != Sector::charged)
    throw std::invalid_argument("charged_nonpositivity_witness: needs a charged system");
  const std::size_t n = system.block_size();
  if (u.size() != n || v.size() != n)
    throw std::invalid_argument("charged_nonpositivity_witness: u, v must span one charge block");
  const double beta = system.beta();
  const double mu = system.chemical_potential();
  cplx vAu = 0.0;
  cplx uBv = 0.0;
  double uTu = 0.0;
  double vTv = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double eps = system.energies()[j];
    const double rp = bose_occupation(beta * (eps - mu));
    const double rm = bose_occupation(beta * (eps + mu));
    const double down = std::exp(-s * eps);
    const double up = std::exp(s * eps);
    const double A = down * (1.0 + rp) + up * rm;
    const double B = down * (1.0 + rm) + up * rp;
    const double T = 1.0 + rp + rm;
    vAu += std::conj(v[j]) * A * u[j];
    uBv += std::conj(u[j]) * B * v[j];
    uTu += T * std::norm(u[j]);
    vTv += T * std::norm(v[j]);
  }
  return vAu * uBv + uTu * vTv;
}

}  // namespace thermal
