#pragma once

// Closed-form quasi-free KMS functional: Weyl expectations, real-time and
// Euclidean Green's functions of Weyl words, and the KMS / time-reversal /
// stochastic-positivity diagnostics built on them.

#include <vector>

#include "thermal/spectral.hpp"

namespace thermal {

/// Rounding slack accepted on the strip 0 <= Im t <= beta.
inline constexpr double strip_tolerance = 1e-12;

/// omega_beta(W(x)) = exp(-1/4 (x, (1+2 rho) x)).
double weyl_expectation(const DiagonalSystem& system, const TestVector& x);

/// R(t)(x,y) = (x, (1+rho) e^{ita} y) + (y, rho e^{-ita} x), holomorphic in
/// 0 < Im t < beta. Throws std::domain_error outside the closed strip.
cplx two_point_R(const DiagonalSystem& system, cplx t, const TestVector& x, const TestVector& y);

/// Mode kernel r(s) = (e^{-sa} + e^{(s-beta)a}) / (1 - e^{-beta a}), s reduced mod beta.
double periodic_cov(double s, double a, double beta);

/// C(s)(x,y) = 1/2 (x, r(s) y) for kappa-real x, y and 0 <= s <= beta.
double euclid_cov_C(const DiagonalSystem& system, double s, const TestVector& x,
                    const TestVector& y);

struct WeylFactor {
  cplx time;
  TestVector arg;
};

/// Ordered product of time-translated Weyl operators.
class WeylWord {
 public:
  /// Real or complex times; ordering is checked when the word is evaluated.
  static WeylWord with_times(std::vector<WeylFactor> factors);
  /// Euclidean word at t_j = i s_j with 0 <= s_1 <= ... <= s_n, s_n - s_1 <= beta.
  static WeylWord euclidean(const std::vector<double>& s, std::vector<TestVector> args);

  [[nodiscard]] const std::vector<WeylFactor>& factors() const { return factors_; }
  [[nodiscard]] bool is_euclidean() const { return euclidean_; }
  [[nodiscard]] std::size_t size() const { return factors_.size(); }

 private:
  std::vector<WeylFactor> factors_;
  bool euclidean_ = false;
};

/// G(t_1..t_n; W(x_1)..W(x_n)) from the closed product formula.
cplx greens_weyl(const DiagonalSystem& system, const WeylWord& word);

/// Euclidean Green's function prod_{i,j} exp(-1/2 C(|s_i - s_j|)(x_i, x_j)).
double euclid_greens_weyl(const DiagonalSystem& system, const WeylWord& word);

/// |G(0, t + i shift; W(x), W(y)) - G(t, 0; W(y), W(x))|. The KMS edge is
/// shift = beta (the default, passed as a negative value).
double kms_residual(const DiagonalSystem& system, const TestVector& x, const TestVector& y,
                    double t, double imaginary_shift = -1.0);

/// |omega(W(x) tau_t W(y)) - conj(omega(W(x) tau_{-t} W(y)))|.
double time_reversal_check(const DiagonalSystem& system, const TestVector& x,
                           const TestVector& y, double t);

/// Euclidean two-point function of the gauge-invariant observables
/// phi*(x)phi(x) at t = i s in the charged sector; its imaginary part measures
/// the failure of stochastic positivity at mu != 0. u and v are one-block
/// mode vectors.
cplx charged_nonpositivity_witness(const DiagonalSystem& system, const TestVector& u,
                                   const TestVector& v, double s);

}  // namespace thermal
