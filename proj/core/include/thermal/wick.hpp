#pragma once

// Wick ordering of scalar Gaussian variables. A Wick power :y^n:_c is taken
// with respect to the variance c of y; reordering moves a polynomial between
// two such variances.

#include <span>
#include <vector>

namespace thermal {

inline constexpr int max_wick_degree = 40;

/// n! as a double, 0 <= n <= max_wick_degree.
double factorial(int n);

/// :y^n:_c = sum_m n!/(m!(n-2m)!) y^{n-2m} (-c/2)^m.
double wick_power(double y, int n, double c);

/// :e^{alpha y}:_c = e^{alpha y - alpha^2 c / 2}.
double wick_exp(double y, double alpha, double c);

/// Partial sum sum_{n<=n_max} alpha^n/n! :y^n:_c of the generating series.
double wick_exp_series(double y, double alpha, double c, int n_max);

/// sum_j a_j :y^j:_c with the ordering variance c attached.
struct WickPolynomial {
  std::vector<double> coeffs;
  double ordering = 0.0;

  [[nodiscard]] int degree() const;
  [[nodiscard]] double operator()(double y) const;
  /// Interaction polynomials: even degree, positive leading coefficient.
  void validate_bounded_below() const;
};

/// Re-express p in Wick powers of variance c_to; identical as a function of y.
WickPolynomial reorder(const WickPolynomial& p, double c_to);

/// Plain power-basis coefficients of p.
std::vector<double> to_monomials(const WickPolynomial& p);

/// E[:y^n: :z^n:] = n! v_fg^n for (y, z) jointly Gaussian with variances
/// v_ff, v_gg, covariance v_fg, each Wick-ordered at its own variance.
double pair_inner(int n, double v_ff, double v_gg, double v_fg);

/// E[P(y) Q(z)] for Wick polynomials ordered at arbitrary variances; both
/// are first reordered to the true variances, then paired degree by degree.
double wick_pair_expectation(const WickPolynomial& p, const WickPolynomial& q, double v_ff,
                             double v_gg, double v_fg);

/// Complex Gaussian psi with E|psi|^2 = c:
/// :(|psi|^2)^n:_c = sum_m (-1)^m C(n,m)^2 m! c^m |psi|^{2(n-m)}.
double complex_wick_power(double modulus_sq, int n, double c);

/// Re-express sum_n a_n :(|psi|^2)^n:_{c_from} in powers ordered at c_to:
/// :(|psi|^2)^n:_{c1} = sum_m C(n,m)^2 (n-m)! (c2 - c1)^{n-m} :(|psi|^2)^m:_{c2}.
std::vector<double> reorder_complex(std::span<const double> coeffs, double c_from, double c_to);

/// E[:|psi_x|^{2n}: :|psi_y|^{2n}:] = (n!)^2 |E psi_x conj(psi_y)|^{2n}.
double complex_pair_inner(int n, double covariance);

}  // namespace thermal
