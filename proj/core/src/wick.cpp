#include "thermal/wick.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace thermal {

namespace {

constexpr auto factorial_table = [] {
  std::array<double, max_wick_degree + 1> t{};
  t[0] = 1.0;
  for (int n = 1; n <= max_wick_degree; ++n) t[static_cast<std::size_t>(n)] = t[static_cast<std::size_t>(n - 1)] * n;
  return t;
}();

void check_degree(int n) {
  if (n < 0 || n > max_wick_degree)
    throw std::invalid_argument("Wick degree must lie in [0, 40]");
}

/// n!/(m!(n-2m)!), the Hermite pairing count.
double pairing_count(int n, int m) {
  return factorial(n) / (factorial(m) * factorial(n - 2 * m));
}

}  // namespace

double factorial(int n) {
  check_degree(n);
  return factorial_table[static_cast<std::size_t>(n)];
}

double wick_power(double y, int n, double c) {
  check_degree(n);
  double sum = 0.0;
  for (int m = 0; 2 * m <= n; ++m)
    sum += pairing_count(n, m) * std::pow(y, n - 2 * m) * std::pow(-0.5 * c, m);
  return sum;
}

double wick_exp(double y, double alpha, double c) {
  return std::exp(alpha * y - 0.5 * alpha * alpha * c);
}

double wick_exp_series(double y, double alpha, double c, int n_max) {
  check_degree(n_max);
  double sum = 0.0;
  for (int n = 0; n <= n_max; ++n) sum += std::pow(alpha, n) / factorial(n) * wick_power(y, n, c);
  return sum;
}

int WickPolynomial::degree() const {
  for (auto j = static_cast<int>(coeffs.size()) - 1; j >= 0; --j)
    if (coeffs[static_cast<std::size_t>(j)] != 0.0) return j;
  return 0;
}

double WickPolynomial::operator()(double y) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    if (coeffs[j] != 0.0) sum += coeffs[j] * wick_power(y, static_cast<int>(j), ordering);
  return sum;
}

void WickPolynomial::validate_bounded_below() const {
  const int n = degree();
  check_degree(n);
  if (n == 0 || n % 2 != 0 || !(coeffs[static_cast<std::size_t>(n)] > 0.0))
    throw std::invalid_argument(
        "interaction polynomial must have even degree >= 2 and positive leading coefficient");
}

WickPolynomial reorder(const WickPolynomial& p, double c_to) {
  check_degree(static_cast<int>(p.coeffs.size()) - 1);
  WickPolynomial out{std::vector<double>(p.coeffs.size(), 0.0), c_to};
  // :y^n:_{c1} = sum_m n!/(m!(n-2m)!) :y^{n-2m}:_{c2} (-(c1 - c2)/2)^m
  const double shift = -0.5 * (p.ordering - c_to);
  for (std::size_t n = 0; n < p.coeffs.size(); ++n) {
    if (p.coeffs[n] == 0.0) continue;
    const int ni = static_cast<int>(n);
    for (int m = 0; 2 * m <= ni; ++m)
      out.coeffs[n - 2 * static_cast<std::size_t>(m)] +=
          p.coeffs[n] * pairing_count(ni, m) * std::pow(shift, m);
  }
  return out;
}

std::vector<double> to_monomials(const WickPolynomial& p) {
  return reorder(p, 0.0).coeffs;
}

double pair_inner(int n, double v_ff, double v_gg, double v_fg) {
  check_degree(n);
  if (v_ff < 0.0 || v_gg < 0.0) throw std::invalid_argument("pair_inner: negative variance");
  if (v_fg * v_fg > v_ff * v_gg * (1.0 + 1e-12) + 1e-300)
    throw std::invalid_argument("pair_inner: covariance violates Cauchy-Schwarz");
  return factorial(n) * std::pow(v_fg, n);
}

double wick_pair_expectation(const WickPolynomial& p, const WickPolynomial& q, double v_ff,
                             double v_gg, double v_fg) {
  const auto pt = reorder(p, v_ff);
  const auto qt = reorder(q, v_gg);
  const std::size_t n = std::min(pt.coeffs.size(), qt.coeffs.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (pt.coeffs[j] != 0.0 && qt.coeffs[j] != 0.0)
      sum += pt.coeffs[j] * qt.coeffs[j] * pair_inner(static_cast<int>(j), v_ff, v_gg, v_fg);
  return sum;
}

double complex_wick_power(double modulus_sq, int n, double c) {
  check_degree(n);
  double sum = 0.0;
  for (int m = 0; m <= n; ++m) {
    const double binom = factorial(n) / (factorial(m) * factorial(n - m));
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    sum += sign * binom * binom * factorial(m) * std::pow(c, m) * std::pow(modulus_sq, n - m);
  }
  return sum;
}

std::vector<double> reorder_complex(std::span<const double> coeffs, double c_from, double c_to) {
  check_degree(static_cast<int>(coeffs.size()) - 1);
  std::vector<double> out(coeffs.size(), 0.0);
  const double shift = c_to - c_from;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    if (coeffs[n] == 0.0) continue;
    const int ni = static_cast<int>(n);
    for (int m = 0; m <= ni; ++m) {
      const double binom = factorial(ni) / (factorial(m) * factorial(ni - m));
      out[static_cast<std::size_t>(m)] +=
          coeffs[n] * binom * binom * factorial(ni - m) * std::pow(shift, ni - m);
    }
  }
  return out;
}

double complex_pair_inner(int n, double covariance) {
  const double f = factorial(n);
  return f * f * std::pow(covariance * covariance, n);
}

}  // namespace thermal
