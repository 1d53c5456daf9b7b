#include "thermal/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace thermal {

using std::numbers::pi;

void ModeGrid::validate() const {
  if (!(delta_k > 0.0) || !std::isfinite(delta_k))
    throw std::invalid_argument("ModeGrid: delta_k must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("ModeGrid: mass must be positive");
  if (half_count < 0) throw std::invalid_argument("ModeGrid: half_count must be >= 0");
}

double ModeGrid::box_length() const { return 2.0 * pi / delta_k; }

double ModeGrid::lattice_spacing() const { return box_length() / size(); }

std::vector<double> ModeGrid::momenta() const {
  std::vector<double> k(static_cast<std::size_t>(size()));
  for (int j = -half_count; j <= half_count; ++j) k[static_cast<std::size_t>(j + half_count)] = j * delta_k;
  return k;
}

std::vector<double> ModeGrid::positions() const {
  const double dx = lattice_spacing();
  std::vector<double> x(static_cast<std::size_t>(size()));
  for (int j = -half_count; j <= half_count; ++j) x[static_cast<std::size_t>(j + half_count)] = j * dx;
  return x;
}

double dispersion(double k, double mass) { return std::sqrt(k * k + mass * mass); }

std::vector<double> dispersion(const ModeGrid& grid) {
  grid.validate();
  std::vector<double> eps;
  eps.reserve(static_cast<std::size_t>(grid.size()));
  for (double k : grid.momenta()) eps.push_back(dispersion(k, grid.mass));
  return eps;
}

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("DiagonalSystem: beta must be positive and finite");
}

}  // namespace

DiagonalSystem DiagonalSystem::from_frequencies(std::vector<double> frequencies, double beta) {
  check_beta(beta);
  if (frequencies.empty()) throw std::invalid_argument("DiagonalSystem: no modes");
  for (double a : frequencies)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("DiagonalSystem: frequencies must be strictly positive");
  DiagonalSystem s;
  s.energies_ = frequencies;
  s.frequencies_ = std::move(frequencies);
  s.charges_.assign(s.frequencies_.size(), 0);
  s.beta_ = beta;
  return s;
}

DiagonalSystem DiagonalSystem::charged(std::vector<double> energies, double beta, double mu) {
  check_beta(beta);
  if (energies.empty()) throw std::invalid_argument("DiagonalSystem: no modes");
  const std::size_t n = energies.size();
  DiagonalSystem s;
  s.sector_ = Sector::charged;
  s.mu_ = mu;
  s.beta_ = beta;
  s.frequencies_.resize(2 * n);
  s.energies_.resize(2 * n);
  s.charges_.resize(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double eps = energies[j];
    if (!(eps - std::abs(mu) > 0.0))
      throw std::domain_error("charged system: |mu| must stay below every one-particle energy");
    s.frequencies_[j] = eps - mu;
    s.frequencies_[n + j] = eps + mu;
    s.energies_[j] = s.energies_[n + j] = eps;
    s.charges_[j] = +1;
    s.charges_[n + j] = -1;
  }
  return s;
}

std::size_t DiagonalSystem::block_size() const {
  return sector_ == Sector::charged ? frequencies_.size() / 2 : frequencies_.size();
}

DiagonalSystem DiagonalSystem::with_beta(double beta) const {
  check_beta(beta);
  DiagonalSystem s = *this;
  s.beta_ = beta;
  return s;
}

double bose_occupation(double beta_a) {
  const double d = std::expm1(beta_a);
  return 1.0 / d;  // d = +inf gives 0
}

BoseFactors bose_factor(const DiagonalSystem& system) {
  BoseFactors out;
  out.rho.reserve(system.size());
  out.thermal_weight.reserve(system.size());
  for (double a : system.frequencies()) {
    const double ba = system.beta() * a;
    out.rho.push_back(bose_occupation(ba));
    const double q = std::exp(-ba);
    out.thermal_weight.push_back((1.0 + q) / -std::expm1(-ba));
  }
  return out;
}

namespace {

/// Real-mode frequencies for one neutral block: k=0, then cos/sin pairs.
std::vector<double> real_mode_energies(const ModeGrid& grid) {
  const auto eps = dispersion(grid);
  const auto M = static_cast<std::size_t>(grid.half_count);
  std::vector<double> out;
  out.reserve(eps.size());
  out.push_back(eps[M]);
  for (std::size_t j = 1; j <= M; ++j) {
    out.push_back(eps[M + j]);
    out.push_back(eps[M + j]);
  }
  return out;
}

}  // namespace

DiagonalSystem build_neutral(const ModeGrid& grid, double beta) {
  grid.validate();
  return DiagonalSystem::from_frequencies(real_mode_energies(grid), beta);
}

DiagonalSystem build_charged(const ModeGrid& grid, double beta, double mu) {
  grid.validate();
  if (!(std::abs(mu) < grid.mass))
    throw std::domain_error("build_charged: |mu| >= m violates the condensation bound");
  return DiagonalSystem::charged(real_mode_energies(grid), beta, mu);
}

TestVector TestVector::real(std::span<const double> coefficients) {
  std::vector<cplx> c(coefficients.begin(), coefficients.end());
  return TestVector(std::move(c));
}

TestVector TestVector::unit(std::size_t n, std::size_t j, double amplitude) {
  if (j >= n) throw std::out_of_range("TestVector::unit: index out of range");
  std::vector<cplx> c(n);
  c[j] = amplitude;
  return TestVector(std::move(c));
}

std::vector<double> TestVector::real_coefficients() const {
  std::vector<double> out;
  out.reserve(c_.size());
  for (const auto& z : c_) out.push_back(z.real());
  return out;
}

TestVector operator*(double s, const TestVector& x) {
  TestVector y = x;
  for (auto& z : y.c_) z *= s;
  return y;
}

TestVector operator+(const TestVector& x, const TestVector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("TestVector: size mismatch");
  TestVector z = x;
  for (std::size_t j = 0; j < z.size(); ++j) z.c_[j] += y.c_[j];
  return z;
}

cplx inner(const TestVector& x, const TestVector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("inner: size mismatch");
  cplx s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += std::conj(x[j]) * y[j];
  return s;
}

void check_dimension(const DiagonalSystem& system, const TestVector& x) {
  if (x.size() != system.size())
    throw std::invalid_argument("test vector has " + std::to_string(x.size()) +
                                " coefficients, system has " + std::to_string(system.size()) +
                                " modes");
}

TestVector kappa(const DiagonalSystem& system, const TestVector& x) {
  check_dimension(system, x);
  std::vector<cplx> c(x.size());
  if (system.sector() == Sector::neutral) {
    for (std::size_t j = 0; j < x.size(); ++j) c[j] = std::conj(x[j]);
  } else {
    const std::size_t n = system.block_size();
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = std::conj(x[n + j]);
      c[n + j] = std::conj(x[j]);
    }
  }
  return TestVector(std::move(c));
}

bool is_kappa_real(const DiagonalSystem& system, const TestVector& x, double tol) {
  const TestVector k = kappa(system, x);
  double scale = 0.0;
  double diff = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    scale = std::max(scale, std::abs(x[j]));
    diff = std::max(diff, std::abs(x[j] - k[j]));
  }
  return diff <= tol * std::max(1.0, scale);
}

std::vector<cplx> to_real_modes(const ModeGrid& grid, std::span<const cplx> f) {
  grid.validate();
  if (f.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("to_real_modes: expected one value per grid momentum");
  const auto M = static_cast<std::size_t>(grid.half_count);
  const double w = std::sqrt(grid.delta_k);
  const double h = std::sqrt(0.5);
  const cplx i(0.0, 1.0);
  std::vector<cplx> out;
  out.reserve(f.size());
  out.push_back(w * f[M]);
  for (std::size_t j = 1; j <= M; ++j) {
    const cplx fp = f[M + j];
    const cplx fm = f[M - j];
    // e_c = (d_k + d_{-k})/sqrt2, e_s = i (d_k - d_{-k})/sqrt2
    out.push_back(w * h * (fp + fm));
    out.push_back(w * h * (-i) * (fp - fm));
  }
  return out;
}

cplx lattice_fourier(const ModeGrid& grid, std::span<const double> h, double p) {
  if (h.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("lattice_fourier: expected one value per lattice site");
  const double dx = grid.lattice_spacing();
  const auto x = grid.positions();
  cplx s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * std::polar(1.0, -p * x[j]);
  return s * dx;
}

TestVector kg_time_zero_embedding(const ModeGrid& grid, const DiagonalSystem& system,
                                  std::span<const cplx> momentum_values) {
  const auto eps = dispersion(grid);
  if (momentum_values.size() != eps.size())
    throw std::invalid_argument("kg_time_zero_embedding: dimension mismatch");
  const double norm = 1.0 / (std::sqrt(2.0) * 2.0 * pi);
  std::vector<cplx> scaled(eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j)
    scaled[j] = norm * momentum_values[j] / std::sqrt(eps[j]);
  auto coords = to_real_modes(grid, scaled);
  if (system.sector() == Sector::neutral) {
    TestVector x(std::move(coords));
    check_dimension(system, x);
    return x;
  }
  std::vector<cplx> doubled(2 * coords.size());
  for (std::size_t j = 0; j < coords.size(); ++j) {
    doubled[j] = coords[j];
    doubled[coords.size() + j] = std::conj(coords[j]);
  }
  TestVector x(std::move(doubled));
  check_dimension(system, x);
  return x;
}

TestVector kg_time_zero_embedding_lattice(const ModeGrid& grid, const DiagonalSystem& system,
                                          std::span<const double> lattice_values) {
  const auto k = grid.momenta();
  std::vector<cplx> uhat(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) uhat[j] = lattice_fourier(grid, lattice_values, k[j]);
  return kg_time_zero_embedding(grid, system, uhat);
}

}  // namespace thermal
