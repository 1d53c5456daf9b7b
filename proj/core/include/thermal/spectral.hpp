#pragma once

// Finite-mode one-particle spaces: momentum grid, dispersion, Bose
// occupation, and the real-mode basis in which the conjugation kappa acts
// as plain complex conjugation.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace thermal {

using cplx = std::complex<double>;

/// Symmetric momentum grid k_j = j * delta_k, j = -M..M, on a periodic box.
struct ModeGrid {
  double delta_k = 0.5;
  int half_count = 4;
  double mass = 1.0;

  void validate() const;
  [[nodiscard]] int size() const { return 2 * half_count + 1; }
  [[nodiscard]] double box_length() const;
  /// Real-space lattice spacing; the lattice has size() points x_j = j*dx.
  [[nodiscard]] double lattice_spacing() const;
  /// Momenta in natural order k_{-M} .. k_{M}.
  [[nodiscard]] std::vector<double> momenta() const;
  /// Lattice positions x_{-M} .. x_{M}.
  [[nodiscard]] std::vector<double> positions() const;
};

/// epsilon(k) = sqrt(k^2 + m^2), in natural momentum order.
std::vector<double> dispersion(const ModeGrid& grid);
double dispersion(double k, double mass);

enum class Sector { neutral, charged };

/// Diagonal one-particle operator a (frequencies) at inverse temperature beta.
///
/// Neutral systems carry one block of real modes. Charged systems carry two
/// blocks of equal length: the + block with a = eps - mu and the - block with
/// a = eps + mu. Per-mode one-particle energies and charges are kept so the
/// charged diagnostics can split rho into rho+ and rho-.
class DiagonalSystem {
 public:
  /// Neutral system from explicit frequencies (all > 0).
  static DiagonalSystem from_frequencies(std::vector<double> frequencies, double beta);
  /// Charged system from one-particle energies eps_j and chemical potential.
  static DiagonalSystem charged(std::vector<double> energies, double beta, double mu);

  [[nodiscard]] std::size_t size() const { return frequencies_.size(); }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] Sector sector() const { return sector_; }
  [[nodiscard]] double chemical_potential() const { return mu_; }
  [[nodiscard]] std::span<const double> frequencies() const { return frequencies_; }
  [[nodiscard]] double frequency(std::size_t j) const { return frequencies_.at(j); }
  /// One-particle energies (equal to the frequencies when neutral).
  [[nodiscard]] std::span<const double> energies() const { return energies_; }
  /// +1 / -1 per mode for charged systems, 0 for neutral.
  [[nodiscard]] std::span<const int> charges() const { return charges_; }
  /// Number of modes in one charge block (size() for neutral systems).
  [[nodiscard]] std::size_t block_size() const;

  /// Same frequencies, different inverse temperature.
  [[nodiscard]] DiagonalSystem with_beta(double beta) const;

 private:
  DiagonalSystem() = default;

  std::vector<double> frequencies_;
  std::vector<double> energies_;
  std::vector<int> charges_;
  double beta_ = 1.0;
  double mu_ = 0.0;
  Sector sector_ = Sector::neutral;
};

/// rho = 1/(e^{beta a} - 1); returns 0 (not NaN) once beta*a overflows.
double bose_occupation(double beta_a);

struct BoseFactors {
  std::vector<double> rho;
  /// 1 + 2 rho = (1 + e^{-beta a}) / (1 - e^{-beta a}).
  std::vector<double> thermal_weight;
};

BoseFactors bose_factor(const DiagonalSystem& system);

/// Neutral field: modes (k, -k) paired into real cos/sin combinations.
/// Mode order: k=0, then (cos k_1, sin k_1), (cos k_2, sin k_2), ...
DiagonalSystem build_neutral(const ModeGrid& grid, double beta);

/// Charged field: two copies of the neutral real-mode set, a = eps -+ mu.
/// Throws std::domain_error when |mu| >= m (condensation threshold).
DiagonalSystem build_charged(const ModeGrid& grid, double beta, double mu);

/// Complex coefficients of a one-particle vector in the orthonormal basis of
/// a DiagonalSystem.
class TestVector {
 public:
  TestVector() = default;
  explicit TestVector(std::vector<cplx> coefficients) : c_(std::move(coefficients)) {}
  static TestVector real(std::span<const double> coefficients);
  static TestVector zero(std::size_t n) { return TestVector(std::vector<cplx>(n)); }
  static TestVector unit(std::size_t n, std::size_t j, double amplitude = 1.0);

  [[nodiscard]] std::size_t size() const { return c_.size(); }
  [[nodiscard]] std::span<const cplx> coefficients() const { return c_; }
  [[nodiscard]] const cplx& operator[](std::size_t j) const { return c_[j]; }
  cplx& operator[](std::size_t j) { return c_[j]; }

  /// Real parts, for kappa-real vectors of a neutral system.
  [[nodiscard]] std::vector<double> real_coefficients() const;

  friend TestVector operator*(double s, const TestVector& x);
  friend TestVector operator+(const TestVector& x, const TestVector& y);

 private:
  std::vector<cplx> c_;
};

/// Sesquilinear (x, y) = sum conj(x_j) y_j.
cplx inner(const TestVector& x, const TestVector& y);

/// Conjugation kappa: componentwise conjugation (neutral) or
/// (x+, x-) -> (conj x-, conj x+) (charged).
TestVector kappa(const DiagonalSystem& system, const TestVector& x);
bool is_kappa_real(const DiagonalSystem& system, const TestVector& x, double tol = 1e-12);

/// Throws std::invalid_argument when the vector does not fit the system.
void check_dimension(const DiagonalSystem& system, const TestVector& x);

/// Map momentum-space values f(k_j), j=-M..M (natural order, Delta k weighted
/// L^2 inner product) to coordinates in the orthonormal real-mode basis.
std::vector<cplx> to_real_modes(const ModeGrid& grid, std::span<const cplx> momentum_values);

/// Lattice Fourier transform h^(p) = sum_x h(x) e^{-ipx} dx on the grid lattice.
cplx lattice_fourier(const ModeGrid& grid, std::span<const double> lattice_values, double p);

/// Time-zero Klein-Gordon embedding u -> (sqrt(2) 2 pi)^{-1} eps^{-1/2} u in
/// the real-mode basis. For charged systems the doubled (h, conj h) vector is
/// returned.
TestVector kg_time_zero_embedding(const ModeGrid& grid, const DiagonalSystem& system,
                                  std::span<const cplx> momentum_values);
/// Same, from real-space samples on the grid lattice.
TestVector kg_time_zero_embedding_lattice(const ModeGrid& grid, const DiagonalSystem& system,
                                          std::span<const double> lattice_values);

}  // namespace thermal
