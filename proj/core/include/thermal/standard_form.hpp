#pragma once

// Finite-dimensional standard form of a Gibbs state: GNS vector, Liouvillean,
// modular conjugation, the perturbed vector and Liouvillean, gauge sectors,
// and a truncated-oscillator operator computation that cross-checks the
// weighted path integral.
//
// Doubled-space vectors are row-major vectorizations: index i*d + j holds X_ij,
// so (A (x) 1) vec(X) = vec(A X) and (1 (x) B) vec(X) = vec(X B^T).

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "thermal/fkn.hpp"

namespace thermal {

struct FiniteKmsSystem {
  Eigen::MatrixXcd hamiltonian;
  double beta = 1.0;
  /// Diagonal of V in the distinguished basis.
  Eigen::VectorXd potential;
  /// Diagonal integer gauge generator; empty when absent.
  Eigen::VectorXi charge;

  [[nodiscard]] Eigen::Index dim() const { return hamiltonian.rows(); }
  void validate(Eigen::Index max_dim = 64) const;
};

/// Random Hermitian H (entries ~ N(0,1), scaled by 1/sqrt(d)) and diagonal V.
/// With charges, H is gauge-averaged so that [H, Q] = 0.
FiniteKmsSystem random_kms_system(Eigen::Index d, double beta, std::uint64_t seed,
                                  std::span<const int> charges = {});

/// f(M) for Hermitian M through its eigendecomposition.
template <typename F>
Eigen::MatrixXcd hermitian_function(const Eigen::MatrixXcd& m, F&& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
  Eigen::VectorXcd values(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = f(eig.eigenvalues()(i));
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().adjoint();
}

class StandardForm {
 public:
  explicit StandardForm(FiniteKmsSystem system);

  [[nodiscard]] const FiniteKmsSystem& system() const { return system_; }
  [[nodiscard]] Eigen::Index dim() const { return system_.dim(); }
  [[nodiscard]] const Eigen::VectorXcd& omega() const { return omega_; }
  [[nodiscard]] const Eigen::MatrixXcd& liouvillean() const { return liouvillean_; }
  /// Tensor-factor swap P with J = P o complex conjugation (built on demand).
  [[nodiscard]] Eigen::MatrixXcd swap() const;
  /// Diagonal of Q (x) 1 - 1 (x) Q^T; zero without a charge.
  [[nodiscard]] const Eigen::VectorXd& gauge() const { return gauge_; }

  [[nodiscard]] Eigen::VectorXcd apply_j(const Eigen::VectorXcd& v) const;
  /// J M J for a linear map M of the doubled space.
  [[nodiscard]] Eigen::MatrixXcd conjugate_by_j(const Eigen::MatrixXcd& m) const;
  /// A (x) 1.
  [[nodiscard]] Eigen::MatrixXcd left(const Eigen::MatrixXcd& a) const;
  /// <Omega, (A (x) 1) Omega>.
  [[nodiscard]] cplx state(const Eigen::MatrixXcd& a) const;

 private:
  FiniteKmsSystem system_;
  Eigen::VectorXcd omega_;
  Eigen::MatrixXcd liouvillean_;
  Eigen::VectorXd gauge_;
};

StandardForm gns_build(const FiniteKmsSystem& system);

/// vec(M) in the row-major convention, and its inverse.
Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, Eigen::Index d);

/// e^{-beta H/2} / ||e^{-beta H/2}||_F, vectorized.
Eigen::VectorXcd gibbs_vector(const Eigen::MatrixXcd& h, double beta);

struct GnsReport {
  double l_omega = 0.0;         // ||L Omega||
  double j_squared = 0.0;       // ||J^2 - 1|| on a basis
  double jlj = 0.0;             // ||J L J + L||
  double j_omega = 0.0;         // ||J Omega - Omega||
  double state_vs_trace = 0.0;  // max |omega(A) - Tr(e^{-beta H} A)/Z| over probes
};

GnsReport gns_verify(const StandardForm& form, int probes = 10, std::uint64_t seed = 11);

/// max_t |F_{A,B}(t + i shift) - omega(tau_t(B) A)| with
/// F_{A,B}(z) = omega(A tau_z(B)), tau_z(B) = e^{izH} B e^{-izH}. shift < 0 means beta.
double kms_verify(const StandardForm& form, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                  std::span<const double> times, double shift = -1.0);

struct PerturbedForm {
  Eigen::MatrixXcd h_v;       // L + V (x) 1
  Eigen::VectorXcd omega_v;   // e^{-beta H_V/2} Omega / norm
  double gibbs_residual = 0.0;  // ||Omega_V - vec(e^{-beta(H+V)/2})/norm||
  /// omega_V(A) = <Omega_V, (A (x) 1) Omega_V>.
  [[nodiscard]] cplx state(const StandardForm& form, const Eigen::MatrixXcd& a) const;
};

PerturbedForm perturb(const StandardForm& form, const Eigen::VectorXd& v);

struct LiouvilleanReport {
  double l_v_omega_v = 0.0;     // ||L_V Omega_V||
  double l_v_formula = 0.0;     // ||(H_V - J V J) - ((H+V) (x) 1 - 1 (x) (H+V)^T)||
  double dynamics = 0.0;        // e^{itL_V}(A (x) 1)e^{-itL_V} vs tau^V_t(A) (x) 1
  double kms = 0.0;             // KMS residual of (omega_V, tau^V)
  double modular_conjugation = 0.0;  // ||U_{J_V} - P|| from the Tomita map
  double gibbs = 0.0;
  double state = 0.0;           // omega_V(A) vs Tr(e^{-beta(H+V)} A)/Z_V
  [[nodiscard]] bool pass(double closed_form = 1e-10, double kms_tol = 1e-8) const;
};

LiouvilleanReport liouvillean_verify(const StandardForm& form, const Eigen::VectorXd& v,
                                     std::uint64_t seed = 13);

struct GaugeReport {
  Eigen::Index kernel_dim = 0;
  Eigen::Index span_dim = 0;
  double max_sine = 0.0;  // largest principal-angle sine between the two subspaces
  double q_omega = 0.0;   // ||Q Omega||
};

/// Compares span{(A (x) 1) Omega : A gauge invariant} with Ker Q. Gauge
/// invariance is imposed by averaging over the discrete orbit
/// exp(2 pi i k Q / n), n above the charge spread.
GaugeReport gauge_sector_check(const StandardForm& form);

struct OscillatorSpec {
  double frequency = 1.0;
  double beta = 1.0;
  /// v(x) = sum_j c_j x^j added to (a/2)(P^2 + X^2).
  std::vector<double> potential;
};

struct OperatorValue {
  double value = 0.0;
  double truncation_error = 0.0;
  int grid_points = 0;
};

/// Tr(e^{-(beta - s) H} X e^{-s H} X) / Tr e^{-beta H} for the oscillator
/// on a finite-difference position grid, Richardson-extrapolated over nested
/// grids until successive values agree within `tolerance`.
OperatorValue oscillator_two_point(const OscillatorSpec& spec, double s, double tolerance = 1e-7);

struct FeynmanKacReport {
  double operator_value = 0.0;
  double truncation_error = 0.0;
  double path_value = 0.0;
  double path_error = 0.0;
  double ess = 0.0;
  double free_closed_form = 0.0;  // 1/2 r(s)
  bool pass = false;
};

/// Single-mode path ensemble reweighted by v(phi); compares E_V[phi(0) phi(s)]
/// with oscillator_two_point within sigmas * error + truncation budget.
FeynmanKacReport feynman_kac_crosscheck(const OscillatorSpec& spec, int n_t, int s_index,
                                        const SamplerOptions& sampler, double sigmas = 5.0,
                                        double budget = 1e-6);

}  // namespace thermal
