#include "thermal/standard_form.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "thermal/quasifree.hpp"

namespace thermal {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatrixXcd diag(const Eigen::VectorXd& v) { return v.cast<cplx>().asDiagonal(); }

MatrixXcd random_matrix(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXcd m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  return m;
}

MatrixXcd exp_i(const MatrixXcd& h, cplx z) {
  return hermitian_function(h, [z](double e) { return std::exp(cplx(0.0, 1.0) * z * e); });
}

MatrixXcd gibbs_density(const MatrixXcd& h, double beta) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(h);
  const double e0 = eig.eigenvalues().minCoeff();
  Eigen::VectorXcd w(h.rows());
  for (Index i = 0; i < w.size(); ++i) w(i) = std::exp(-beta * (eig.eigenvalues()(i) - e0));
  w /= w.sum();
  return eig.eigenvectors() * w.asDiagonal() * eig.eigenvectors().adjoint();
}

// max_t |state(A tau_{t + i shift}(B)) - state(tau_t(B) A)|
template <typename State>
double kms_residual_for(const State& state, const MatrixXcd& h, const MatrixXcd& a, const MatrixXcd& b,
                        std::span<const double> times, double shift) {
  double worst = 0.0;
  for (double t : times) {
    const cplx z(t, shift);
    const MatrixXcd shifted = exp_i(h, z) * b * exp_i(h, -z);
    const MatrixXcd real_time = exp_i(h, t) * b * exp_i(h, -t);
    worst = std::max(worst, std::abs(state(a * shifted) - state(real_time * a)));
  }
  return worst;
}

double max_abs(const MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

void FiniteKmsSystem::validate(Index max_dim) const {
  const Index d = hamiltonian.rows();
  if (d < 1 || hamiltonian.cols() != d) throw std::invalid_argument("hamiltonian must be square and nonempty");
  if (d > max_dim)
    throw std::invalid_argument("dimension " + std::to_string(d) + " exceeds the limit " + std::to_string(max_dim));
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  const double scale = std::max(1.0, max_abs(hamiltonian));
  if (max_abs(hamiltonian - hamiltonian.adjoint()) > 1e-12 * scale)
    throw std::invalid_argument("hamiltonian is not Hermitian");
  if (potential.size() != 0 && potential.size() != d) throw std::invalid_argument("potential has wrong size");
  if (charge.size() != 0 && charge.size() != d) throw std::invalid_argument("charge has wrong size");
  if (!potential.allFinite()) throw std::invalid_argument("potential must be finite");
}

FiniteKmsSystem random_kms_system(Index d, double beta, std::uint64_t seed, std::span<const int> charges) {
  if (!charges.empty() && static_cast<Index>(charges.size()) != d)
    throw std::invalid_argument("charges must have one entry per basis vector");
  std::mt19937_64 rng(seed);
  MatrixXcd g = random_matrix(d, rng);
  MatrixXcd h = (g + g.adjoint()) / (2.0 * std::sqrt(static_cast<double>(d)));
  FiniteKmsSystem sys;
  if (!charges.empty()) {
    sys.charge.resize(d);
    for (Index i = 0; i < d; ++i) sys.charge(i) = charges[static_cast<std::size_t>(i)];
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        if (sys.charge(i) != sys.charge(j)) h(i, j) = 0.0;
  }
  std::normal_distribution<double> normal;
  sys.hamiltonian = h;
  sys.beta = beta;
  sys.potential.resize(d);
  for (Index i = 0; i < d; ++i) sys.potential(i) = normal(rng);
  sys.validate();
  return sys;
}

VectorXcd vectorize(const MatrixXcd& m) {
  VectorXcd v(m.size());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

MatrixXcd unvectorize(const VectorXcd& v, Index d) {
  if (v.size() != d * d) throw std::invalid_argument("vector size is not d^2");
  MatrixXcd m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

VectorXcd gibbs_vector(const MatrixXcd& h, double beta) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(h);
  const double e0 = eig.eigenvalues().minCoeff();
  const MatrixXcd root = hermitian_function(h, [&](double e) { return cplx(std::exp(-0.5 * beta * (e - e0))); });
  VectorXcd v = vectorize(root);
  return v / v.norm();
}

StandardForm::StandardForm(FiniteKmsSystem system) : system_(std::move(system)) {
  system_.validate();
  const Index d = system_.dim();
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  omega_ = gibbs_vector(system_.hamiltonian, system_.beta);
  liouvillean_ = kron(system_.hamiltonian, id) - kron(id, system_.hamiltonian.transpose());
  gauge_ = Eigen::VectorXd::Zero(d * d);
  if (system_.charge.size() == d)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) gauge_(i * d + j) = system_.charge(i) - system_.charge(j);
}

MatrixXcd StandardForm::swap() const {
  const Index d = dim();
  MatrixXcd p = MatrixXcd::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) p(j * d + i, i * d + j) = 1.0;
  return p;
}

VectorXcd StandardForm::apply_j(const VectorXcd& v) const {
  const Index d = dim();
  VectorXcd out(v.size());
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) out(j * d + i) = std::conj(v(i * d + j));
  return out;
}

MatrixXcd StandardForm::conjugate_by_j(const MatrixXcd& m) const {
  const MatrixXcd p = swap();
  return p * m.conjugate() * p;
}

MatrixXcd StandardForm::left(const MatrixXcd& a) const { return kron(a, MatrixXcd::Identity(dim(), dim())); }

cplx StandardForm::state(const MatrixXcd& a) const {
  const MatrixXcd w = unvectorize(omega_, dim());
  return (w.adjoint() * a * w).trace();
}

StandardForm gns_build(const FiniteKmsSystem& system) { return StandardForm(system); }

GnsReport gns_verify(const StandardForm& form, int probes, std::uint64_t seed) {
  const Index d = form.dim();
  const Index n = d * d;
  GnsReport report;
  report.l_omega = (form.liouvillean() * form.omega()).norm();
  for (Index k = 0; k < n; ++k) {
    for (cplx phase : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
      VectorXcd e = VectorXcd::Zero(n);
      e(k) = phase;
      report.j_squared = std::max(report.j_squared, (form.apply_j(form.apply_j(e)) - e).norm());
    }
  }
  report.jlj = max_abs(form.conjugate_by_j(form.liouvillean()) + form.liouvillean());
  report.j_omega = (form.apply_j(form.omega()) - form.omega()).norm();

  const MatrixXcd rho = gibbs_density(form.system().hamiltonian, form.system().beta);
  std::mt19937_64 rng(seed);
  for (int p = 0; p < probes; ++p) {
    const MatrixXcd a = random_matrix(d, rng);
    report.state_vs_trace = std::max(report.state_vs_trace, std::abs(form.state(a) - (rho * a).trace()));
  }
  return report;
}

double kms_verify(const StandardForm& form, const MatrixXcd& a, const MatrixXcd& b, std::span<const double> times,
                  double shift) {
  const double beta_shift = shift < 0.0 ? form.system().beta : shift;
  return kms_residual_for([&](const MatrixXcd& m) { return form.state(m); }, form.system().hamiltonian, a, b,
                          times, beta_shift);
}

cplx PerturbedForm::state(const StandardForm& form, const MatrixXcd& a) const {
  const MatrixXcd w = unvectorize(omega_v, form.dim());
  return (w.adjoint() * a * w).trace();
}

PerturbedForm perturb(const StandardForm& form, const Eigen::VectorXd& v) {
  const Index d = form.dim();
  if (v.size() != d) throw std::invalid_argument("potential has wrong size");
  const double beta = form.system().beta;
  PerturbedForm out;
  out.h_v = form.liouvillean() + form.left(diag(v));
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(out.h_v);
  const double e0 = eig.eigenvalues().minCoeff();
  Eigen::VectorXcd w(eig.eigenvalues().size());
  for (Index i = 0; i < w.size(); ++i) w(i) = std::exp(-0.5 * beta * (eig.eigenvalues()(i) - e0));
  out.omega_v = eig.eigenvectors() * (w.asDiagonal() * (eig.eigenvectors().adjoint() * form.omega()));
  out.omega_v /= out.omega_v.norm();
  const VectorXcd direct = gibbs_vector(form.system().hamiltonian + diag(v), beta);
  out.gibbs_residual = (out.omega_v - direct).norm();
  return out;
}

bool LiouvilleanReport::pass(double closed_form, double kms_tol) const {
  return l_v_omega_v <= closed_form && l_v_formula <= closed_form && gibbs <= closed_form &&
         state <= closed_form && modular_conjugation <= closed_form && dynamics <= kms_tol && kms <= kms_tol;
}

LiouvilleanReport liouvillean_verify(const StandardForm& form, const Eigen::VectorXd& v, std::uint64_t seed) {
  const Index d = form.dim();
  const double beta = form.system().beta;
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  const MatrixXcd h_total = form.system().hamiltonian + diag(v);
  const PerturbedForm pf = perturb(form, v);

  LiouvilleanReport report;
  report.gibbs = pf.gibbs_residual;
  const MatrixXcd l_v = pf.h_v - form.conjugate_by_j(form.left(diag(v)));
  report.l_v_formula = max_abs(l_v - (kron(h_total, id) - kron(id, h_total.transpose())));
  report.l_v_omega_v = (l_v * pf.omega_v).norm();

  std::mt19937_64 rng(seed);
  const auto state_v = [&](const MatrixXcd& m) { return pf.state(form, m); };
  const std::vector<double> times{0.0, 0.37, -1.3, 2.1};
  for (double t : times) {
    const MatrixXcd a = random_matrix(d, rng);
    const MatrixXcd lifted = exp_i(l_v, t) * form.left(a) * exp_i(l_v, -t);
    const MatrixXcd evolved = exp_i(h_total, t) * a * exp_i(h_total, -t);
    report.dynamics = std::max(report.dynamics, max_abs(lifted - form.left(evolved)));
  }
  {
    const MatrixXcd a = random_matrix(d, rng);
    const MatrixXcd b = random_matrix(d, rng);
    report.kms = kms_residual_for(state_v, h_total, a, b, times, beta);
  }

  // Tomita map S(A Omega_V) = A^* Omega_V on the basis A = E_ij, written as
  // S psi = K conj(psi); the unitary polar factor of K represents J_V.
  const MatrixXcd w = unvectorize(pf.omega_v, d);
  MatrixXcd psi(d * d, d * d);
  MatrixXcd psi_adj(d * d, d * d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      MatrixXcd e = MatrixXcd::Zero(d, d);
      e(i, j) = 1.0;
      psi.col(i * d + j) = vectorize(e * w);
      psi_adj.col(i * d + j) = vectorize(e.adjoint() * w);
    }
  }
  const MatrixXcd k = psi.conjugate().transpose().partialPivLu().solve(psi_adj.transpose()).transpose();
  Eigen::JacobiSVD<MatrixXcd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatrixXcd u_j = svd.matrixU() * svd.matrixV().adjoint();
  report.modular_conjugation = max_abs(u_j - form.swap());

  const MatrixXcd rho_v = gibbs_density(h_total, beta);
  for (int p = 0; p < 10; ++p) {
    const MatrixXcd a = random_matrix(d, rng);
    report.state = std::max(report.state, std::abs(state_v(a) - (rho_v * a).trace()));
  }
  return report;
}

GaugeReport gauge_sector_check(const StandardForm& form) {
  const Index d = form.dim();
  const Index n = d * d;
  const auto& sys = form.system();
  Eigen::VectorXd q = Eigen::VectorXd::Zero(d);
  if (sys.charge.size() == d) q = sys.charge.cast<double>();
  const int orbit = static_cast<int>(q.maxCoeff() - q.minCoeff()) + 1;

  const MatrixXcd w = unvectorize(form.omega(), d);
  MatrixXcd invariant(n, n);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      MatrixXcd avg = MatrixXcd::Zero(d, d);
      for (int k = 0; k < orbit; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / orbit;
        avg(i, j) += std::exp(cplx(0.0, angle * (q(i) - q(j))));
      }
      avg /= static_cast<double>(orbit);
      invariant.col(i * d + j) = vectorize(avg * w);
    }
  }
  Eigen::JacobiSVD<MatrixXcd> svd(invariant, Eigen::ComputeFullU);
  const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > 1e-10 * top) ++rank;
  const MatrixXcd span_basis = svd.matrixU().leftCols(rank);

  std::vector<Index> kernel;
  for (Index k = 0; k < n; ++k)
    if (form.gauge()(k) == 0.0) kernel.push_back(k);
  MatrixXcd kernel_basis = MatrixXcd::Zero(n, static_cast<Index>(kernel.size()));
  for (std::size_t c = 0; c < kernel.size(); ++c) kernel_basis(kernel[c], static_cast<Index>(c)) = 1.0;

  GaugeReport report;
  report.span_dim = rank;
  report.kernel_dim = static_cast<Index>(kernel.size());
  const auto sine = [n](const MatrixXcd& from, const MatrixXcd& onto) {
    if (from.cols() == 0) return 0.0;
    const MatrixXcd rest = (MatrixXcd::Identity(n, n) - onto * onto.adjoint()) * from;
    Eigen::JacobiSVD<MatrixXcd> s(rest);
    return s.singularValues()(0);
  };
  report.max_sine = std::max(sine(span_basis, kernel_basis), sine(kernel_basis, span_basis));
  report.q_omega = (form.gauge().cast<cplx>().asDiagonal() * form.omega()).norm();
  return report;
}

namespace {

double polynomial(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Two-point value on one finite-difference grid with n interior points.
double grid_two_point(const OscillatorSpec& spec, double s, double half_width, Index n) {
  const double a = spec.frequency;
  const double h = 2.0 * half_width / static_cast<double>(n + 1);
  Eigen::VectorXd diagonal(n);
  Eigen::VectorXd off = Eigen::VectorXd::Constant(n - 1, -0.5 * a / (h * h));
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) {
    x(i) = -half_width + static_cast<double>(i + 1) * h;
    diagonal(i) = a / (h * h) + 0.5 * a * x(i) * x(i) + polynomial(spec.potential, x(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diagonal, off, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& e = eig.eigenvalues();
  const double e0 = e(0);
  const double cutoff = 40.0 / spec.beta;
  Index kept = 1;
  while (kept < n && e(kept) - e0 <= cutoff) ++kept;

  // Eigenvectors of the kept levels by shifted inverse iteration.
  Eigen::MatrixXd u(n, kept);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (Index m = 0; m < kept; ++m) {
    const double gap = std::min(m > 0 ? e(m) - e(m - 1) : 1.0, m + 1 < n ? e(m + 1) - e(m) : 1.0);
    Eigen::SparseMatrix<double> t(n, n);
    std::vector<Eigen::Triplet<double>> entries;
    for (Index i = 0; i < n; ++i) {
      entries.emplace_back(i, i, diagonal(i) - e(m) - 1e-6 * gap);
      if (i + 1 < n) {
        entries.emplace_back(i, i + 1, off(i));
        entries.emplace_back(i + 1, i, off(i));
      }
    }
    t.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(t);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) y(i) = normal(rng);
    for (int it = 0; it < 3; ++it) {
      y = lu.solve(y);
      y.normalize();
    }
    u.col(m) = y;
  }
  const Eigen::MatrixXd xm = u.transpose() * x.asDiagonal() * u;
  double z = 0.0;
  double num = 0.0;
  for (Index m = 0; m < kept; ++m) {
    z += std::exp(-spec.beta * (e(m) - e0));
    for (Index k = 0; k < kept; ++k)
      num += std::exp(-(spec.beta - s) * (e(m) - e0) - s * (e(k) - e0)) * xm(m, k) * xm(m, k);
  }
  return num / z;
}

}  // namespace

OperatorValue oscillator_two_point(const OscillatorSpec& spec, double s, double tolerance) {
  if (!(spec.frequency > 0.0) || !(spec.beta > 0.0)) throw std::invalid_argument("frequency and beta must be positive");
  if (s < 0.0 || s > spec.beta) throw std::invalid_argument("s must lie in [0, beta]");
  if (spec.potential.size() > 1 && spec.potential.size() % 2 == 0 && spec.potential.back() < 0.0)
    throw std::invalid_argument("potential is unbounded below");
  const double e_max = 40.0 / spec.beta;
  const double half_width = std::sqrt(2.0 * e_max / spec.frequency) + 6.0;
  const Index base = static_cast<Index>(std::ceil(2.0 * half_width / 0.2));
  constexpr int max_levels = 4;

  OperatorValue out;
  double previous_raw = 0.0;
  double previous_extrapolated = 0.0;
  for (int level = 0; level <= max_levels; ++level) {
    const Index n = base * (Index{1} << level) - 1;
    const double raw = grid_two_point(spec, s, half_width, n);
    out.grid_points = static_cast<int>(n);
    if (level >= 1) {
      const double extrapolated = (4.0 * raw - previous_raw) / 3.0;
      if (level >= 2) {
        out.value = extrapolated;
        out.truncation_error = std::abs(extrapolated - previous_extrapolated);
        if (out.truncation_error <= tolerance) return out;
      }
      previous_extrapolated = extrapolated;
    }
    previous_raw = raw;
  }
  return out;
}

FeynmanKacReport feynman_kac_crosscheck(const OscillatorSpec& spec, int n_t, int s_index,
                                        const SamplerOptions& sampler, double sigmas, double budget) {
  const TimeGrid grid{spec.beta, n_t};
  grid.validate();
  if (s_index < 0 || s_index >= n_t) throw std::invalid_argument("s_index out of range");
  const double s = grid.time(s_index);

  FeynmanKacReport report;
  const OperatorValue op = oscillator_two_point(spec, s);
  report.operator_value = op.value;
  report.truncation_error = op.truncation_error;
  report.free_closed_form = 0.5 * periodic_cov(s, spec.frequency, spec.beta);

  const auto system = DiagonalSystem::from_frequencies({spec.frequency}, spec.beta);
  const PathEnsemble ensemble = sample_paths(system, grid, sampler);
  const std::vector<double> coeffs = spec.potential;
  const SliceFunction v = [coeffs](std::span<const double> slice) { return polynomial(coeffs, slice[0]); };
  const PotentialTable table = PotentialTable::evaluate(ensemble, v, sampler.shards);
  const FknWeights weights = perturb_measure(table);
  report.ess = weights.ess;
  const SliceFunction position = [](std::span<const double> slice) { return slice[0]; };
  const std::vector<SliceObservable> observables{{0, position}, {s_index, position}};
  const Estimate est = perturbed_greens(ensemble, weights, observables);
  report.path_value = est.value;
  report.path_error = est.error;
  report.pass = op.truncation_error <= budget && weights.ess_ok &&
                std::abs(est.value - op.value) <= sigmas * est.error + budget;
  return report;
}

}  // namespace thermal
