#pragma once

// The beta-periodic Gaussian path space: Matsubara coefficients, spectral and
// Cholesky samplers, the reflection/translation index maps, and the
// closed-form OS-positivity, Gram-positivity and Markov checks.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermal/spectral.hpp"

namespace thermal {

/// Uniform grid s_i = i beta / n_t on the circle of length beta.
struct TimeGrid {
  double beta = 1.0;
  int n_t = 32;

  void validate() const;
  [[nodiscard]] double step() const { return beta / n_t; }
  [[nodiscard]] double time(int i) const;
  /// Index of -s_i mod beta.
  [[nodiscard]] int reflected(int i) const { return (n_t - i % n_t) % n_t; }
  /// Grid index of time s; throws std::invalid_argument when s is off-grid.
  [[nodiscard]] int index_of(double s) const;
};

/// Field samples phi(s_i, e_j), layout [sample][time][mode] row-major.
class PathEnsemble {
 public:
  PathEnsemble() = default;
  PathEnsemble(std::size_t n_samples, int n_t, std::size_t modes, double beta, std::uint64_t seed);

  [[nodiscard]] std::size_t n_samples() const { return n_samples_; }
  [[nodiscard]] int n_t() const { return n_t_; }
  [[nodiscard]] std::size_t modes() const { return modes_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] TimeGrid grid() const { return {beta_, n_t_}; }

  [[nodiscard]] double operator()(std::size_t sample, int t, std::size_t mode) const {
    return data_[index(sample, t, mode)];
  }
  double& operator()(std::size_t sample, int t, std::size_t mode) {
    return data_[index(sample, t, mode)];
  }
  /// All modes of one sample at one time.
  [[nodiscard]] std::span<const double> slice(std::size_t sample, int t) const {
    return {data_.data() + index(sample, t, 0), modes_};
  }
  /// One sample, all times and modes.
  [[nodiscard]] std::span<const double> path(std::size_t sample) const {
    return {data_.data() + index(sample, 0, 0), static_cast<std::size_t>(n_t_) * modes_};
  }
  std::span<double> path(std::size_t sample) {
    return {data_.data() + index(sample, 0, 0), static_cast<std::size_t>(n_t_) * modes_};
  }
  [[nodiscard]] std::span<const double> data() const { return data_; }

  /// phi(s_t, x) = sum_j x_j phi(s_t, e_j) for real coordinates x.
  [[nodiscard]] double field(std::size_t sample, int t, std::span<const double> x) const;

  friend bool operator==(const PathEnsemble&, const PathEnsemble&) = default;

 private:
  [[nodiscard]] std::size_t index(std::size_t sample, int t, std::size_t mode) const {
    return (sample * static_cast<std::size_t>(n_t_) + static_cast<std::size_t>(t)) * modes_ + mode;
  }

  std::size_t n_samples_ = 0;
  int n_t_ = 0;
  std::size_t modes_ = 0;
  double beta_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<double> data_;
};

/// File-system failure while reading or writing an artifact.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Binary format: "TFPE", u32 version, u64 n_samples, u64 n_t, u64 modes,
/// f64 beta, u64 seed, then row-major f64 samples; all little-endian.
void save_ensemble(const PathEnsemble& ensemble, const std::filesystem::path& file);
PathEnsemble load_ensemble(const std::filesystem::path& file);

/// r_n = 2a / (a^2 + (2 pi n / beta)^2) for n = -N..N (index n + N).
std::vector<double> matsubara_coefficients(double a, double beta, int n_max);

/// (1/beta) sum_{|n|<=N} r_n e^{i w_n s}: the truncated Fourier resummation of r(s).
double matsubara_resummation(double s, double a, double beta, int n_max);

struct SamplerOptions {
  std::size_t n_samples = 10000;
  std::uint64_t seed = 1;
  int n_mats = 512;
  std::size_t shards = 1;
};

/// Spectral synthesis of the periodic Gaussian field on the time grid.
/// Matsubara modes |n| <= n_mats are folded onto the n_t grid frequencies
/// (equal in law to the truncated series sampled on the grid). Normals are
/// drawn from counter-based streams keyed by (seed, sample, mode, frequency),
/// so values do not depend on the shard layout.
PathEnsemble sample_paths(const DiagonalSystem& system, const TimeGrid& grid,
                          const SamplerOptions& options);

/// max_s |1/2 r_N(s) - 1/2 r(s)| over the grid and modes: the covariance bias
/// from truncating the Matsubara series at n_mats.
double matsubara_truncation_error(const DiagonalSystem& system, const TimeGrid& grid, int n_mats);

/// Joint covariance 1/2 r_j(s_t - s_t') of phi(s_t, e_j) on the (time x mode)
/// grid. Row/column index t * modes + j.
Eigen::MatrixXd path_covariance_matrix(const DiagonalSystem& system, const TimeGrid& grid);

struct CholeskyReport {
  int clipped = 0;
  double max_clipped = 0.0;
};

/// Brute-force joint-Gaussian sampler through an eigenvalue square root.
/// Negative eigenvalues down to -1e-10 (relative to the largest) are clipped
/// to zero and counted; anything more negative throws std::domain_error.
PathEnsemble cholesky_oracle_sample(const Eigen::MatrixXd& covariance, const TimeGrid& grid,
                                    std::size_t modes, std::size_t n_samples, std::uint64_t seed,
                                    CholeskyReport* report = nullptr);

/// s_i -> -s_i mod beta.
PathEnsemble reflect(const PathEnsemble& ensemble);
/// (U(k) phi)(s_i) = phi(s_{i+k}).
PathEnsemble translate(const PathEnsemble& ensemble, int k);

/// One term alpha * phi(s, x) of an exponential functional.
struct ExpTerm {
  double time;
  TestVector arg;
  double alpha = 1.0;
};
/// F = exp(i sum_k alpha_k phi(s_k, x_k)).
using ExpFunctional = std::vector<ExpTerm>;

/// Closed-form Gram matrix M_kl = E[conj(R F_k) F_l] for functionals
/// supported in [0, beta/2]; returns its smallest eigenvalue.
double os_positivity_check(const DiagonalSystem& system, std::span<const ExpFunctional> family);
Eigen::MatrixXd os_gram_matrix(const DiagonalSystem& system, std::span<const ExpFunctional> family);

/// Smallest eigenvalue of the Hermitian matrix [(x_i, r(s_j - s_i) x_j)].
double gram_positivity_check(const DiagonalSystem& system, std::span<const double> times,
                             std::span<const TestVector> args);

/// |Cov(phi(s), phi(s')) - Cov(E[phi(s)|B], E[phi(s')|B])| with
/// B = (phi(0), phi(beta/2)), maximized over modes, for s in (0, beta/2)
/// and s' in (-beta/2, 0).
double markov_residual(const DiagonalSystem& system, double s, double s_prime);

/// Same residual for an arbitrary stationary beta-periodic covariance.
double markov_residual(const std::function<double(double)>& covariance, double beta, double s,
                       double s_prime);

/// 64 well-mixed bits keyed by a counter tuple.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// Deterministic standard normals keyed by a counter tuple.
std::pair<double, double> counter_normal_pair(std::uint64_t seed, std::uint64_t a,
                                              std::uint64_t b, std::uint64_t c);

}  // namespace thermal
