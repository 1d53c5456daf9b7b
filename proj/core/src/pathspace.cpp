#include "thermal/pathspace.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "thermal/parallel.hpp"
#include "thermal/quasifree.hpp"

namespace thermal {

void TimeGrid::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("time grid: beta must be > 0");
  if (n_t < 4 || n_t % 2 != 0) throw std::invalid_argument("time grid: n_t must be even and >= 4");
}

double TimeGrid::time(int i) const {
  const int k = ((i % n_t) + n_t) % n_t;
  return beta * k / n_t;
}

int TimeGrid::index_of(double s) const {
  double r = std::fmod(s, beta);
  if (r < 0.0) r += beta;
  const double k = std::round(r / step());
  if (std::abs(k * step() - r) > 1e-9 * beta)
    throw std::invalid_argument("time " + std::to_string(s) + " is not on the grid");
  return static_cast<int>(k) % n_t;
}

PathEnsemble::PathEnsemble(std::size_t n_samples, int n_t, std::size_t modes, double beta,
                           std::uint64_t seed)
    : n_samples_(n_samples), n_t_(n_t), modes_(modes), beta_(beta), seed_(seed),
      data_(n_samples * static_cast<std::size_t>(n_t) * modes, 0.0) {}

double PathEnsemble::field(std::size_t sample, int t, std::span<const double> x) const {
  if (x.size() != modes_) throw std::invalid_argument("field: test vector size mismatch");
  const auto s = slice(sample, t);
  double sum = 0.0;
  for (std::size_t j = 0; j < modes_; ++j) sum += x[j] * s[j];
  return sum;
}

namespace {

constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double to_unit_open(std::uint64_t bits) {
  // (0, 1]: never zero, so the logarithm below stays finite.
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

double omega(int n, double beta) { return 2.0 * std::numbers::pi * n / beta; }

/// Grid-frequency power S_q of one mode after folding |n| <= n_mats onto q = n mod n_t.
std::vector<double> folded_spectrum(double a, double beta, int n_t, int n_mats) {
  std::vector<double> s(static_cast<std::size_t>(n_t), 0.0);
  const auto r = matsubara_coefficients(a, beta, n_mats);
  for (int n = -n_mats; n <= n_mats; ++n) {
    const int q = ((n % n_t) + n_t) % n_t;
    s[static_cast<std::size_t>(q)] += r[static_cast<std::size_t>(n + n_mats)] / (2.0 * beta);
  }
  return s;
}

void check_family_times(const DiagonalSystem& system, std::span<const ExpFunctional> family) {
  const double half = 0.5 * system.beta();
  for (const auto& f : family)
    for (const auto& term : f) {
      if (term.time < -strip_tolerance || term.time > half + strip_tolerance)
        throw std::invalid_argument("os_positivity_check: times must lie in [0, beta/2]");
      check_dimension(system, term.arg);
      if (!is_kappa_real(system, term.arg))
        throw std::invalid_argument("os_positivity_check: arguments must be kappa-real");
    }
}

/// E[phi(s, x) phi(s', y)] for kappa-real x, y and arbitrary real times.
double field_cov(const DiagonalSystem& system, double ds, const TestVector& x,
                 const TestVector& y) {
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    sum += (std::conj(x[j]) * y[j]).real() * periodic_cov(ds, system.frequency(j), system.beta());
  return 0.5 * sum;
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ (b * 0xd1b54a32d192ed03ULL));
  return mix(h ^ (c * 0x8cb92ba72f3d8dd7ULL));
}

std::pair<double, double> counter_normal_pair(std::uint64_t seed, std::uint64_t a,
                                              std::uint64_t b, std::uint64_t c) {
  const std::uint64_t h = counter_hash(seed, a, b, c);
  const double u1 = to_unit_open(mix(h ^ 0x5851f42d4c957f2dULL));
  const double u2 = to_unit_open(mix(h ^ 0x14057b7ef767814fULL));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::vector<double> matsubara_coefficients(double a, double beta, int n_max) {
  if (!(a > 0.0) || !(beta > 0.0)) throw std::invalid_argument("matsubara: a, beta must be > 0");
  if (n_max < 0) throw std::invalid_argument("matsubara: truncation must be >= 0");
  std::vector<double> r(2 * static_cast<std::size_t>(n_max) + 1);
  for (int n = -n_max; n <= n_max; ++n) {
    const double w = omega(n, beta);
    r[static_cast<std::size_t>(n + n_max)] = 2.0 * a / (a * a + w * w);
  }
  return r;
}

double matsubara_resummation(double s, double a, double beta, int n_max) {
  const auto r = matsubara_coefficients(a, beta, n_max);
  double sum = r[static_cast<std::size_t>(n_max)];
  // pair +n and -n, smallest terms first
  for (int n = n_max; n >= 1; --n)
    sum += 2.0 * r[static_cast<std::size_t>(n + n_max)] * std::cos(omega(n, beta) * s);
  return sum / beta;
}

PathEnsemble sample_paths(const DiagonalSystem& system, const TimeGrid& grid,
                          const SamplerOptions& options) {
  grid.validate();
  if (options.n_samples == 0) throw std::invalid_argument("sample_paths: n_samples must be > 0");
  if (options.n_mats < 1) throw std::invalid_argument("sample_paths: n_mats must be >= 1");
  if (std::abs(grid.beta - system.beta()) > 1e-12 * system.beta())
    throw std::invalid_argument("sample_paths: grid beta differs from system beta");

  const int n_t = grid.n_t;
  const int half = n_t / 2;
  const std::size_t modes = system.size();

  // amplitude[j][q]: standard deviation of the q-th grid frequency of mode j
  std::vector<std::vector<double>> amplitude(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    const auto s = folded_spectrum(system.frequency(j), grid.beta, n_t, options.n_mats);
    auto& amp = amplitude[j];
    amp.assign(static_cast<std::size_t>(half) + 1, 0.0);
    amp[0] = std::sqrt(s[0]);
    amp[static_cast<std::size_t>(half)] = std::sqrt(s[static_cast<std::size_t>(half)]);
    for (int q = 1; q < half; ++q) amp[static_cast<std::size_t>(q)] = std::sqrt(0.5 * s[static_cast<std::size_t>(q)]);
  }
  std::vector<double> cos_table(static_cast<std::size_t>(n_t));
  std::vector<double> sin_table(static_cast<std::size_t>(n_t));
  for (int k = 0; k < n_t; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n_t;
    cos_table[static_cast<std::size_t>(k)] = std::cos(angle);
    sin_table[static_cast<std::size_t>(k)] = std::sin(angle);
  }

  PathEnsemble out(options.n_samples, n_t, modes, grid.beta, options.seed);
  parallel_shards(options.n_samples, options.shards,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> a_coef(static_cast<std::size_t>(half) + 1);
    std::vector<double> b_coef(static_cast<std::size_t>(half) + 1);
    for (std::size_t n = begin; n < end; ++n)
      for (std::size_t j = 0; j < modes; ++j) {
        const auto& amp = amplitude[j];
        for (int q = 0; q <= half; ++q) {
          const auto [z1, z2] = counter_normal_pair(options.seed, n, j, static_cast<std::uint64_t>(q));
          a_coef[static_cast<std::size_t>(q)] = amp[static_cast<std::size_t>(q)] * z1;
          b_coef[static_cast<std::size_t>(q)] = amp[static_cast<std::size_t>(q)] * z2;
        }
        for (int i = 0; i < n_t; ++i) {
          double v = a_coef[0] + ((i % 2 == 0) ? 1.0 : -1.0) * a_coef[static_cast<std::size_t>(half)];
          double osc = 0.0;
          for (int q = 1; q < half; ++q) {
            const auto k = static_cast<std::size_t>((q * i) % n_t);
            osc += a_coef[static_cast<std::size_t>(q)] * cos_table[k] -
                   b_coef[static_cast<std::size_t>(q)] * sin_table[k];
          }
          out(n, i, j) = v + 2.0 * osc;
        }
      }
  });
  return out;
}

double matsubara_truncation_error(const DiagonalSystem& system, const TimeGrid& grid, int n_mats) {
  grid.validate();
  double worst = 0.0;
  for (std::size_t j = 0; j < system.size(); ++j) {
    const double a = system.frequency(j);
    const auto s = folded_spectrum(a, grid.beta, grid.n_t, n_mats);
    for (int i = 0; i <= grid.n_t / 2; ++i) {
      double truncated = 0.0;
      for (int q = 0; q < grid.n_t; ++q)
        truncated += s[static_cast<std::size_t>(q)] * std::cos(2.0 * std::numbers::pi * q * i / grid.n_t);
      worst = std::max(worst, std::abs(truncated - 0.5 * periodic_cov(grid.time(i), a, grid.beta)));
    }
  }
  return worst;
}

Eigen::MatrixXd path_covariance_matrix(const DiagonalSystem& system, const TimeGrid& grid) {
  grid.validate();
  const auto modes = static_cast<Eigen::Index>(system.size());
  const Eigen::Index dim = grid.n_t * modes;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (int t = 0; t < grid.n_t; ++t)
    for (int u = 0; u < grid.n_t; ++u) {
      const int lag = ((u - t) % grid.n_t + grid.n_t) % grid.n_t;
      for (Eigen::Index j = 0; j < modes; ++j)
        cov(t * modes + j, u * modes + j) =
            0.5 * periodic_cov(grid.time(lag), system.frequency(static_cast<std::size_t>(j)), grid.beta);
    }
  return cov;
}

PathEnsemble cholesky_oracle_sample(const Eigen::MatrixXd& covariance, const TimeGrid& grid,
                                    std::size_t modes, std::size_t n_samples, std::uint64_t seed,
                                    CholeskyReport* report) {
  grid.validate();
  const Eigen::Index dim = covariance.rows();
  if (covariance.cols() != dim || dim != static_cast<Eigen::Index>(grid.n_t) * static_cast<Eigen::Index>(modes))
    throw std::invalid_argument("cholesky_oracle_sample: covariance shape does not match grid x modes");
  if (n_samples == 0) throw std::invalid_argument("cholesky_oracle_sample: n_samples must be > 0");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  if (eig.info() != Eigen::Success) throw std::runtime_error("cholesky_oracle_sample: eigensolver failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  CholeskyReport local;
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (lambda(k) >= 0.0) continue;
    if (lambda(k) < -1e-10 * scale)
      throw std::domain_error("cholesky_oracle_sample: covariance has eigenvalue " +
                              std::to_string(lambda(k)));
    ++local.clipped;
    local.max_clipped = std::max(local.max_clipped, -lambda(k));
    lambda(k) = 0.0;
  }
  if (report) *report = local;
  const Eigen::MatrixXd root = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();

  PathEnsemble out(n_samples, grid.n_t, modes, grid.beta, seed);
  constexpr std::size_t chunk = 4096;
  for (std::size_t begin = 0; begin < n_samples; begin += chunk) {
    const std::size_t count = std::min(chunk, n_samples - begin);
    Eigen::MatrixXd z(dim, static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c)
      for (Eigen::Index k = 0; k < dim; k += 2) {
        const auto [z1, z2] = counter_normal_pair(seed ^ 0xc0ffee, begin + c, static_cast<std::uint64_t>(k), 0);
        z(k, static_cast<Eigen::Index>(c)) = z1;
        if (k + 1 < dim) z(k + 1, static_cast<Eigen::Index>(c)) = z2;
      }
    const Eigen::MatrixXd x = root * z;
    for (std::size_t c = 0; c < count; ++c) {
      auto dst = out.path(begin + c);
      for (Eigen::Index k = 0; k < dim; ++k) dst[static_cast<std::size_t>(k)] = x(k, static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

PathEnsemble reflect(const PathEnsemble& ensemble) {
  PathEnsemble out(ensemble.n_samples(), ensemble.n_t(), ensemble.modes(), ensemble.beta(), ensemble.seed());
  const TimeGrid grid = ensemble.grid();
  for (std::size_t n = 0; n < ensemble.n_samples(); ++n)
    for (int i = 0; i < ensemble.n_t(); ++i)
      for (std::size_t j = 0; j < ensemble.modes(); ++j) out(n, i, j) = ensemble(n, grid.reflected(i), j);
  return out;
}

PathEnsemble translate(const PathEnsemble& ensemble, int k) {
  PathEnsemble out(ensemble.n_samples(), ensemble.n_t(), ensemble.modes(), ensemble.beta(), ensemble.seed());
  const int n_t = ensemble.n_t();
  for (std::size_t n = 0; n < ensemble.n_samples(); ++n)
    for (int i = 0; i < n_t; ++i) {
      const int src = ((i + k) % n_t + n_t) % n_t;
      for (std::size_t j = 0; j < ensemble.modes(); ++j) out(n, i, j) = ensemble(n, src, j);
    }
  return out;
}

Eigen::MatrixXd os_gram_matrix(const DiagonalSystem& system, std::span<const ExpFunctional> family) {
  check_family_times(system, family);
  const auto size = static_cast<Eigen::Index>(family.size());
  Eigen::MatrixXd gram(size, size);
  for (Eigen::Index k = 0; k < size; ++k)
    for (Eigen::Index l = 0; l < size; ++l) {
      // Var(Z_l - R Z_k), R Z_k has its times reflected s -> -s.
      const auto& fk = family[static_cast<std::size_t>(k)];
      const auto& fl = family[static_cast<std::size_t>(l)];
      double var = 0.0;
      for (const auto& p : fl)
        for (const auto& q : fl) var += p.alpha * q.alpha * field_cov(system, p.time - q.time, p.arg, q.arg);
      for (const auto& p : fk)
        for (const auto& q : fk) var += p.alpha * q.alpha * field_cov(system, q.time - p.time, p.arg, q.arg);
      for (const auto& p : fl)
        for (const auto& q : fk) var -= 2.0 * p.alpha * q.alpha * field_cov(system, p.time + q.time, p.arg, q.arg);
      gram(k, l) = std::exp(-0.5 * var);
    }
  return 0.5 * (gram + gram.transpose());
}

double os_positivity_check(const DiagonalSystem& system, std::span<const ExpFunctional> family) {
  if (family.empty()) throw std::invalid_argument("os_positivity_check: empty family");
  const Eigen::MatrixXd gram = os_gram_matrix(system, family);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double gram_positivity_check(const DiagonalSystem& system, std::span<const double> times,
                             std::span<const TestVector> args) {
  if (times.size() != args.size() || times.empty())
    throw std::invalid_argument("gram_positivity_check: need matching non-empty times and args");
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXcd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    check_dimension(system, args[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& xi = args[static_cast<std::size_t>(i)];
      const auto& xj = args[static_cast<std::size_t>(j)];
      const double ds = times[static_cast<std::size_t>(j)] - times[static_cast<std::size_t>(i)];
      cplx sum = 0.0;
      for (std::size_t m = 0; m < xi.size(); ++m)
        sum += std::conj(xi[m]) * periodic_cov(ds, system.frequency(m), system.beta()) * xj[m];
      gram(i, j) = sum;
    }
  }
  const Eigen::MatrixXcd herm = 0.5 * (gram + gram.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double markov_residual(const std::function<double(double)>& covariance, double beta, double s,
                       double s_prime) {
  if (!(beta > 0.0)) throw std::invalid_argument("markov_residual: beta must be > 0");
  const double half = 0.5 * beta;
  if (s < 0.0 || s > half || s_prime > 0.0 || s_prime < -half)
    throw std::invalid_argument("markov_residual: need s in [0, beta/2] and s' in [-beta/2, 0]");
  Eigen::Matrix2d boundary;
  boundary << covariance(0.0), covariance(half), covariance(half), covariance(0.0);
  const Eigen::Vector2d forward(covariance(s), covariance(s - half));
  const Eigen::Vector2d backward(covariance(s_prime), covariance(s_prime - half));
  const double projected = forward.dot(boundary.ldlt().solve(backward));
  return std::abs(covariance(s - s_prime) - projected);
}

double markov_residual(const DiagonalSystem& system, double s, double s_prime) {
  double worst = 0.0;
  for (std::size_t j = 0; j < system.size(); ++j) {
    const double a = system.frequency(j);
    const double beta = system.beta();
    worst = std::max(worst, markov_residual([&](double u) { return 0.5 * periodic_cov(u, a, beta); },
                                            beta, s, s_prime));
  }
  return worst;
}

}  // namespace thermal
