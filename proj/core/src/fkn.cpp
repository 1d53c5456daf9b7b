#include "thermal/fkn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thermal/parallel.hpp"
#include "thermal/quasifree.hpp"

namespace thermal {

namespace {

constexpr double fixed_limit = 0x1.0p62;

int wrap(int i, int n) { return ((i % n) + n) % n; }

/// Leave-one-block-out standard error for a statistic of block partial results.
template <typename Stat>
double jackknife_error(std::size_t blocks, Stat&& leave_out) {
  if (blocks < 2) return 0.0;
  std::vector<double> theta(blocks);
  double mean = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    theta[b] = leave_out(b);
    mean += theta[b];
  }
  mean /= static_cast<double>(blocks);
  double ss = 0.0;
  for (double t : theta) ss += (t - mean) * (t - mean);
  return std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
}

std::size_t effective_blocks(std::size_t n, std::size_t blocks) {
  return std::max<std::size_t>(1, std::min(n, blocks));
}

void check_weights(const PathEnsemble& ensemble, const FknWeights& weights) {
  if (weights.weights.size() != ensemble.n_samples())
    throw std::invalid_argument("weights do not match the ensemble size");
}

}  // namespace

FixedExponent FixedExponent::from_double(double value) {
  if (!std::isfinite(value) || std::abs(value) >= fixed_limit)
    throw std::domain_error("FKN exponent out of fixed-point range");
  return FixedExponent(static_cast<raw_type>(std::nearbyint(std::ldexp(value, 64))));
}

double FixedExponent::to_double() const { return std::ldexp(static_cast<double>(raw_), -64); }

PotentialTable PotentialTable::evaluate(const PathEnsemble& ensemble, const SliceFunction& v,
                                        std::size_t shards) {
  PotentialTable t;
  t.n_samples_ = ensemble.n_samples();
  t.n_t_ = ensemble.n_t();
  t.step_ = ensemble.beta() / ensemble.n_t();
  const auto n_t = static_cast<std::size_t>(t.n_t_);
  t.v_.resize(t.n_samples_ * n_t);
  t.cells_.resize(t.n_samples_ * n_t);
  parallel_shards(t.n_samples_, shards, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      for (std::size_t i = 0; i < n_t; ++i) t.v_[n * n_t + i] = v(ensemble.slice(n, static_cast<int>(i)));
      for (std::size_t i = 0; i < n_t; ++i) {
        const double cell = 0.5 * t.step_ * (t.v_[n * n_t + i] + t.v_[n * n_t + (i + 1) % n_t]);
        t.cells_[n * n_t + i] = FixedExponent::from_double(cell);
      }
    }
  });
  return t;
}

double PotentialTable::potential(std::size_t sample, int t) const {
  return v_[sample * static_cast<std::size_t>(n_t_) + static_cast<std::size_t>(wrap(t, n_t_))];
}

FixedExponent PotentialTable::cell(std::size_t sample, int t) const {
  return cells_[sample * static_cast<std::size_t>(n_t_) + static_cast<std::size_t>(wrap(t, n_t_))];
}

FixedExponent PotentialTable::integral(std::size_t sample, int a, int b) const {
  if (b < a || b - a > n_t_) throw std::invalid_argument("FKN interval must satisfy a <= b <= a + n_t");
  FixedExponent sum;
  for (int i = a; i < b; ++i) sum += cell(sample, i);
  return sum;
}

double PotentialTable::kernel(std::size_t sample, int a, int b) const {
  return std::exp(-integral(sample, a, b).to_double());
}

double fkn_kernel(std::span<const double> path, std::size_t modes, double beta, const SliceFunction& v,
                  int a, int b) {
  if (modes == 0 || path.size() % modes != 0) throw std::invalid_argument("fkn_kernel: path shape");
  const int n_t = static_cast<int>(path.size() / modes);
  if (b < a || b - a > n_t) throw std::invalid_argument("FKN interval must satisfy a <= b <= a + n_t");
  const double step = beta / n_t;
  auto value = [&](int i) {
    return v(path.subspan(static_cast<std::size_t>(wrap(i, n_t)) * modes, modes));
  };
  FixedExponent sum;
  for (int i = a; i < b; ++i) sum += FixedExponent::from_double(0.5 * step * (value(i) + value(i + 1)));
  return std::exp(-sum.to_double());
}

AxiomReport axioms_check(const PathEnsemble& ensemble, const SliceFunction& v, std::uint64_t seed,
                         std::size_t shards) {
  const int n_t = ensemble.n_t();
  const auto base = PotentialTable::evaluate(ensemble, v, shards);
  const auto mirrored = PotentialTable::evaluate(reflect(ensemble), v, shards);
  const int shift = 1 + static_cast<int>(counter_hash(seed, 0, 0, 0) % static_cast<std::uint64_t>(n_t - 1));
  const auto moved = PotentialTable::evaluate(translate(ensemble, shift), v, shards);
  const bool full_turn = translate(ensemble, n_t) == ensemble;

  AxiomReport r;
  r.paths = ensemble.n_samples();
  r.period = full_turn;
  for (std::size_t n = 0; n < ensemble.n_samples(); ++n) {
    const auto h = counter_hash(seed, n, 1, 0);
    const int a = static_cast<int>(h % static_cast<std::uint64_t>(n_t)) - n_t / 2;
    const int len_ac = 1 + static_cast<int>((h >> 16) % static_cast<std::uint64_t>(n_t));
    const int len_ab = static_cast<int>((h >> 32) % static_cast<std::uint64_t>(len_ac + 1));
    const int b = a + len_ab;
    const int c = a + len_ac;

    const auto e_ab = base.integral(n, a, b);
    const auto e_bc = base.integral(n, b, c);
    const auto e_ac = base.integral(n, a, c);
    if (!(e_ab + e_bc == e_ac)) r.cocycle = false;
    const double e = e_ac.to_double();
    if (!std::isfinite(e) || (e < 700.0 && !(base.kernel(n, a, c) > 0.0))) r.positivity = false;
    if (!(moved.integral(n, a, c) == base.integral(n, a + shift, c + shift))) r.shift = false;
    if (!(mirrored.integral(n, a, c) == base.integral(n, -c, -a))) r.reflection = false;
    if (!(base.integral(n, a, a + n_t) == base.integral(n, 0, n_t))) r.period = false;
  }
  return r;
}

FknWeights perturb_measure(const PotentialTable& table, std::size_t blocks, double ess_floor) {
  const std::size_t n = table.n_samples();
  if (n == 0) throw std::invalid_argument("perturb_measure: empty ensemble");
  std::vector<double> exponent(n);
  for (std::size_t i = 0; i < n; ++i) exponent[i] = table.integral(i, 0, table.n_t()).to_double();
  FknWeights w;
  w.blocks = effective_blocks(n, blocks);
  w.min_exponent = *std::min_element(exponent.begin(), exponent.end());
  w.weights.resize(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w.weights[i] = std::exp(-(exponent[i] - w.min_exponent));
    sum += w.weights[i];
    sum_sq += w.weights[i] * w.weights[i];
  }
  w.log_z = -w.min_exponent + std::log(sum / static_cast<double>(n));
  w.ess = sum * sum / sum_sq;
  w.ess_ok = w.ess >= ess_floor;
  return w;
}

FknWeights uniform_weights(std::size_t n_samples, std::size_t blocks) {
  FknWeights w;
  w.weights.assign(n_samples, 1.0);
  w.blocks = effective_blocks(n_samples, blocks);
  w.ess = static_cast<double>(n_samples);
  return w;
}

Estimate weighted_mean(std::span<const double> values, const FknWeights& weights) {
  const std::size_t n = values.size();
  if (weights.weights.size() != n) throw std::invalid_argument("weighted_mean: size mismatch");
  const std::size_t blocks = effective_blocks(n, weights.blocks);
  std::vector<double> bw(blocks, 0.0);
  std::vector<double> bwg(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto [begin, end] = shard_range(n, blocks, b);
    for (std::size_t i = begin; i < end; ++i) {
      bw[b] += weights.weights[i];
      bwg[b] += weights.weights[i] * values[i];
    }
  }
  double sw = 0.0;
  double swg = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    sw += bw[b];
    swg += bwg[b];
  }
  Estimate e;
  e.value = swg / sw;
  e.error = jackknife_error(blocks, [&](std::size_t b) { return (swg - bwg[b]) / (sw - bw[b]); });
  return e;
}

Estimate perturbed_greens(const PathEnsemble& ensemble, const FknWeights& weights,
                          std::span<const SliceObservable> observables) {
  check_weights(ensemble, weights);
  for (const auto& o : observables)
    if (o.t < 0 || o.t >= ensemble.n_t()) throw std::out_of_range("perturbed_greens: time index");
  std::vector<double> values(ensemble.n_samples(), 1.0);
  for (std::size_t n = 0; n < ensemble.n_samples(); ++n)
    for (const auto& o : observables) values[n] *= o.f(ensemble.slice(n, o.t));
  return weighted_mean(values, weights);
}

LpBound lp_bound_check(const PotentialTable& table, double p, int a, int b, std::size_t blocks) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_bound_check: p must be >= 1");
  const std::size_t n = table.n_samples();
  std::vector<double> x(n);
  std::vector<double> y(n);
  const double length = (b - a) * table.step();
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = table.integral(i, a, b).to_double();
    y[i] = length * table.potential(i, a);
  }
  const double m = std::min(*std::min_element(x.begin(), x.end()), *std::min_element(y.begin(), y.end()));
  const std::size_t nb = effective_blocks(n, blocks);
  std::vector<double> sa(nb, 0.0), sb(nb, 0.0), cnt(nb, 0.0);
  for (std::size_t blk = 0; blk < nb; ++blk) {
    const auto [begin, end] = shard_range(n, nb, blk);
    for (std::size_t i = begin; i < end; ++i) {
      sa[blk] += std::exp(-p * (x[i] - m));
      sb[blk] += std::exp(-p * (y[i] - m));
    }
    cnt[blk] = static_cast<double>(end - begin);
  }
  double ta = 0.0, tb = 0.0;
  for (std::size_t blk = 0; blk < nb; ++blk) {
    ta += sa[blk];
    tb += sb[blk];
  }
  const double scale = std::exp(-m);
  const double total = static_cast<double>(n);
  auto norm = [&](double s, double count) { return scale * std::pow(s / count, 1.0 / p); };
  LpBound r;
  r.lhs = norm(ta, total);
  r.rhs = norm(tb, total);
  r.lhs_error = jackknife_error(nb, [&](std::size_t k) { return norm(ta - sa[k], total - cnt[k]); });
  r.rhs_error = jackknife_error(nb, [&](std::size_t k) { return norm(tb - sb[k], total - cnt[k]); });
  r.difference_error = jackknife_error(nb, [&](std::size_t k) {
    return norm(ta - sa[k], total - cnt[k]) - norm(tb - sb[k], total - cnt[k]);
  });
  r.pass = r.lhs <= r.rhs + 3.0 * r.difference_error + 1e-12 * r.rhs;
  return r;
}

WeightedGramReport weighted_os_check(const PathEnsemble& ensemble, const FknWeights& weights,
                                     std::span<const ExpFunctional> family) {
  check_weights(ensemble, weights);
  if (family.empty()) throw std::invalid_argument("weighted_os_check: empty family");
  const TimeGrid grid = ensemble.grid();
  struct Term {
    int t;
    std::vector<double> x;
    double alpha;
  };
  std::vector<std::vector<Term>> terms;
  for (const auto& f : family) {
    auto& out = terms.emplace_back();
    for (const auto& term : f) {
      if (term.time < -strip_tolerance || term.time > 0.5 * grid.beta + strip_tolerance)
        throw std::invalid_argument("weighted_os_check: times must lie in [0, beta/2]");
      if (term.arg.size() != ensemble.modes()) throw std::invalid_argument("weighted_os_check: arg size");
      out.push_back({grid.index_of(term.time), term.arg.real_coefficients(), term.alpha});
    }
  }
  const auto k = static_cast<Eigen::Index>(family.size());
  const std::size_t n = ensemble.n_samples();
  const std::size_t nb = effective_blocks(n, weights.blocks);
  std::vector<Eigen::MatrixXcd> block_sum(nb, Eigen::MatrixXcd::Zero(k, k));
  std::vector<double> block_norm(nb, 0.0);
  Eigen::VectorXcd direct(k);
  Eigen::VectorXcd mirrored(k);
  for (std::size_t blk = 0; blk < nb; ++blk) {
    const auto [begin, end] = shard_range(n, nb, blk);
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index a = 0; a < k; ++a) {
        double phase = 0.0;
        double phase_r = 0.0;
        for (const auto& term : terms[static_cast<std::size_t>(a)]) {
          phase += term.alpha * ensemble.field(i, term.t, term.x);
          phase_r += term.alpha * ensemble.field(i, grid.reflected(term.t), term.x);
        }
        direct(a) = std::polar(1.0, phase);
        mirrored(a) = std::polar(1.0, phase_r);
      }
      block_sum[blk] += weights.weights[i] * (mirrored.conjugate() * direct.transpose());
      block_norm[blk] += std::abs(weights.weights[i]);
    }
  }
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(k, k);
  double total_norm = 0.0;
  for (std::size_t blk = 0; blk < nb; ++blk) {
    total += block_sum[blk];
    total_norm += block_norm[blk];
  }
  auto min_eig = [&](const Eigen::MatrixXcd& m, double norm) {
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint()) / norm;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
  };
  WeightedGramReport r;
  r.min_eigenvalue = min_eig(total, total_norm);
  r.sigma = jackknife_error(nb, [&](std::size_t b) {
    return min_eig(total - block_sum[b], total_norm - block_norm[b]);
  });
  r.pass = r.min_eigenvalue >= -3.0 * r.sigma;
  return r;
}

FknWeights sign_flip_corruption(const FknWeights& weights, std::span<const double> selector) {
  if (selector.size() != weights.weights.size())
    throw std::invalid_argument("sign_flip_corruption: size mismatch");
  FknWeights out = weights;
  for (std::size_t i = 0; i < selector.size(); ++i)
    if (selector[i] > 0.0) out.weights[i] = -out.weights[i];
  return out;
}

WeightedMarkovReport weighted_markov_check(const PathEnsemble& ensemble, const FknWeights& weights,
                                           std::span<const double> x, int s_index, int s_prime_index,
                                           const std::function<double(double)>& f, int degree,
                                           bool boundary_both) {
  check_weights(ensemble, weights);
  const int n_t = ensemble.n_t();
  const int half = n_t / 2;
  if (s_index <= 0 || s_index >= half || s_prime_index >= 0 || s_prime_index <= -half)
    throw std::invalid_argument("weighted_markov_check: need 0 < s < beta/2 and -beta/2 < s' < 0");
  if (degree < 1 || degree > 6) throw std::invalid_argument("weighted_markov_check: degree in [1, 6]");

  std::vector<std::pair<int, int>> powers;
  for (int total = 0; total <= degree; ++total)
    for (int p = total; p >= 0; --p)
      if (boundary_both || total - p == 0) powers.emplace_back(p, total - p);

  const std::size_t n = ensemble.n_samples();
  const auto cols = static_cast<Eigen::Index>(powers.size());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), cols);
  Eigen::VectorXd future(static_cast<Eigen::Index>(n));
  Eigen::VectorXd past(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double b0 = ensemble.field(i, 0, x);
    const double b1 = ensemble.field(i, half, x);
    for (Eigen::Index c = 0; c < cols; ++c)
      design(static_cast<Eigen::Index>(i), c) =
          std::pow(b0, powers[static_cast<std::size_t>(c)].first) * std::pow(b1, powers[static_cast<std::size_t>(c)].second);
    future(static_cast<Eigen::Index>(i)) = f(ensemble.field(i, s_index, x));
    past(static_cast<Eigen::Index>(i)) = f(ensemble.field(i, wrap(s_prime_index, n_t), x));
  }

  const std::size_t nb = effective_blocks(n, weights.blocks);
  // residual covariance with samples [skip_begin, skip_end) left out
  auto residual = [&](std::size_t skip_begin, std::size_t skip_end) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
    Eigen::VectorXd rf = Eigen::VectorXd::Zero(cols);
    Eigen::VectorXd rg = Eigen::VectorXd::Zero(cols);
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= skip_begin && i < skip_end) continue;
      const auto row = design.row(static_cast<Eigen::Index>(i));
      const double w = weights.weights[i];
      gram.noalias() += w * row.transpose() * row;
      rf += w * future(static_cast<Eigen::Index>(i)) * row.transpose();
      rg += w * past(static_cast<Eigen::Index>(i)) * row.transpose();
    }
    const auto solver = gram.ldlt();
    const Eigen::VectorXd cf = solver.solve(rf);
    const Eigen::VectorXd cg = solver.solve(rg);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= skip_begin && i < skip_end) continue;
      const auto row = design.row(static_cast<Eigen::Index>(i));
      const double w = weights.weights[i];
      num += w * (future(static_cast<Eigen::Index>(i)) - row.dot(cf)) * (past(static_cast<Eigen::Index>(i)) - row.dot(cg));
      den += w;
    }
    return num / den;
  };
  WeightedMarkovReport r;
  r.residual = residual(0, 0);
  r.sigma = jackknife_error(nb, [&](std::size_t b) {
    const auto [begin, end] = shard_range(n, nb, b);
    return residual(begin, end);
  });
  r.pass = std::abs(r.residual) <= 3.0 * r.sigma;
  return r;
}

}  // namespace thermal
