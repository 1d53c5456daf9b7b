#pragma once

// Feynman-Kac-Nelson kernels F_[a,b] = exp(-int_a^b V(path(t)) dt) on sampled
// paths, reweighting of the free measure, and the weighted OS / Markov / L^p
// diagnostics of the perturbed path space.
//
// Time integrals use trapezoid cells on the shared grid. Each cell is rounded
// once to a 2^-64 fixed-point integer, so sums over cells (cocycle, shift,
// reflection, full period) are exact integer identities.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "thermal/interactions.hpp"
#include "thermal/pathspace.hpp"

namespace thermal {

/// V as a function of one time slice of real-mode values.
using SliceFunction = std::function<double(std::span<const double>)>;

/// Exponent int V dt in units of 2^-64.
class FixedExponent {
 public:
  __extension__ using raw_type = __int128;

  constexpr FixedExponent() = default;
  static FixedExponent from_double(double value);
  [[nodiscard]] double to_double() const;
  [[nodiscard]] raw_type raw() const { return raw_; }

  friend FixedExponent operator+(FixedExponent a, FixedExponent b) { return FixedExponent(a.raw_ + b.raw_); }
  friend FixedExponent operator-(FixedExponent a, FixedExponent b) { return FixedExponent(a.raw_ - b.raw_); }
  FixedExponent& operator+=(FixedExponent o) {
    raw_ += o.raw_;
    return *this;
  }
  friend bool operator==(FixedExponent, FixedExponent) = default;
  friend auto operator<=>(FixedExponent, FixedExponent) = default;

 private:
  constexpr explicit FixedExponent(raw_type raw) : raw_(raw) {}
  raw_type raw_ = 0;
};

/// V(path(s_i)) for every sample and grid time, plus the fixed-point cell
/// integrals 1/2 ds (V_i + V_{i+1}).
class PotentialTable {
 public:
  static PotentialTable evaluate(const PathEnsemble& ensemble, const SliceFunction& v,
                                 std::size_t shards = 1);

  [[nodiscard]] std::size_t n_samples() const { return n_samples_; }
  [[nodiscard]] int n_t() const { return n_t_; }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] double potential(std::size_t sample, int t) const;
  [[nodiscard]] FixedExponent cell(std::size_t sample, int t) const;

  /// int_a^b V dt over grid indices a <= b, b - a <= n_t (indices taken mod n_t).
  [[nodiscard]] FixedExponent integral(std::size_t sample, int a, int b) const;
  /// F_[a,b] = exp(-integral).
  [[nodiscard]] double kernel(std::size_t sample, int a, int b) const;

 private:
  std::size_t n_samples_ = 0;
  int n_t_ = 0;
  double step_ = 0.0;
  std::vector<double> v_;
  std::vector<FixedExponent> cells_;
};

/// fkn_kernel for one path given as [t][mode] values.
double fkn_kernel(std::span<const double> path, std::size_t modes, double beta, const SliceFunction& v,
                  int a, int b);

struct AxiomReport {
  std::size_t paths = 0;
  bool positivity = true;
  bool cocycle = true;
  bool shift = true;
  bool reflection = true;
  bool period = true;
  [[nodiscard]] bool all() const { return positivity && cocycle && shift && reflection && period; }
};

/// Positivity, cocycle F_[a,b]F_[b,c] = F_[a,c], shift U(k)F_[a,b] = F_[a+k,b+k],
/// reflection RF_[a,b] = F_[-b,-a] and period, compared as exact exponents. The
/// shifted and reflected kernels are recomputed from translated and
/// reflected ensembles.
AxiomReport axioms_check(const PathEnsemble& ensemble, const SliceFunction& v, std::uint64_t seed = 3,
                         std::size_t shards = 1);

struct FknWeights {
  /// exp(-(E_i - E_min)), E_i the full-period exponent; max weight 1.
  std::vector<double> weights;
  double min_exponent = 0.0;
  /// log of the mean raw weight exp(-E_i).
  double log_z = 0.0;
  double ess = 0.0;
  /// Jackknife blocks (contiguous sample ranges).
  std::size_t blocks = 20;
  bool ess_ok = true;
};

FknWeights perturb_measure(const PotentialTable& table, std::size_t blocks = 20, double ess_floor = 50.0);

/// Uniform weights (the free measure).
FknWeights uniform_weights(std::size_t n_samples, std::size_t blocks = 20);

/// sum w G / sum w with leave-one-block-out jackknife error.
Estimate weighted_mean(std::span<const double> values, const FknWeights& weights);

/// One factor of a perturbed Green's function: f(phi(s_t, .)).
struct SliceObservable {
  int t = 0;
  SliceFunction f;
};

/// E_V[prod_j f_j(phi(s_j))].
Estimate perturbed_greens(const PathEnsemble& ensemble, const FknWeights& weights,
                          std::span<const SliceObservable> observables);

struct LpBound {
  double lhs = 0.0;  // ||exp(-int_a^b V)||_p
  double rhs = 0.0;  // ||exp(-(b-a) V)||_p
  double lhs_error = 0.0;
  double rhs_error = 0.0;
  double difference_error = 0.0;
  bool pass = false;
};

/// Both norms under the free measure with a common scale; passes when
/// lhs <= rhs + 3 sigma(lhs - rhs).
LpBound lp_bound_check(const PotentialTable& table, double p, int a, int b, std::size_t blocks = 20);

struct WeightedGramReport {
  double min_eigenvalue = 0.0;
  double sigma = 0.0;
  bool pass = false;
};

/// Weighted MC Gram M_kl = sum w conj(F_k(R path)) F_l(path) / sum |w| for
/// exp(i sum alpha phi) functionals on grid times in [0, beta/2]; passes when
/// min eigenvalue >= -3 sigma (jackknife).
WeightedGramReport weighted_os_check(const PathEnsemble& ensemble, const FknWeights& weights,
                                     std::span<const ExpFunctional> family);

/// Weights with the sign flipped wherever selector > 0 (negative control).
FknWeights sign_flip_corruption(const FknWeights& weights, std::span<const double> selector);

struct WeightedMarkovReport {
  double residual = 0.0;
  double sigma = 0.0;
  bool pass = false;
};

/// E_w[(F - P F)(G - P G)] where F = f(phi(s, x)), G = f(phi(s', x)) with
/// s in (0, beta/2), s' in (-beta/2, 0) (grid indices), and P the weighted
/// least-squares projection onto polynomials of degree <= `degree` in the
/// boundary values phi(0, x), phi(beta/2, x). With `boundary_both` false only
/// phi(0, x) is used (negative control). Passes when |residual| <= 3 sigma.
WeightedMarkovReport weighted_markov_check(const PathEnsemble& ensemble, const FknWeights& weights,
                                           std::span<const double> x, int s_index, int s_prime_index,
                                           const std::function<double(double)>& f, int degree = 3,
                                           bool boundary_both = true);

}  // namespace thermal
