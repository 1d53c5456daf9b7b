#pragma once

// Spatially cutoff interactions on the real-space lattice of a ModeGrid:
// UV-smeared fields phi_L(x), Wick-ordered polynomial / exponential /
// charged-polynomial densities, exact L2 pairings, and the Lambda -> infinity
// convergence and Hoegh-Krohn series diagnostics.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "thermal/pathspace.hpp"
#include "thermal/spectral.hpp"
#include "thermal/wick.hpp"

namespace thermal {

/// Fourier transform chi^(p) of a unit-mass bump chi.
class ChiProfile {
 public:
  enum class Shape { cos2, gaussian };

  ChiProfile() = default;
  ChiProfile(Shape shape, double width);
  /// "cos2:<width>" or "gaussian:<width>"; the width defaults to 1.
  static ChiProfile parse(const std::string& text);

  [[nodiscard]] double operator()(double p) const;
  [[nodiscard]] Shape shape() const { return shape_; }
  [[nodiscard]] double width() const { return width_; }
  [[nodiscard]] std::string describe() const;

 private:
  Shape shape_ = Shape::cos2;
  double width_ = 1.0;
};

/// g sampled on the grid lattice from "box:<half_width>", "cos2:<width>",
/// "const:<value>" or "zero".
std::vector<double> spatial_cutoff(const ModeGrid& grid, const std::string& profile);

struct CutoffSpec {
  /// UV cutoff; +infinity removes it.
  double lambda = 8.0;
  ChiProfile chi;
  /// g(x) on the lattice positions of the grid.
  std::vector<double> g;

  void validate(const ModeGrid& grid) const;
  [[nodiscard]] double g_l1(const ModeGrid& grid) const;
  [[nodiscard]] double g_l2(const ModeGrid& grid) const;
};

enum class InteractionKind { polynomial, exponential, charged_polynomial };
enum class Ordering { zero_temperature, thermal };

InteractionKind parse_interaction_kind(const std::string& text);
Ordering parse_ordering(const std::string& text);
std::string to_string(InteractionKind kind);
std::string to_string(Ordering ordering);

struct InteractionSpec {
  InteractionKind kind = InteractionKind::polynomial;
  /// Polynomial: a_j of :phi^j:. Charged: a_n of :(|psi|^2)^n:.
  std::vector<double> coefficients;
  /// Exponential coupling; |alpha| < sqrt(2 pi).
  double alpha = 1.0;
  /// Overall factor of the exponential kind (absorbs reordering constants).
  double amplitude = 1.0;
  Ordering ordering = Ordering::thermal;
  CutoffSpec cutoff;

  /// Checks bounded-below polynomials and the alpha range.
  void validate(const ModeGrid& grid) const;
  /// Polynomial kinds may have any coefficients (used for probes and L2 oracles).
  void validate_shape(const ModeGrid& grid) const;
};

/// f_{L,x}(k) = (4 pi)^{-1/2} e^{-ikx} chi^(k/L) eps(k)^{-1/2}, in real-mode coordinates.
TestVector cutoff_testfunction(const ModeGrid& grid, const CutoffSpec& spec, int lattice_index);

/// The smeared field phi_L(x) = sqrt(2) phi(f_{L,x}) at every lattice site,
/// with its Wick-ordering variances. The lattice index runs 0..2M for x_{-M}..x_{M}.
class CutoffField {
 public:
  CutoffField(const ModeGrid& grid, double beta, const CutoffSpec& spec);

  [[nodiscard]] const ModeGrid& grid() const { return grid_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] std::size_t sites() const { return sites_; }
  [[nodiscard]] std::size_t modes() const { return modes_; }
  /// Coordinates of f_{L,x} for one site.
  [[nodiscard]] std::span<const double> coordinates(std::size_t site) const;

  /// phi_L at every site from one time slice of real-mode samples.
  void fields(std::span<const double> modes, std::span<double> out) const;

  /// v_0 = (f, f) or v_beta = (f, (1+2 rho) f): the variance of phi_L(x).
  [[nodiscard]] double variance(Ordering ordering) const;
  /// r_L = (c_beta - c_0)(f, f) = (f, rho f).
  [[nodiscard]] double thermal_shift() const;
  /// (f_{L,x}, (1+2 rho) f_{L',y}) as a function of the separation
  /// (x - y) / dx mod (2M+1); the thermal field covariance E phi_L(x) phi_L'(y).
  [[nodiscard]] std::vector<double> covariance_table(const CutoffField& other) const;

 private:
  ModeGrid grid_;
  double beta_;
  double lambda_;
  ChiProfile chi_;
  std::size_t sites_;
  std::size_t modes_;
  std::vector<double> coords_;  // [site][mode]
  std::vector<double> amplitude_;  // (4 pi)^{-1/2} chi^(k/L) eps^{-1/2}, natural order
  std::vector<double> rho_;        // natural order
};

/// V as a function of one time slice of an ensemble.
class CutoffInteraction {
 public:
  CutoffInteraction(const ModeGrid& grid, double beta, InteractionSpec spec);

  [[nodiscard]] const InteractionSpec& spec() const { return spec_; }
  [[nodiscard]] const CutoffField& field() const { return field_; }
  /// Wick-ordering variance in use (v_0 or v_beta of the spec's ordering).
  [[nodiscard]] double ordering_variance() const { return field_.variance(spec_.ordering); }
  /// Number of real-mode values expected per time slice.
  [[nodiscard]] std::size_t slice_size() const;

  /// sum_x dx g(x) :P(phi_L(x)): for one time slice.
  [[nodiscard]] double operator()(std::span<const double> slice) const;

 private:
  [[nodiscard]] double density(double field_value) const;

  ModeGrid grid_;
  InteractionSpec spec_;
  CutoffField field_;
  double dx_;
};

/// Per-sample V at time index t.
std::vector<double> evaluate_V(const PathEnsemble& ensemble, int t, const CutoffInteraction& v,
                               std::size_t shards = 1);

/// Charged-kind ensembles carry two neutral copies: modes [0,d) and [d,2d).
DiagonalSystem charged_sampling_system(const ModeGrid& grid, double beta);

/// Mean and one-sigma error of an estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool exact = false;
};

/// w_{p,L}(k_1..k_p) = g^(sum k) prod chi^(k_i/L) eps(k_i)^{-1/2}.
class KernelWp {
 public:
  static constexpr int max_degree = 8;

  KernelWp(const ModeGrid& grid, double beta, const CutoffSpec& spec, int p);

  [[nodiscard]] int degree() const { return p_; }
  /// Momentum indices in natural order (0..2M for k_{-M}..k_M).
  [[nodiscard]] cplx operator()(std::span<const int> momentum_index) const;
  /// sum over tuples of dk^p |w|^2 prod (1+2 rho(k_i)); exact for p <= 3,
  /// Monte Carlo over uniform tuples above.
  [[nodiscard]] Estimate norm_sq(std::size_t mc_tuples = 200000, std::uint64_t seed = 7) const;

 private:
  ModeGrid grid_;
  int p_;
  std::vector<double> weight_;  // dk chi^2 (1+2 rho)/eps per momentum
  std::vector<double> factor_;  // chi^(k/L) eps^{-1/2}
  std::vector<double> g_;
};

/// <V, V'> in L2 of the thermal Gaussian measure, from degree-wise pairings
/// (both specs reordered to thermal ordering first). Both specs share the kind.
double exact_l2_inner(const ModeGrid& grid, double beta, const InteractionSpec& a,
                      const InteractionSpec& b);

/// ||V_a - V_b||_2 from exact_l2_inner.
double exact_l2_distance(const ModeGrid& grid, double beta, const InteractionSpec& a,
                         const InteractionSpec& b);

struct ConvergenceRow {
  double lambda_lo;
  double lambda_hi;
  double distance;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// -slope of log(distance) vs log(lambda_lo); NaN with fewer than two rows.
  double rate = std::numeric_limits<double>::quiet_NaN();
  [[nodiscard]] bool strictly_decreasing() const;
};

/// Distances between consecutive ladder entries.
ConvergenceTable convergence_study(const ModeGrid& grid, double beta, const InteractionSpec& spec,
                                   std::span<const double> ladder);

/// The same interaction with thermal ordering at the spec's cutoff.
InteractionSpec reorder_interaction(const ModeGrid& grid, double beta, const InteractionSpec& spec);

/// K_beta(x) = 1/2 sum_k dk cos(k|x|) (1+2 rho(k))/eps(k).
double kbeta_kernel(const ModeGrid& grid, double beta, double x);

struct ExpSeries {
  std::vector<double> terms;   // eps_n
  std::vector<double> ratios;  // eps_{n+1}/eps_n (NaN where eps_n = 0)
  double sum = 0.0;
};

/// eps_n = (1/n!) (alpha^2/2pi)^n sum_{x,y} dx^2 g(x) g(y) K_beta(x-y)^n, n = 0..n_max.
ExpSeries exp_series(const ModeGrid& grid, double beta, double alpha, std::span<const double> g,
                     int n_max);

struct LowerBoundRow {
  double lambda;
  double min_v;
  double log_power;  // ln(lambda)^n
};

struct LowerBoundProbe {
  std::vector<LowerBoundRow> rows;
  /// Smallest C with min_v >= -C ln(lambda)^n on every row.
  double fitted_c = 0.0;
};

/// Empirical minimum of V_{L,beta} over the ensemble's t=0 slice for each
/// lambda of the ladder, with n = degree/2.
LowerBoundProbe lower_bound_probe(const ModeGrid& grid, const PathEnsemble& ensemble,
                                  const InteractionSpec& spec, std::span<const double> ladder,
                                  std::size_t shards = 1);

}  // namespace thermal
