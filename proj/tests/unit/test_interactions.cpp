#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "thermal/interactions.hpp"
#include "thermal/quasifree.hpp"

using namespace thermal;
using doctest::Approx;

namespace {

const ModeGrid small_grid{0.5, 6, 1.0};

InteractionSpec polynomial_spec(const ModeGrid& grid, std::vector<double> coeffs, double lambda = 4.0,
                                Ordering ordering = Ordering::thermal) {
  InteractionSpec s;
  s.kind = InteractionKind::polynomial;
  s.coefficients = std::move(coeffs);
  s.ordering = ordering;
  s.cutoff.lambda = lambda;
  s.cutoff.g = spatial_cutoff(grid, "box:2");
  return s;
}

PathEnsemble field_samples(const ModeGrid& grid, double beta, std::size_t n, std::uint64_t seed) {
  SamplerOptions opt;
  opt.n_samples = n;
  opt.n_mats = 8192;
  opt.seed = seed;
  opt.shards = 4;
  return sample_paths(build_neutral(grid, beta), TimeGrid{beta, 4}, opt);
}

std::pair<double, double> mean_and_error(const std::vector<double>& v) {
  double s = 0, ss = 0;
  for (double x : v) {
    s += x;
    ss += x * x;
  }
  const double n = static_cast<double>(v.size());
  const double m = s / n;
  return {m, std::sqrt((ss / n - m * m) / (n - 1))};
}

// int (2/w) cos^2(pi x / w) e^{-ipx} dx by composite Simpson.
double bump_transform(double p, double w) {
  const int n = 4000;
  const double h = w / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -0.5 * w + i * h;
    const double c = std::cos(std::numbers::pi * x / w);
    const double f = (2.0 / w) * c * c * std::cos(p * x);
    s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("chi profiles") {
  const ChiProfile cos2(ChiProfile::Shape::cos2, 1.0);
  CHECK(std::abs(cos2(0.0) - 1.0) <= 1e-12);
  const double alpha = 2 * std::numbers::pi;
  for (double p : {0.3, 1.7, 0.5 * alpha, alpha - 1e-9, alpha, alpha + 1e-9, 9.0, 25.0, -4.0})
    CHECK(cos2(p) == Approx(bump_transform(p, 1.0)).epsilon(1e-8).scale(1.0));
  const ChiProfile wide = ChiProfile::parse("cos2:2.5");
  CHECK(wide.width() == 2.5);
  CHECK(wide(1.1) == Approx(bump_transform(1.1, 2.5)).epsilon(1e-8));
  const ChiProfile gauss = ChiProfile::parse("gaussian:0.5");
  CHECK(gauss(2.0) == Approx(std::exp(-0.5)));
  CHECK(ChiProfile::parse(gauss.describe()).width() == 0.5);
  CHECK_THROWS(ChiProfile::parse("box:1"));
  CHECK_THROWS(ChiProfile::parse("cos2:-1"));
  CHECK_THROWS(ChiProfile::parse("cos2:1x"));
}

TEST_CASE("spatial cutoff profiles") {
  const ModeGrid grid{0.5, 8, 1.0};
  const auto x = grid.positions();
  const auto box = spatial_cutoff(grid, "box:1.5");
  for (std::size_t j = 0; j < x.size(); ++j) CHECK(box[j] == (std::abs(x[j]) <= 1.5 ? 1.0 : 0.0));
  for (double v : spatial_cutoff(grid, "zero")) CHECK(v == 0.0);
  for (double v : spatial_cutoff(grid, "const:2")) CHECK(v == 2.0);
  for (double v : spatial_cutoff(grid, "cos2:3")) CHECK(v >= 0.0);
  CHECK_THROWS(spatial_cutoff(grid, "wave:1"));
  CutoffSpec spec;
  spec.g = spatial_cutoff(grid, "const:2");
  CHECK(spec.g_l1(grid) == Approx(2.0 * grid.box_length()));
  CHECK(spec.g_l2(grid) == Approx(std::sqrt(4.0 * grid.box_length())));
  spec.g[0] = -1.0;
  CHECK_THROWS(spec.validate(grid));
}

TEST_CASE("cutoff test functions") {
  const ModeGrid one{1.0, 0, 1.0};
  CutoffSpec spec;
  spec.g = spatial_cutoff(one, "const:1");
  const auto f = cutoff_testfunction(one, spec, 0);
  CHECK(f[0].real() == Approx(0.28209479177387814).epsilon(1e-14));

  const ModeGrid grid{0.5, 5, 1.0};
  spec.g = spatial_cutoff(grid, "box:1");
  const auto sys = build_neutral(grid, 1.0);
  const auto k = grid.momenta();
  const auto eps = dispersion(grid);
  for (int site = 0; site < grid.size(); ++site) {
    std::vector<cplx> values(k.size());
    const double x = grid.positions()[site];
    for (std::size_t j = 0; j < k.size(); ++j)
      values[j] = std::polar(spec.chi(k[j] / spec.lambda) / std::sqrt(4 * std::numbers::pi * eps[j]), -k[j] * x);
    for (const auto& c : to_real_modes(grid, values)) CHECK(std::abs(c.imag()) <= 1e-14);
  }

  // gaussian chi has monotone tails: f_L approaches f_inf mode by mode
  CutoffSpec g1 = spec, g2 = spec, ginf = spec;
  g1.chi = g2.chi = ChiProfile(ChiProfile::Shape::gaussian, 1.0);
  g1.lambda = 2;
  g2.lambda = 5;
  ginf.lambda = std::numeric_limits<double>::infinity();
  const auto a = cutoff_testfunction(grid, g1, 3), b = cutoff_testfunction(grid, g2, 3),
             c = cutoff_testfunction(grid, ginf, 3);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(b[j] - c[j]) <= std::abs(a[j] - c[j]) + 1e-15);
}

TEST_CASE("kernel norms") {
  CutoffSpec spec;
  spec.lambda = 3.0;
  spec.g = spatial_cutoff(small_grid, "box:2");
  const double beta = 1.3;
  const KernelWp w1(small_grid, beta, spec, 1);
  const auto k = small_grid.momenta();
  const auto eps = dispersion(small_grid);
  double direct = 0.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    const double chi = spec.chi(k[j] / spec.lambda);
    direct += small_grid.delta_k * std::norm(lattice_fourier(small_grid, spec.g, k[j])) * chi * chi *
              (1 + 2 * oracle::bose(beta * eps[j])) / eps[j];
  }
  const auto n1 = w1.norm_sq();
  CHECK(n1.exact);
  CHECK(n1.value == Approx(direct).epsilon(1e-12));

  // Lambda ladder: norms grow with the gaussian profile
  spec.chi = ChiProfile(ChiProfile::Shape::gaussian, 1.0);
  double prev = 0.0;
  for (double lambda : {1.0, 2.0, 4.0, 8.0}) {
    spec.lambda = lambda;
    const double n = KernelWp(small_grid, beta, spec, 2).norm_sq().value;
    CHECK(n > prev);
    prev = n;
  }

  spec.g = spatial_cutoff(small_grid, "zero");
  const std::vector<int> tuple{1, 4, 7};
  CHECK(std::abs(KernelWp(small_grid, beta, spec, 3)(tuple)) == 0.0);
  CHECK_THROWS(KernelWp(small_grid, beta, spec, 9));
}

TEST_CASE("exact L2 pairings") {
  const double beta = 1.0;
  const auto c = polynomial_spec(small_grid, {1.7});
  CHECK(exact_l2_inner(small_grid, beta, c, c) ==
        Approx(1.7 * 1.7 * std::pow(c.cutoff.g_l1(small_grid), 2)).epsilon(1e-12));

  // degree-p monomial: p!/(4 pi)^p ||w_p||^2
  for (int p = 1; p <= 3; ++p) {
    std::vector<double> coeffs(p + 1, 0.0);
    coeffs[p] = 1.0;
    const auto s = polynomial_spec(small_grid, coeffs, 3.0);
    const double w = KernelWp(small_grid, beta, s.cutoff, p).norm_sq().value;
    CHECK(exact_l2_inner(small_grid, beta, s, s) ==
          Approx(factorial(p) / std::pow(4 * std::numbers::pi, p) * w).epsilon(1e-10));
  }

  const auto a = polynomial_spec(small_grid, {0.2, 0.0, -0.5, 0.0, 0.3}, 2.0);
  const auto b = polynomial_spec(small_grid, {0.0, 0.4, 1.0, 0.0, 0.3}, 6.0);
  CHECK(exact_l2_inner(small_grid, beta, a, b) == Approx(exact_l2_inner(small_grid, beta, b, a)).epsilon(1e-13));
  const double aa = exact_l2_inner(small_grid, beta, a, a), bb = exact_l2_inner(small_grid, beta, b, b),
               ab = exact_l2_inner(small_grid, beta, a, b);
  CHECK(0.5 * (aa + bb) - std::sqrt(0.25 * (aa - bb) * (aa - bb) + ab * ab) >= -1e-10);

  const auto e = field_samples(small_grid, beta, 40000, 101);
  const CutoffInteraction va(small_grid, beta, a);
  std::vector<double> sq;
  for (double v : evaluate_V(e, 0, va, 4)) sq.push_back(v * v);
  const auto [m, err] = mean_and_error(sq);
  CHECK(std::abs(m - aa) < 5 * err);
}

TEST_CASE("evaluate V") {
  const double beta = 1.0;
  const auto e = field_samples(small_grid, beta, 20000, 7);
  const auto [m, err] = mean_and_error(evaluate_V(e, 1, CutoffInteraction(small_grid, beta, polynomial_spec(small_grid, {0, 1.0})), 2));
  CHECK(std::abs(m) < 5 * err);

  auto zero = polynomial_spec(small_grid, {0.3, 0, 0, 0, 1});
  zero.cutoff.g = spatial_cutoff(small_grid, "zero");
  for (double v : evaluate_V(e, 0, CutoffInteraction(small_grid, beta, zero))) CHECK(v == 0.0);

  InteractionSpec flat;
  flat.kind = InteractionKind::exponential;
  flat.alpha = 0.0;
  flat.cutoff.g = spatial_cutoff(small_grid, "box:2");
  const double l1 = flat.cutoff.g_l1(small_grid);
  for (double v : evaluate_V(e, 2, CutoffInteraction(small_grid, beta, flat))) CHECK(v == Approx(l1).epsilon(1e-15));

  InteractionSpec expo = flat;
  expo.alpha = 1.5;
  for (double v : evaluate_V(e, 0, CutoffInteraction(small_grid, beta, expo))) CHECK(v >= 0.0);

  // different-degree Wick monomials are uncorrelated
  const auto v2 = evaluate_V(e, 0, CutoffInteraction(small_grid, beta, polynomial_spec(small_grid, {0, 0, 1})));
  const auto v4 = evaluate_V(e, 0, CutoffInteraction(small_grid, beta, polynomial_spec(small_grid, {0, 0, 0, 0, 1})));
  std::vector<double> prod;
  for (std::size_t i = 0; i < v2.size(); ++i) prod.push_back(v2[i] * v4[i]);
  const auto [mp, ep] = mean_and_error(prod);
  CHECK(std::abs(mp) < 5 * ep);

  const auto wrong = field_samples(ModeGrid{0.5, 2, 1.0}, beta, 4, 1);
  CHECK_THROWS(evaluate_V(wrong, 0, CutoffInteraction(small_grid, beta, polynomial_spec(small_grid, {0, 1.0}))));
}

TEST_CASE("reordering to thermal Wick order") {
  const double beta = 1.0;
  const auto zero_t = polynomial_spec(small_grid, {0.0, 0.0, 1.0}, 4.0, Ordering::zero_temperature);
  const auto thermal = reorder_interaction(small_grid, beta, zero_t);
  const CutoffField field(small_grid, beta, zero_t.cutoff);
  CHECK(thermal.ordering == Ordering::thermal);
  CHECK(thermal.coefficients[2] == 1.0);
  CHECK(thermal.coefficients[0] == Approx(2.0 * field.thermal_shift()).epsilon(1e-13));
  CHECK(field.variance(Ordering::thermal) - field.variance(Ordering::zero_temperature) ==
        Approx(2.0 * field.thermal_shift()).epsilon(1e-12));

  const auto quartic = polynomial_spec(small_grid, {0.1, 0.0, -0.4, 0.0, 0.5}, 4.0, Ordering::zero_temperature);
  const auto moved = reorder_interaction(small_grid, beta, quartic);
  const auto e = field_samples(small_grid, beta, 200, 9);
  const auto lhs = evaluate_V(e, 0, CutoffInteraction(small_grid, beta, quartic));
  const auto rhs = evaluate_V(e, 0, CutoffInteraction(small_grid, beta, moved));
  for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-10 * std::max(1.0, std::abs(lhs[i])));

  // r_L converges to r_inf once the occupied modes sit well inside the cutoff
  const ModeGrid fine{0.5, 16, 1.0};
  auto spec = polynomial_spec(fine, {0, 0, 1}, 8.0);
  const double r8 = CutoffField(fine, 10.0, spec.cutoff).thermal_shift();
  spec.cutoff.lambda = std::numeric_limits<double>::infinity();
  const double r_inf = CutoffField(fine, 10.0, spec.cutoff).thermal_shift();
  CHECK(std::abs(r8 - r_inf) < 1e-8);
}

TEST_CASE("convergence study") {
  const double beta = 1.0;
  const auto spec = polynomial_spec(small_grid, {0, 0, 0, 0, 1.0});
  const std::vector<double> single{4.0};
  CHECK(convergence_study(small_grid, beta, spec, single).rows.empty());
  const std::vector<double> ladder{1, 2, 4, 8};
  const auto table = convergence_study(small_grid, beta, spec, ladder);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.strictly_decreasing());
  CHECK(table.rate > 0.0);

  auto zero_t = spec;
  zero_t.ordering = Ordering::zero_temperature;
  zero_t.coefficients = {0.3, 0, -1.0, 0, 1.0};
  const auto direct = convergence_study(small_grid, beta, zero_t, ladder);
  // reorder at each cutoff first, then pair
  for (std::size_t i = 0; i < direct.rows.size(); ++i) {
    auto lo = zero_t, hi = zero_t;
    lo.cutoff.lambda = ladder[i];
    hi.cutoff.lambda = ladder[i + 1];
    const double d = exact_l2_distance(small_grid, beta, reorder_interaction(small_grid, beta, lo),
                                       reorder_interaction(small_grid, beta, hi));
    CHECK(std::abs(d - direct.rows[i].distance) <= 1e-10);
  }
}

TEST_CASE("thermal kernel and exponential series") {
  const ModeGrid grid{0.5, 10, 1.0};
  for (double x : {0.1, 0.7, 2.3}) CHECK(kbeta_kernel(grid, 1.0, x) == kbeta_kernel(grid, 1.0, -x));
  const auto g = spatial_cutoff(grid, "box:2");
  const auto zero = exp_series(grid, 1.0, 0.0, g, 5);
  CutoffSpec spec;
  spec.g = g;
  CHECK(zero.terms[0] == Approx(std::pow(spec.g_l1(grid), 2)).epsilon(1e-14));
  for (std::size_t n = 1; n < zero.terms.size(); ++n) CHECK(zero.terms[n] == 0.0);
  const auto one = exp_series(grid, 1.0, 1.0, g, 30);
  for (double t : one.terms) CHECK(t >= 0.0);
  CHECK(std::isfinite(one.sum));
  CHECK(one.ratios.back() < one.ratios[2]);
}

TEST_CASE("lower bound probe") {
  const double beta = 1.0;
  const auto e = field_samples(small_grid, beta, 2000, 17);
  auto quad = polynomial_spec(small_grid, {0, 0, 1.0});
  const std::vector<double> ladder{2, 4, 8};
  const auto probe = lower_bound_probe(small_grid, e, quad, ladder);
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    auto s = quad;
    s.cutoff.lambda = ladder[i];
    const CutoffField field(small_grid, beta, s.cutoff);
    CHECK(probe.rows[i].min_v >= -s.cutoff.g_l1(small_grid) * field.variance(Ordering::thermal) - 1e-12);
    CHECK(probe.rows[i].min_v >= -probe.fitted_c * probe.rows[i].log_power - 1e-12);
  }
  quad.cutoff.g = spatial_cutoff(small_grid, "zero");
  for (const auto& row : lower_bound_probe(small_grid, e, quad, ladder).rows) CHECK(row.min_v == 0.0);
}

TEST_CASE("charged interaction is gauge invariant") {
  const double beta = 1.0;
  SamplerOptions opt;
  opt.n_samples = 300;
  opt.seed = 4;
  const auto e = sample_paths(charged_sampling_system(small_grid, beta), TimeGrid{beta, 4}, opt);
  InteractionSpec spec;
  spec.kind = InteractionKind::charged_polynomial;
  spec.coefficients = {0.0, -0.5, 1.0};
  spec.cutoff.g = spatial_cutoff(small_grid, "box:2");
  const CutoffInteraction v(small_grid, beta, spec);
  const std::size_t d = static_cast<std::size_t>(small_grid.size());
  PathEnsemble turned = e, rotated = e;
  const double angle = 0.731;
  for (std::size_t n = 0; n < e.n_samples(); ++n)
    for (int t = 0; t < e.n_t(); ++t)
      for (std::size_t j = 0; j < d; ++j) {
        const double p1 = e(n, t, j), p2 = e(n, t, d + j);
        turned(n, t, j) = -p2;
        turned(n, t, d + j) = p1;
        rotated(n, t, j) = std::cos(angle) * p1 - std::sin(angle) * p2;
        rotated(n, t, d + j) = std::sin(angle) * p1 + std::cos(angle) * p2;
      }
  const auto base = evaluate_V(e, 1, v);
  const auto quarter = evaluate_V(turned, 1, v);
  const auto generic = evaluate_V(rotated, 1, v);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i] == quarter[i]);
    CHECK(std::abs(base[i] - generic[i]) <= 1e-12 * std::max(1.0, std::abs(base[i])));
  }
}
