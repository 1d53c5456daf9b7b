#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"
#include "thermal/fkn.hpp"
#include "thermal/interactions.hpp"
#include "thermal/pathspace.hpp"
#include "thermal/quasifree.hpp"
#include "thermal/standard_form.hpp"
#include "thermal/wick.hpp"

namespace thermal::cli {

using json = nlohmann::ordered_json;

void Report::check(const std::string& name, double value, const std::string& relation, double tolerance) {
  bool pass = false;
  if (relation == "<=") pass = value <= tolerance;
  else if (relation == ">=") pass = value >= tolerance;
  else if (relation == "<") pass = value < tolerance;
  else if (relation == ">") pass = value > tolerance;
  else throw std::logic_error("Report::check: bad relation " + relation);
  assertions_.push_back({name, value, tolerance, relation, pass});
}

void Report::table(const std::string& file, const std::string& version, std::vector<std::string> columns,
                   std::vector<std::vector<double>> rows) {
  tables_.push_back({file, version, std::move(columns), std::move(rows)});
}

bool Report::pass() const {
  return std::all_of(assertions_.begin(), assertions_.end(), [](const Assertion& a) { return a.pass; });
}

namespace {

TestVector unit_random(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> c(d);
  for (auto& v : c) v = {g(rng), g(rng)};
  TestVector x(c);
  return (1.0 / std::sqrt(inner(x, x).real())) * x;
}

TestVector real_random(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> c(d);
  for (auto& v : c) v = g(rng);
  return TestVector::real(c);
}

json estimate(double value, double error) { return {{"value", value}, {"error", error}}; }

// ---------------------------------------------------------------- greens

void greens(RunConfig& c, Report& r) {
  const auto sys = build_neutral(c.mode_grid(), c.thermal.beta);
  const auto times = parse_doubles(c.word.times);
  const auto modes = parse_ints(c.word.modes);
  std::vector<WeylFactor> factors;
  for (std::size_t i = 0; i < times.size(); ++i)
    factors.push_back({cplx(times[i], 0.0),
                       TestVector::unit(sys.size(), static_cast<std::size_t>(modes[i]), c.word.amplitude)});
  const cplx value = greens_weyl(sys, WeylWord::with_times(factors));
  r.results["value"] = {{"re", value.real()}, {"im", value.imag()}, {"tolerance", c.tolerances.closed_form}};
  r.check("|G| - 1", std::abs(value) - 1.0, "<=", c.tolerances.closed_form);
  if (factors.size() == 1) {
    const double weyl = weyl_expectation(sys, factors[0].arg);
    r.results["weyl_expectation"] = weyl;
    r.check("|G - weyl_expectation|", std::abs(value - weyl), "<=", c.tolerances.closed_form);
  }
}

// ---------------------------------------------------------------- kms-check

void kms_check(RunConfig& c, Report& r) {
  const auto sys = build_neutral(c.mode_grid(), c.thermal.beta);
  std::mt19937_64 rng(static_cast<std::uint64_t>(c.sampler.seed));
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::vector<double>> rows;
  double worst = 0.0, control = 1e300, reversal = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const auto x = unit_random(sys.size(), rng), y = unit_random(sys.size(), rng);
    const double t = u(rng);
    const double res = kms_residual(sys, x, y, t);
    const double target = std::abs(greens_weyl(sys, WeylWord::with_times({{cplx(t, 0.0), y}, {0.0, x}})));
    const double ctl = kms_residual(sys, x, y, t, 0.5 * sys.beta()) / target;
    const double rev = time_reversal_check(sys, real_random(sys.size(), rng), real_random(sys.size(), rng), t);
    worst = std::max(worst, res);
    control = std::min(control, ctl);
    reversal = std::max(reversal, rev);
    rows.push_back({double(pair), t, res, ctl, rev});
  }
  r.table("kms.csv", "v1", {"pair", "t", "residual", "wrong_beta_relative", "time_reversal"}, rows);
  r.results["max_residual"] = worst;
  r.results["min_wrong_beta_relative"] = control;
  r.check("max KMS residual", worst, "<=", c.tolerances.closed_form);
  r.check("max time-reversal residual", reversal, "<=", c.tolerances.closed_form);
  r.check("wrong-beta control (relative)", control, ">", 1e-2);
}

// ---------------------------------------------------------------- sample-paths

void sample_paths_cmd(RunConfig& c, Report& r, const std::filesystem::path& dir) {
  const auto sys = build_neutral(c.mode_grid(), c.thermal.beta);
  const auto grid = c.time_grid_value();
  const auto e = sample_paths(sys, grid, c.sampler_options());
  if (c.wants("tfpe")) {
    save_ensemble(e, dir / "paths.tfpe");
    r.results["ensemble"] = "paths.tfpe";
  }
  const int n_t = grid.n_t, max_lag = n_t / 2;
  const double n = static_cast<double>(e.n_samples());
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (std::size_t j = 0; j < e.modes(); ++j)
    for (int l = 0; l <= max_lag; ++l) {
      double s = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < e.n_samples(); ++i) {
        double acc = 0.0;
        for (int t = 0; t < n_t; ++t) acc += e(i, t, j) * e(i, (t + l) % n_t, j);
        acc /= n_t;
        s += acc;
        ss += acc * acc;
      }
      const double mean = s / n, err = std::sqrt(std::max(0.0, ss / n - mean * mean) / n);
      const double exact = 0.5 * periodic_cov(l * grid.step(), sys.frequency(j), sys.beta());
      const double z = std::abs(mean - exact) / err;
      worst = std::max(worst, z);
      rows.push_back({double(j), double(l), l * grid.step(), mean, err, exact, z});
    }
  r.table("covariance.csv", "v1", {"mode", "lag", "s", "estimate", "error", "exact", "z"}, rows);
  r.results["n_samples"] = e.n_samples();
  r.results["matsubara_truncation_error"] = matsubara_truncation_error(sys, grid, c.sampler.n_mats);
  r.check("max covariance deviation (sigma)", worst, "<=", c.tolerances.stat_sigma);
}

// ---------------------------------------------------------------- os-check

void os_check(RunConfig& c, Report& r) {
  const auto sys = build_neutral(c.mode_grid(), c.thermal.beta);
  const double beta = sys.beta();
  std::mt19937_64 rng(static_cast<std::uint64_t>(c.sampler.seed));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows;
  double os_min = 1e300, gram_min = 1e300;
  for (int f = 0; f < 20; ++f) {
    std::vector<ExpFunctional> family(4);
    for (auto& fn : family)
      for (int k = 0; k < 2; ++k) fn.push_back({0.5 * beta * u(rng), real_random(sys.size(), rng), g(rng)});
    const double os = os_positivity_check(sys, family);
    std::vector<double> times(6);
    std::vector<TestVector> args;
    for (auto& t : times) t = beta * u(rng);
    for (int i = 0; i < 6; ++i) args.push_back(real_random(sys.size(), rng));
    const double gram = gram_positivity_check(sys, times, args);
    os_min = std::min(os_min, os);
    gram_min = std::min(gram_min, gram);
    rows.push_back({double(f), os, gram});
  }
  r.table("os.csv", "v1", {"family", "os_min_eigenvalue", "gram_min_eigenvalue"}, rows);
  r.check("OS Gram min eigenvalue", os_min, ">=", -c.tolerances.closed_form);
  r.check("covariance Gram min eigenvalue", gram_min, ">=", -c.tolerances.closed_form);
}

// ---------------------------------------------------------------- markov-check

void markov_check(RunConfig& c, Report& r) {
  const auto sys = build_neutral(c.mode_grid(), c.thermal.beta);
  const auto grid = c.time_grid_value();
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (int i = 1; i < grid.n_t / 2; ++i)
    for (int k = 1; k < grid.n_t / 2; ++k) {
      const double s = grid.time(i), sp = -grid.time(k);
      const double res = markov_residual(sys, s, sp);
      worst = std::max(worst, res);
      rows.push_back({s, sp, res});
    }
  const double a = sys.frequency(0), beta = sys.beta();
  const auto squared = [a, beta](double s) {
    const double v = periodic_cov(s, a, beta);
    return 0.25 * v * v;
  };
  const double control = markov_residual(squared, beta, 0.25 * beta, -0.25 * beta);
  r.table("markov.csv", "v1", {"s", "s_prime", "residual"}, rows);
  r.results["non_markov_control"] = control;
  r.check("max Markov residual", worst, "<=", c.tolerances.closed_form);
  r.check("non-Markov control residual", control, ">=", 1e-3);
}

// ---------------------------------------------------------------- wick-check

void wick_check(RunConfig& c, Report& r) {
  double mismatches = 0;
  for (double y : {-1.5, 0.0, 0.5, 2.25})
    for (double v : {0.25, 1.0, 3.0}) {
      mismatches += wick_power(y, 2, v) != y * y - v;
      mismatches += wick_power(y, 3, v) != y * y * y - 3 * v * y;
      mismatches += wick_power(y, 4, v) != y * y * y * y - 6 * v * y * y + 3 * v * v;
    }
  std::mt19937_64 rng(static_cast<std::uint64_t>(c.sampler.seed));
  std::normal_distribution<double> g;
  double roundtrip = 0.0;
  for (int i = 0; i < 50; ++i) {
    WickPolynomial p{{}, 0.5 + std::abs(g(rng))};
    for (int j = 0; j <= 6; ++j) p.coeffs.push_back(g(rng));
    const auto back = reorder(reorder(p, 0.1 + std::abs(g(rng))), p.ordering);
    for (std::size_t j = 0; j < p.coeffs.size(); ++j)
      roundtrip = std::max(roundtrip, std::abs(back.coeffs[j] - p.coeffs[j]));
  }
  const auto sys = DiagonalSystem::from_frequencies({c.grid.mass}, c.thermal.beta);
  const auto e = sample_paths(sys, c.time_grid_value(), c.sampler_options());
  const double v = 0.5 * periodic_cov(0.0, c.grid.mass, c.thermal.beta);
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (int n = 1; n <= 6; ++n) {
    double s = 0, ss = 0;
    for (std::size_t i = 0; i < e.n_samples(); ++i) {
      const double w = wick_power(e(i, 0, 0), n, v);
      s += w;
      ss += w * w;
    }
    const double m = s / e.n_samples();
    const double err = std::sqrt((ss / e.n_samples() - m * m) / e.n_samples());
    worst = std::max(worst, std::abs(m) / err);
    rows.push_back({double(n), m, err});
  }
  r.table("wick.csv", "v1", {"n", "mean", "error"}, rows);
  r.check("expansion mismatches (n=2,3,4)", mismatches, "<=", 0.0);
  r.check("reorder roundtrip", roundtrip, "<=", 1e-12);
  r.check("max |E :phi^n:| (sigma)", worst, "<=", c.tolerances.stat_sigma);
}

// ---------------------------------------------------------------- interaction-converge

void interaction_converge(RunConfig& c, Report& r) {
  const auto grid = c.mode_grid();
  const auto spec = c.interaction_spec();
  const auto ladder = c.ladder();
  const auto table = convergence_study(grid, c.thermal.beta, spec, ladder);
  std::vector<std::vector<double>> rows;
  for (const auto& row : table.rows) rows.push_back({row.lambda_lo, row.lambda_hi, row.distance});
  r.table("convergence.csv", "v1", {"lambda_lo", "lambda_hi", "distance"}, rows);
  r.results["rate"] = table.rate;
  r.results["kind"] = to_string(spec.kind);
  r.check("strictly decreasing distances", table.strictly_decreasing() ? 1.0 : 0.0, ">=", 1.0);
  r.check("fitted rate", table.rate, ">", 0.0);
}

// ---------------------------------------------------------------- exp-series

void exp_series_cmd(RunConfig& c, Report& r) {
  const auto grid = c.mode_grid();
  const double beta = c.thermal.beta;
  const auto g = spatial_cutoff(grid, c.cutoff.g_profile);
  const auto series = exp_series(grid, beta, c.interaction.alpha, g, 30);
  std::vector<std::vector<double>> rows;
  double min_term = 1e300, rise = 0.0;
  for (std::size_t n = 0; n < series.terms.size(); ++n) {
    min_term = std::min(min_term, series.terms[n]);
    rows.push_back({double(n), series.terms[n], n < series.ratios.size() ? series.ratios[n] : NAN});
  }
  for (std::size_t n = 3; n + 1 < series.ratios.size(); ++n)
    if (std::isfinite(series.ratios[n]) && std::isfinite(series.ratios[n + 1]))
      rise = std::max(rise, series.ratios[n + 1] - series.ratios[n]);
  r.table("exp_series.csv", "v1", {"n", "term", "ratio"}, rows);

  std::vector<std::vector<double>> krows;
  std::vector<double> sups;
  const int base = std::max(grid.half_count, 8);
  for (int level = 0; level < 4; ++level) {
    const ModeGrid fine{grid.delta_k, base << level, grid.mass};
    double sup = 0.0;
    for (double x : fine.positions())
      if (x > 0.0 && x <= 1.0) {
        const double v = kbeta_kernel(fine, beta, x) + std::log(x);
        sup = std::max(sup, std::abs(v));
        krows.push_back({double(level), double(fine.half_count), x, v});
      }
    sups.push_back(sup);
  }
  r.table("kbeta.csv", "v1", {"level", "half_count", "x", "k_beta_plus_log"}, krows);
  const auto zero = exp_series(grid, beta, 0.0, g, 2);
  CutoffSpec spec;
  spec.g = g;
  const double l1 = spec.g_l1(grid);
  r.results["sum"] = series.sum;
  r.results["k_beta_sups"] = sups;
  r.check("min eps_n", min_term, ">=", 0.0);
  r.check("finite sum", std::isfinite(series.sum) ? 1.0 : 0.0, ">=", 1.0);
  r.check("ratio increase beyond n=3", rise, "<=", 0.0);
  r.check("sup spread of K_beta + ln|x|", *std::max_element(sups.begin(), sups.end()) -
                                              *std::min_element(sups.begin(), sups.end()),
          "<=", 0.5);
  r.check("|eps_0(alpha=0) - |g|_1^2|", std::abs(zero.terms[0] - l1 * l1), "<=", 0.0);
}

// ---------------------------------------------------------------- fkn-perturb / lp-bound

struct Perturbation {
  PathEnsemble ensemble;
  PotentialTable table;
};

Perturbation perturbed_ensemble(RunConfig& c) {
  const auto grid = c.mode_grid();
  const auto spec = c.interaction_spec();
  const DiagonalSystem sys = spec.kind == InteractionKind::charged_polynomial
                                 ? charged_sampling_system(grid, c.thermal.beta)
                                 : build_neutral(grid, c.thermal.beta);
  auto e = sample_paths(sys, c.time_grid_value(), c.sampler_options());
  const CutoffInteraction v(grid, c.thermal.beta, spec);
  auto table = PotentialTable::evaluate(e, [&v](std::span<const double> s) { return v(s); },
                                        static_cast<std::size_t>(c.sampler.shards));
  return {std::move(e), std::move(table)};
}

void fkn_perturb(RunConfig& c, Report& r) {
  const auto grid = c.mode_grid();
  auto p = perturbed_ensemble(c);
  const auto w = perturb_measure(p.table);
  const CutoffField field(grid, c.thermal.beta, c.interaction_spec().cutoff);
  const std::size_t site = c.observable.site < 0 ? static_cast<std::size_t>(grid.half_count)
                                                 : static_cast<std::size_t>(c.observable.site);
  const auto coords = field.coordinates(site);
  const auto phi = [coords](std::span<const double> s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < coords.size(); ++j) acc += coords[j] * s[j];
    return std::numbers::sqrt2 * acc;
  };
  const std::vector<SliceObservable> obs{{0, phi}, {c.observable.s_index, phi}};
  const auto free = perturbed_greens(p.ensemble, uniform_weights(p.ensemble.n_samples()), obs);
  const auto pert = perturbed_greens(p.ensemble, w, obs);
  r.results["observable"] = "phi_L(0,x) phi_L(s,x), x=" + std::to_string(grid.positions()[site]) +
                            ", s=" + std::to_string(c.time_grid_value().time(c.observable.s_index));
  r.results["free_value"] = free.value;
  r.results["free_error"] = free.error;
  r.results["perturbed_value"] = pert.value;
  r.results["error"] = pert.error;
  r.results["ess"] = w.ess;
  r.results["log_z"] = w.log_z;
  r.check("effective sample size", w.ess, ">=", 50.0);
}

void lp_bound(RunConfig& c, Report& r) {
  auto p = perturbed_ensemble(c);
  std::vector<std::vector<double>> rows;
  for (double q : {1.0, 2.0}) {
    const auto b = lp_bound_check(p.table, q, 0, c.time_grid.n_t / 2);
    rows.push_back({q, b.lhs, b.lhs_error, b.rhs, b.rhs_error});
    r.check("L^" + std::to_string(int(q)) + " lhs - rhs", b.lhs - b.rhs, "<=", 3.0 * b.difference_error);
  }
  r.table("lp_bound.csv", "v1", {"p", "lhs", "lhs_error", "rhs", "rhs_error"}, rows);
}

// ---------------------------------------------------------------- standard-form-verify

void standard_form_verify(RunConfig& c, Report& r) {
  const auto charges = parse_ints(c.standard_form.charges);
  std::mt19937_64 rng(static_cast<std::uint64_t>(c.standard_form.seed));
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows;
  double closed = 0.0, kms = 0.0, sine = 0.0, dim_gap = 0.0;
  for (int i = 0; i < c.standard_form.systems; ++i) {
    const auto sys = random_kms_system(c.standard_form.dim, c.thermal.beta,
                                       static_cast<std::uint64_t>(c.standard_form.seed) + i, charges);
    const auto form = gns_build(sys);
    const auto gns = gns_verify(form);
    Eigen::VectorXd v(sys.dim());
    for (auto& x : v) x = g(rng);
    const auto lv = liouvillean_verify(form, v);
    const auto gauge = gauge_sector_check(form);
    const double gns_max = std::max({gns.l_omega, gns.j_squared, gns.jlj, gns.j_omega, gns.state_vs_trace});
    const double lv_max = std::max({lv.l_v_omega_v, lv.l_v_formula, lv.dynamics, lv.modular_conjugation, lv.gibbs,
                                    lv.state});
    closed = std::max({closed, gns_max, lv_max, gauge.q_omega});
    kms = std::max(kms, lv.kms);
    sine = std::max(sine, gauge.max_sine);
    dim_gap = std::max(dim_gap, std::abs(double(gauge.kernel_dim - gauge.span_dim)));
    rows.push_back({double(i), gns_max, lv.l_v_omega_v, lv.gibbs, lv.kms, lv.modular_conjugation,
                    double(gauge.kernel_dim), double(gauge.span_dim), gauge.max_sine});
  }
  r.table("standard_form.csv", "v1",
          {"system", "gns_max", "l_v_omega_v", "gibbs", "kms", "j_v_minus_j", "ker_q_dim", "span_dim", "max_sine"},
          rows);
  r.check("max closed-form residual", closed, "<=", c.tolerances.closed_form);
  r.check("max perturbed KMS residual", kms, "<=", c.tolerances.kms);
  r.check("max principal-angle sine", sine, "<=", c.tolerances.closed_form);
  r.check("|dim Ker Q - dim span|", dim_gap, "<=", 0.0);
}

// ---------------------------------------------------------------- feynman-kac

void feynman_kac(RunConfig& c, Report& r) {
  OscillatorSpec spec;
  spec.frequency = c.grid.mass;
  spec.beta = c.thermal.beta;
  spec.potential = parse_doubles(c.interaction.coefficients);
  const double budget = 1e-6;
  const auto rep = feynman_kac_crosscheck(spec, c.time_grid.n_t, c.observable.s_index, c.sampler_options(),
                                          c.tolerances.stat_sigma, budget);
  r.results["operator_value"] = estimate(rep.operator_value, rep.truncation_error);
  r.results["path_value"] = estimate(rep.path_value, rep.path_error);
  r.results["ess"] = rep.ess;
  r.results["free_closed_form"] = rep.free_closed_form;
  r.check("operator truncation error", rep.truncation_error, "<=", budget);
  r.check("|path - operator|", std::abs(rep.path_value - rep.operator_value), "<=",
          c.tolerances.stat_sigma * rep.path_error + budget);
}

// ---------------------------------------------------------------- charged-witness

void charged_witness(RunConfig& c, Report& r) {
  const auto grid = c.mode_grid();
  const auto sys = build_charged(grid, c.thermal.beta, c.thermal.mu);
  const std::size_t n = sys.block_size();
  std::vector<cplx> u(n), v(n);
  for (std::size_t j = 0; j < n; ++j) {
    u[j] = 1.0 / (1.0 + j);
    v[j] = std::polar(1.0 / (1.0 + j), 0.7 * static_cast<double>(j));
  }
  const cplx w = charged_nonpositivity_witness(sys, TestVector(u), TestVector(v), c.witness.s);
  r.results["witness"] = {{"re", w.real()}, {"im", w.imag()}};
  r.results["mu"] = c.thermal.mu;
  if (c.thermal.mu == 0.0)
    r.check("|Im witness| at mu = 0", std::abs(w.imag()), "<=", 1e-12);
  else
    r.check("|Im witness| at mu != 0", std::abs(w.imag()), ">", 1e-6);
}

// ---------------------------------------------------------------- output

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("write failed for " + file.string());
}

std::string csv_text(const std::string& command, const Report::Table& t) {
  std::string s = "# thermal " + command + " " + t.file + " " + t.version + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  char buf[40];
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      s += (i ? "," : "") + std::string(buf);
    }
    s += "\n";
  }
  return s;
}

json summary(const std::string& command, RunConfig& config, const Report* report, const std::string& status,
             int code, const std::string& message) {
  json j;
  j["command"] = command;
  j["version"] = "thermal 0.1.0";
  j["status"] = status;
  j["exit_code"] = code;
  if (!message.empty()) j["message"] = message;
  j["config"] = config.dump();
  json asserts = json::array();
  if (report)
    for (const auto& a : report->assertions())
      asserts.push_back({{"name", a.name}, {"value", a.value}, {"relation", a.relation},
                         {"tolerance", a.tolerance}, {"pass", a.pass}});
  j["assertions"] = asserts;
  j["results"] = report ? report->results : json::object();
  json files = json::array();
  if (report && config.wants("csv"))
    for (const auto& t : report->tables()) files.push_back(t.file);
  j["tables"] = files;
  return j;
}

}  // namespace

Report run_command(const std::string& command, RunConfig& config, const std::filesystem::path& dir) {
  Report r;
  if (command == "greens") greens(config, r);
  else if (command == "kms-check") kms_check(config, r);
  else if (command == "sample-paths") sample_paths_cmd(config, r, dir);
  else if (command == "os-check") os_check(config, r);
  else if (command == "markov-check") markov_check(config, r);
  else if (command == "wick-check") wick_check(config, r);
  else if (command == "interaction-converge") interaction_converge(config, r);
  else if (command == "exp-series") exp_series_cmd(config, r);
  else if (command == "fkn-perturb") fkn_perturb(config, r);
  else if (command == "lp-bound") lp_bound(config, r);
  else if (command == "standard-form-verify") standard_form_verify(config, r);
  else if (command == "feynman-kac") feynman_kac(config, r);
  else if (command == "charged-witness") charged_witness(config, r);
  else throw ConfigError("unknown command '" + command + "'");
  return r;
}

int run_main(const std::vector<std::string>& args) {
  RunConfig config;
  CLI::App app{"thermal: finite-temperature field diagnostics"};
  std::string command;
  std::string config_file;
  app.add_option("command", command, "command to run")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_file, "config file with 'section.key = value' lines");
  std::map<std::string, std::string> flags;
  std::vector<std::string> keys;
  for (const auto& b : config.bindings()) {
    keys.push_back(b.key);
    app.add_option("--" + b.key, flags[b.key], b.help);
  }
  std::string mu_alias;
  app.add_option("--mu", mu_alias, "alias of --thermal.mu");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }

  std::filesystem::path dir;
  Report report;
  bool have_report = false;
  auto finish = [&](const std::string& status, int code, const std::string& message) {
    if (!message.empty()) std::cerr << "thermal " << command << ": " << message << "\n";
    if (dir.empty()) return code;
    try {
      write_text(dir / "summary.json",
                 summary(command, config, have_report ? &report : nullptr, status, code, message).dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << "thermal: " << e.what() << "\n";
      return static_cast<int>(io_error);
    }
    return code;
  };

  try {
    if (!config_file.empty()) load_config_file(config, config_file);
    for (const auto& key : keys)
      if (app.get_option("--" + key)->count() > 0) config.set(key, flags[key]);
    if (app.get_option("--mu")->count() > 0) config.set("thermal.mu", mu_alias);
    if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) config.output.dir = env;
    dir = config.output.dir;
    config.validate(command);
  } catch (const ConfigError& e) {
    std::error_code ignored;
    if (!dir.empty()) std::filesystem::create_directories(dir, ignored);
    return finish("config_error", config_error, e.what());
  } catch (const IoError& e) {
    return finish("io_error", io_error, e.what());
  }

  try {
    std::filesystem::create_directories(dir);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "thermal " << command << ": cannot create " << dir << ": " << e.what() << "\n";
    return io_error;
  }

  try {
    report = run_command(command, config, dir);
    have_report = true;
    if (config.wants("csv"))
      for (const auto& t : report.tables()) write_text(dir / t.file, csv_text(command, t));
  } catch (const IoError& e) {
    return finish("io_error", io_error, e.what());
  } catch (const ConfigError& e) {
    return finish("config_error", config_error, e.what());
  } catch (const std::invalid_argument& e) {
    return finish("config_error", config_error, e.what());
  } catch (const std::exception& e) {
    return finish("error", assertion_failed, e.what());
  }

  for (const auto& a : report.assertions())
    std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " = " << a.value << " (" << a.relation << " "
              << a.tolerance << ")\n";
  const bool pass = report.pass();
  return finish(pass ? "pass" : "fail", pass ? ok : assertion_failed, "");
}

}  // namespace thermal::cli
