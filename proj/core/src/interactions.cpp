#include "thermal/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "thermal/parallel.hpp"

namespace thermal {

using std::numbers::pi;

namespace {

double sinc(double u) {
  if (std::abs(u) < 1e-4) return 1.0 - u * u / 6.0;
  return std::sin(u) / u;
}

/// "name:value" -> (name, value); value defaults to `fallback`.
std::pair<std::string, double> split_profile(const std::string& text, double fallback) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {text, fallback};
  std::size_t used = 0;
  const std::string tail = text.substr(colon + 1);
  double value = 0.0;
  try {
    value = std::stod(tail, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("profile '" + text + "': bad numeric parameter");
  }
  if (used != tail.size()) throw std::invalid_argument("profile '" + text + "': trailing characters");
  return {text.substr(0, colon), value};
}

/// (4 pi)^{-1/2} chi^(k/L) eps(k)^{-1/2} in natural momentum order.
std::vector<double> cutoff_amplitude(const ModeGrid& grid, const CutoffSpec& spec) {
  const auto k = grid.momenta();
  const auto eps = dispersion(grid);
  std::vector<double> a(k.size());
  const double norm = 1.0 / std::sqrt(4.0 * pi);
  for (std::size_t j = 0; j < k.size(); ++j) {
    const double chi = std::isinf(spec.lambda) ? 1.0 : spec.chi(k[j] / spec.lambda);
    a[j] = norm * chi / std::sqrt(eps[j]);
  }
  return a;
}

std::vector<double> natural_occupation(const ModeGrid& grid, double beta) {
  std::vector<double> rho;
  for (double e : dispersion(grid)) rho.push_back(bose_occupation(beta * e));
  return rho;
}

/// sum_{x,y} dx^2 g_a(x) g_b(y) F(cov[(x - y) mod n]).
template <typename F>
double lattice_pair_sum(const ModeGrid& grid, std::span<const double> ga, std::span<const double> gb,
                        std::span<const double> cov, F&& f) {
  const auto n = ga.size();
  const double dx = grid.lattice_spacing();
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (ga[x] == 0.0) continue;
    double inner_sum = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (gb[y] == 0.0) continue;
      const std::size_t sep = (x + n - y) % n;
      inner_sum += dx * gb[y] * f(cov[sep]);
    }
    total += dx * ga[x] * inner_sum;
  }
  return total;
}

/// Thermal-ordered coefficients of a polynomial or charged spec.
std::vector<double> thermal_coefficients(const InteractionSpec& spec, const CutoffField& field) {
  if (spec.ordering == Ordering::thermal) return spec.coefficients;
  const double v0 = field.variance(Ordering::zero_temperature);
  const double vb = field.variance(Ordering::thermal);
  if (spec.kind == InteractionKind::charged_polynomial)
    return reorder_complex(spec.coefficients, v0, vb);
  return reorder(WickPolynomial{spec.coefficients, v0}, vb).coeffs;
}

/// Overall factor of the exponential kind after moving it to thermal ordering.
double thermal_amplitude(const InteractionSpec& spec, const CutoffField& field) {
  if (spec.ordering == Ordering::thermal) return spec.amplitude;
  const double shift = field.variance(Ordering::thermal) - field.variance(Ordering::zero_temperature);
  return spec.amplitude * std::exp(0.5 * spec.alpha * spec.alpha * shift);
}

}  // namespace

ChiProfile::ChiProfile(Shape shape, double width) : shape_(shape), width_(width) {
  if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("chi profile: width must be > 0");
}

ChiProfile ChiProfile::parse(const std::string& text) {
  const auto [name, width] = split_profile(text, 1.0);
  if (name == "cos2") return {Shape::cos2, width};
  if (name == "gaussian") return {Shape::gaussian, width};
  throw std::invalid_argument("unknown chi profile '" + name + "'");
}

double ChiProfile::operator()(double p) const {
  if (shape_ == Shape::gaussian) {
    const double u = p * width_;
    return std::exp(-0.5 * u * u);
  }
  // chi = (2/w) cos^2(pi x / w) on |x| <= w/2; chi^ = sinc(pw/2) a^2/(a^2 - p^2), a = 2 pi / w
  const double a = 2.0 * pi / width_;
  const double q = std::abs(p);
  if (q < 0.5 * a) return sinc(0.5 * q * width_) * a * a / ((a - q) * (a + q));
  // sin(qw/2) = sin((a - q) w/2) removes the 0/0 at q = a
  const double u = 0.5 * q * width_;
  return 0.5 * width_ * sinc(0.5 * (a - q) * width_) * a * a / (u * (a + q));
}

std::string ChiProfile::describe() const {
  std::ostringstream out;
  out << (shape_ == Shape::cos2 ? "cos2" : "gaussian") << ':' << width_;
  return out.str();
}

std::vector<double> spatial_cutoff(const ModeGrid& grid, const std::string& profile) {
  grid.validate();
  const auto x = grid.positions();
  std::vector<double> g(x.size(), 0.0);
  const auto [name, param] = split_profile(profile, 1.0);
  if (name == "zero") return g;
  if (!(param > 0.0)) throw std::invalid_argument("g profile '" + profile + "': parameter must be > 0");
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (name == "box") {
      g[j] = std::abs(x[j]) <= param * (1.0 + 1e-12) ? 1.0 : 0.0;
    } else if (name == "cos2") {
      if (std::abs(x[j]) < 0.5 * param) {
        const double c = std::cos(pi * x[j] / param);
        g[j] = c * c;
      }
    } else if (name == "const") {
      g[j] = param;
    } else {
      throw std::invalid_argument("unknown g profile '" + name + "'");
    }
  }
  return g;
}

void CutoffSpec::validate(const ModeGrid& grid) const {
  if (!(lambda >= 1.0)) throw std::invalid_argument("cutoff: lambda must be >= 1");
  if (g.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("cutoff: g must have one value per lattice site");
  for (double v : g)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("cutoff: g must be finite and >= 0");
  if (std::abs(chi(0.0) - 1.0) > 1e-12) throw std::invalid_argument("cutoff: chi^(0) must be 1");
}

double CutoffSpec::g_l1(const ModeGrid& grid) const {
  const double dx = grid.lattice_spacing();
  double s = 0.0;
  for (double v : g) s += dx * v;
  return s;
}

double CutoffSpec::g_l2(const ModeGrid& grid) const {
  const double dx = grid.lattice_spacing();
  double s = 0.0;
  for (double v : g) s += dx * v * v;
  return std::sqrt(s);
}

InteractionKind parse_interaction_kind(const std::string& text) {
  if (text == "polynomial") return InteractionKind::polynomial;
  if (text == "exponential") return InteractionKind::exponential;
  if (text == "charged" || text == "charged_polynomial") return InteractionKind::charged_polynomial;
  throw std::invalid_argument("unknown interaction kind '" + text + "'");
}

Ordering parse_ordering(const std::string& text) {
  if (text == "thermal") return Ordering::thermal;
  if (text == "zero_temperature" || text == "zero") return Ordering::zero_temperature;
  throw std::invalid_argument("unknown ordering '" + text + "'");
}

std::string to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::polynomial: return "polynomial";
    case InteractionKind::exponential: return "exponential";
    case InteractionKind::charged_polynomial: return "charged";
  }
  return "?";
}

std::string to_string(Ordering ordering) {
  return ordering == Ordering::thermal ? "thermal" : "zero_temperature";
}

void InteractionSpec::validate_shape(const ModeGrid& grid) const {
  cutoff.validate(grid);
  if (kind != InteractionKind::exponential) {
    if (coefficients.empty()) throw std::invalid_argument("interaction: no coefficients");
    if (static_cast<int>(coefficients.size()) - 1 > max_wick_degree)
      throw std::invalid_argument("interaction: degree above 40");
    for (double c : coefficients)
      if (!std::isfinite(c)) throw std::invalid_argument("interaction: non-finite coefficient");
  }
  if (!std::isfinite(alpha) || !std::isfinite(amplitude))
    throw std::invalid_argument("interaction: non-finite alpha or amplitude");
}

void InteractionSpec::validate(const ModeGrid& grid) const {
  validate_shape(grid);
  switch (kind) {
    case InteractionKind::polynomial:
      WickPolynomial{coefficients, 0.0}.validate_bounded_below();
      break;
    case InteractionKind::exponential:
      if (!(std::abs(alpha) < std::sqrt(2.0 * pi)))
        throw std::invalid_argument("exponential interaction needs |alpha| < sqrt(2 pi)");
      if (!(amplitude > 0.0)) throw std::invalid_argument("exponential interaction needs amplitude > 0");
      break;
    case InteractionKind::charged_polynomial: {
      const WickPolynomial p{coefficients, 0.0};
      if (p.degree() < 1 || !(coefficients[static_cast<std::size_t>(p.degree())] > 0.0))
        throw std::invalid_argument("charged interaction needs degree >= 1 and positive leading coefficient");
      break;
    }
  }
}

TestVector cutoff_testfunction(const ModeGrid& grid, const CutoffSpec& spec, int lattice_index) {
  grid.validate();
  if (lattice_index < 0 || lattice_index >= grid.size())
    throw std::out_of_range("cutoff_testfunction: lattice index out of range");
  const auto amp = cutoff_amplitude(grid, spec);
  const auto k = grid.momenta();
  const double x = grid.positions()[static_cast<std::size_t>(lattice_index)];
  std::vector<cplx> f(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) f[j] = amp[j] * std::polar(1.0, -k[j] * x);
  const auto coords = to_real_modes(grid, f);
  std::vector<double> re(coords.size());
  for (std::size_t j = 0; j < coords.size(); ++j) re[j] = coords[j].real();
  return TestVector::real(re);
}

CutoffField::CutoffField(const ModeGrid& grid, double beta, const CutoffSpec& spec)
    : grid_(grid), beta_(beta), lambda_(spec.lambda), chi_(spec.chi),
      sites_(static_cast<std::size_t>(grid.size())), modes_(static_cast<std::size_t>(grid.size())) {
  grid.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("cutoff field: beta must be > 0");
  if (!(spec.lambda >= 1.0)) throw std::invalid_argument("cutoff field: lambda must be >= 1");
  amplitude_ = cutoff_amplitude(grid, spec);
  rho_ = natural_occupation(grid, beta);
  coords_.resize(sites_ * modes_);
  for (std::size_t x = 0; x < sites_; ++x) {
    const auto f = cutoff_testfunction(grid, spec, static_cast<int>(x));
    for (std::size_t j = 0; j < modes_; ++j) coords_[x * modes_ + j] = f[j].real();
  }
}

std::span<const double> CutoffField::coordinates(std::size_t site) const {
  return {coords_.data() + site * modes_, modes_};
}

void CutoffField::fields(std::span<const double> modes, std::span<double> out) const {
  if (modes.size() != modes_ || out.size() != sites_)
    throw std::invalid_argument("CutoffField::fields: size mismatch");
  const double root2 = std::sqrt(2.0);
  for (std::size_t x = 0; x < sites_; ++x) {
    const double* c = coords_.data() + x * modes_;
    double s = 0.0;
    for (std::size_t j = 0; j < modes_; ++j) s += c[j] * modes[j];
    out[x] = root2 * s;
  }
}

double CutoffField::variance(Ordering ordering) const {
  double v = 0.0;
  for (std::size_t j = 0; j < amplitude_.size(); ++j) {
    const double w = ordering == Ordering::thermal ? 1.0 + 2.0 * rho_[j] : 1.0;
    v += grid_.delta_k * amplitude_[j] * amplitude_[j] * w;
  }
  return v;
}

double CutoffField::thermal_shift() const {
  double r = 0.0;
  for (std::size_t j = 0; j < amplitude_.size(); ++j)
    r += grid_.delta_k * amplitude_[j] * amplitude_[j] * rho_[j];
  return r;
}

std::vector<double> CutoffField::covariance_table(const CutoffField& other) const {
  if (other.sites_ != sites_ || other.grid_.delta_k != grid_.delta_k || other.beta_ != beta_)
    throw std::invalid_argument("covariance_table: fields live on different grids");
  const auto k = grid_.momenta();
  const double dx = grid_.lattice_spacing();
  std::vector<double> table(sites_);
  for (std::size_t sep = 0; sep < sites_; ++sep) {
    double c = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
      c += grid_.delta_k * amplitude_[j] * other.amplitude_[j] * (1.0 + 2.0 * rho_[j]) *
           std::cos(k[j] * dx * static_cast<double>(sep));
    table[sep] = c;
  }
  return table;
}

CutoffInteraction::CutoffInteraction(const ModeGrid& grid, double beta, InteractionSpec spec)
    : grid_(grid), spec_(std::move(spec)), field_(grid, beta, spec_.cutoff),
      dx_(grid.lattice_spacing()) {
  spec_.validate_shape(grid_);
}

std::size_t CutoffInteraction::slice_size() const {
  return spec_.kind == InteractionKind::charged_polynomial ? 2 * field_.modes() : field_.modes();
}

double CutoffInteraction::density(double y) const {
  const double v = ordering_variance();
  switch (spec_.kind) {
    case InteractionKind::exponential:
      return spec_.amplitude * wick_exp(y, spec_.alpha, v);
    case InteractionKind::polynomial: {
      // :y^{n+1}: = y :y^n: - n v :y^{n-1}:
      double prev = 1.0;
      double cur = y;
      double sum = spec_.coefficients[0];
      for (std::size_t n = 1; n < spec_.coefficients.size(); ++n) {
        sum += spec_.coefficients[n] * cur;
        const double next = y * cur - static_cast<double>(n) * v * prev;
        prev = cur;
        cur = next;
      }
      return sum;
    }
    case InteractionKind::charged_polynomial: {
      // y = |psi|^2; :y^{n+1}: = (y - (2n+1) v) :y^n: - n^2 v^2 :y^{n-1}:
      double prev = 1.0;
      double cur = y - v;
      double sum = spec_.coefficients[0];
      for (std::size_t n = 1; n < spec_.coefficients.size(); ++n) {
        sum += spec_.coefficients[n] * cur;
        const double nn = static_cast<double>(n);
        const double next = (y - (2.0 * nn + 1.0) * v) * cur - nn * nn * v * v * prev;
        prev = cur;
        cur = next;
      }
      return sum;
    }
  }
  return 0.0;
}

double CutoffInteraction::operator()(std::span<const double> slice) const {
  if (slice.size() != slice_size()) throw std::invalid_argument("interaction: slice size mismatch");
  const std::size_t sites = field_.sites();
  const auto& g = spec_.cutoff.g;
  std::vector<double> phi(sites);
  double total = 0.0;
  if (spec_.kind == InteractionKind::charged_polynomial) {
    const std::size_t d = field_.modes();
    std::vector<double> phi2(sites);
    field_.fields(slice.subspan(0, d), phi);
    field_.fields(slice.subspan(d, d), phi2);
    for (std::size_t x = 0; x < sites; ++x) {
      if (g[x] == 0.0) continue;
      const double modulus_sq = 0.5 * (phi[x] * phi[x] + phi2[x] * phi2[x]);
      total += dx_ * g[x] * density(modulus_sq);
    }
    return total;
  }
  field_.fields(slice, phi);
  for (std::size_t x = 0; x < sites; ++x) {
    if (g[x] == 0.0) continue;
    total += dx_ * g[x] * density(phi[x]);
  }
  return total;
}

std::vector<double> evaluate_V(const PathEnsemble& ensemble, int t, const CutoffInteraction& v,
                               std::size_t shards) {
  if (ensemble.modes() != v.slice_size())
    throw std::invalid_argument("evaluate_V: ensemble modes do not match the interaction grid");
  if (t < 0 || t >= ensemble.n_t()) throw std::out_of_range("evaluate_V: time index out of range");
  std::vector<double> out(ensemble.n_samples());
  parallel_shards(ensemble.n_samples(), shards, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) out[n] = v(ensemble.slice(n, t));
  });
  return out;
}

DiagonalSystem charged_sampling_system(const ModeGrid& grid, double beta) {
  return build_charged(grid, beta, 0.0);
}

KernelWp::KernelWp(const ModeGrid& grid, double beta, const CutoffSpec& spec, int p)
    : grid_(grid), p_(p), g_(spec.g) {
  if (p < 1 || p > max_degree) throw std::invalid_argument("kernel_wp: degree must lie in [1, 8]");
  spec.validate(grid);
  const auto k = grid.momenta();
  const auto eps = dispersion(grid);
  const auto rho = natural_occupation(grid, beta);
  for (std::size_t j = 0; j < k.size(); ++j) {
    const double chi = std::isinf(spec.lambda) ? 1.0 : spec.chi(k[j] / spec.lambda);
    factor_.push_back(chi / std::sqrt(eps[j]));
    weight_.push_back(grid.delta_k * chi * chi * (1.0 + 2.0 * rho[j]) / eps[j]);
  }
}

cplx KernelWp::operator()(std::span<const int> idx) const {
  if (idx.size() != static_cast<std::size_t>(p_)) throw std::invalid_argument("kernel_wp: tuple size");
  double prod = 1.0;
  int total = 0;
  for (int i : idx) {
    if (i < 0 || i >= grid_.size()) throw std::out_of_range("kernel_wp: momentum index");
    prod *= factor_[static_cast<std::size_t>(i)];
    total += i - grid_.half_count;
  }
  return lattice_fourier(grid_, g_, total * grid_.delta_k) * prod;
}

Estimate KernelWp::norm_sq(std::size_t mc_tuples, std::uint64_t seed) const {
  const int d = grid_.size();
  const int M = grid_.half_count;
  // |g^(n dk)|^2 for every reachable total momentum index n
  const int span_max = p_ * M;
  std::vector<double> g_hat_sq(2 * static_cast<std::size_t>(span_max) + 1);
  for (int n = -span_max; n <= span_max; ++n)
    g_hat_sq[static_cast<std::size_t>(n + span_max)] = std::norm(lattice_fourier(grid_, g_, n * grid_.delta_k));

  std::vector<int> idx(static_cast<std::size_t>(p_), 0);
  auto term = [&] {
    double w = 1.0;
    int total = 0;
    for (int i : idx) {
      w *= weight_[static_cast<std::size_t>(i)];
      total += i - M;
    }
    return w * g_hat_sq[static_cast<std::size_t>(total + span_max)];
  };

  if (p_ <= 3) {
    double sum = 0.0;
    while (true) {
      sum += term();
      std::size_t pos = 0;
      while (pos < idx.size() && ++idx[pos] == d) idx[pos++] = 0;
      if (pos == idx.size()) break;
    }
    return {sum, 0.0, true};
  }
  if (mc_tuples < 2) throw std::invalid_argument("kernel_wp: need at least two Monte Carlo tuples");
  const double volume = std::pow(static_cast<double>(d), p_);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < mc_tuples; ++s) {
    for (std::size_t i = 0; i < idx.size(); ++i)
      idx[i] = static_cast<int>(counter_hash(seed, s, i, 0x77) % static_cast<std::uint64_t>(d));
    const double x = term();
    const double delta = x - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (x - mean);
  }
  const double var = m2 / static_cast<double>(mc_tuples - 1);
  return {volume * mean, volume * std::sqrt(var / static_cast<double>(mc_tuples)), false};
}

double exact_l2_inner(const ModeGrid& grid, double beta, const InteractionSpec& a,
                      const InteractionSpec& b) {
  if (a.kind != b.kind) throw std::invalid_argument("exact_l2_inner: kinds differ");
  a.validate_shape(grid);
  b.validate_shape(grid);
  const CutoffField fa(grid, beta, a.cutoff);
  const CutoffField fb(grid, beta, b.cutoff);
  const auto cov = fa.covariance_table(fb);
  const auto& ga = a.cutoff.g;
  const auto& gb = b.cutoff.g;

  if (a.kind == InteractionKind::exponential) {
    const double prefactor = thermal_amplitude(a, fa) * thermal_amplitude(b, fb);
    const double ab = a.alpha * b.alpha;
    return prefactor * lattice_pair_sum(grid, ga, gb, cov, [&](double c) { return std::exp(ab * c); });
  }
  const auto ca = thermal_coefficients(a, fa);
  const auto cb = thermal_coefficients(b, fb);
  const bool charged = a.kind == InteractionKind::charged_polynomial;
  double total = 0.0;
  for (std::size_t j = 0; j < std::min(ca.size(), cb.size()); ++j) {
    if (ca[j] == 0.0 || cb[j] == 0.0) continue;
    const int n = static_cast<int>(j);
    const double pairing = charged ? factorial(n) * factorial(n) : factorial(n);
    const int power = charged ? 2 * n : n;
    total += ca[j] * cb[j] * pairing *
             lattice_pair_sum(grid, ga, gb, cov, [&](double c) { return std::pow(c, power); });
  }
  return total;
}

double exact_l2_distance(const ModeGrid& grid, double beta, const InteractionSpec& a,
                         const InteractionSpec& b) {
  const double d2 = exact_l2_inner(grid, beta, a, a) + exact_l2_inner(grid, beta, b, b) -
                    2.0 * exact_l2_inner(grid, beta, a, b);
  return std::sqrt(std::max(0.0, d2));
}

bool ConvergenceTable::strictly_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].distance < rows[i - 1].distance)) return false;
  return true;
}

ConvergenceTable convergence_study(const ModeGrid& grid, double beta, const InteractionSpec& spec,
                                   std::span<const double> ladder) {
  ConvergenceTable table;
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    InteractionSpec lo = spec;
    InteractionSpec hi = spec;
    lo.cutoff.lambda = ladder[i - 1];
    hi.cutoff.lambda = ladder[i];
    table.rows.push_back({ladder[i - 1], ladder[i], exact_l2_distance(grid, beta, lo, hi)});
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : table.rows)
    if (r.distance > 0.0) {
      xs.push_back(std::log(r.lambda_lo));
      ys.push_back(std::log(r.distance));
    }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    table.rate = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return table;
}

InteractionSpec reorder_interaction(const ModeGrid& grid, double beta, const InteractionSpec& spec) {
  spec.validate_shape(grid);
  if (spec.ordering == Ordering::thermal) return spec;
  const CutoffField field(grid, beta, spec.cutoff);
  InteractionSpec out = spec;
  out.ordering = Ordering::thermal;
  if (spec.kind == InteractionKind::exponential)
    out.amplitude = thermal_amplitude(spec, field);
  else
    out.coefficients = thermal_coefficients(spec, field);
  return out;
}

double kbeta_kernel(const ModeGrid& grid, double beta, double x) {
  const auto k = grid.momenta();
  const auto eps = dispersion(grid);
  const double ax = std::abs(x);
  double sum = 0.0;
  for (std::size_t j = 0; j < k.size(); ++j)
    sum += grid.delta_k * std::cos(k[j] * ax) * (1.0 + 2.0 * bose_occupation(beta * eps[j])) / eps[j];
  return 0.5 * sum;
}

ExpSeries exp_series(const ModeGrid& grid, double beta, double alpha, std::span<const double> g,
                     int n_max) {
  if (g.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("exp_series: g must have one value per lattice site");
  if (n_max < 0 || n_max > max_wick_degree) throw std::invalid_argument("exp_series: n_max out of range");
  const auto n = g.size();
  const double dx = grid.lattice_spacing();
  std::vector<double> kernel(n);
  for (std::size_t sep = 0; sep < n; ++sep) kernel[sep] = kbeta_kernel(grid, beta, dx * static_cast<double>(sep));

  double g1 = 0.0;
  for (double v : g) g1 += dx * v;
  ExpSeries out;
  out.terms.push_back(g1 * g1);
  const double coupling = alpha * alpha / (2.0 * pi);
  for (int order = 1; order <= n_max; ++order) {
    double s = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const std::size_t sep = x > y ? x - y : y - x;
        s += dx * dx * g[x] * g[y] * std::pow(kernel[sep], order);
      }
    out.terms.push_back(std::pow(coupling, order) / factorial(order) * s);
  }
  for (std::size_t i = 0; i + 1 < out.terms.size(); ++i)
    out.ratios.push_back(out.terms[i] == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                             : out.terms[i + 1] / out.terms[i]);
  for (double t : out.terms) out.sum += t;
  return out;
}

LowerBoundProbe lower_bound_probe(const ModeGrid& grid, const PathEnsemble& ensemble,
                                  const InteractionSpec& spec, std::span<const double> ladder,
                                  std::size_t shards) {
  if (spec.kind != InteractionKind::polynomial)
    throw std::invalid_argument("lower_bound_probe: needs a polynomial interaction");
  const int degree = WickPolynomial{spec.coefficients, 0.0}.degree();
  const int half = std::max(1, degree / 2);
  LowerBoundProbe probe;
  for (double lambda : ladder) {
    InteractionSpec s = spec;
    s.cutoff.lambda = lambda;
    const CutoffInteraction v(grid, ensemble.beta(), s);
    const auto values = evaluate_V(ensemble, 0, v, shards);
    const double min_v = *std::min_element(values.begin(), values.end());
    const double lp = std::pow(std::log(lambda), half);
    probe.rows.push_back({lambda, min_v, lp});
    if (lp > 0.0) probe.fitted_c = std::max(probe.fitted_c, -min_v / lp);
  }
  return probe;
}

}  // namespace thermal
