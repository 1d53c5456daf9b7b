#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace thermal::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": cannot parse '" + text + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(value)) throw ConfigError(key + ": value must be finite");
  return value;
}

std::string format(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::vector<RunConfig::Binding> RunConfig::bindings() {
  return {
      {"grid.delta_k", &grid.delta_k, "momentum spacing"},
      {"grid.half_count", &grid.half_count, "M: modes k_{-M}..k_M"},
      {"grid.mass", &grid.mass, "field mass m"},
      {"thermal.beta", &thermal.beta, "inverse temperature"},
      {"thermal.mu", &thermal.mu, "chemical potential (charged-witness)"},
      {"time_grid.n_t", &time_grid.n_t, "Euclidean time slices"},
      {"sampler.n_samples", &sampler.n_samples, "path samples"},
      {"sampler.seed", &sampler.seed, "sampler seed"},
      {"sampler.n_mats", &sampler.n_mats, "Matsubara cutoff N"},
      {"sampler.shards", &sampler.shards, "worker shards"},
      {"interaction.kind", &interaction.kind, "polynomial | exponential | charged_polynomial"},
      {"interaction.coefficients", &interaction.coefficients, "comma-separated a_0,a_1,..."},
      {"interaction.alpha", &interaction.alpha, "exponential coupling"},
      {"interaction.amplitude", &interaction.amplitude, "exponential prefactor"},
      {"interaction.lambda", &interaction.lambda, "UV cutoff for single-cutoff commands"},
      {"interaction.lambda_ladder", &interaction.lambda_ladder, "comma-separated cutoff ladder"},
      {"interaction.ordering", &interaction.ordering, "thermal | zero_temperature"},
      {"cutoff.g_profile", &cutoff.g_profile, "box:<h> | cos2:<w> | const:<c> | zero"},
      {"cutoff.chi_profile", &cutoff.chi_profile, "cos2:<w> | gaussian:<w>"},
      {"tolerances.closed_form", &tolerances.closed_form, "closed-form identity tolerance"},
      {"tolerances.kms", &tolerances.kms, "operator KMS tolerance"},
      {"tolerances.stat_sigma", &tolerances.stat_sigma, "sigma multiple for MC checks"},
      {"output.dir", &output.dir, "artifact directory (OUTPUT_DIR overrides)"},
      {"output.formats", &output.formats, "subset of json,csv,tfpe"},
      {"word.times", &word.times, "real times of the Weyl factors"},
      {"word.modes", &word.modes, "mode index of each factor"},
      {"word.amplitude", &word.amplitude, "amplitude of each unit vector"},
      {"observable.s_index", &observable.s_index, "time index of the second field"},
      {"observable.site", &observable.site, "lattice site of the observable (-1 = origin)"},
      {"witness.s", &witness.s, "Euclidean time of the charged witness"},
      {"standard_form.dim", &standard_form.dim, "matrix dimension"},
      {"standard_form.systems", &standard_form.systems, "random systems to verify"},
      {"standard_form.seed", &standard_form.seed, "system seed"},
      {"standard_form.charges", &standard_form.charges, "comma-separated gauge charges (optional)"},
  };
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (auto& b : bindings()) {
    if (b.key != key) continue;
    std::visit(
        [&](auto* slot) {
          using T = std::remove_pointer_t<decltype(slot)>;
          if constexpr (std::is_same_v<T, std::string>)
            *slot = trim(value);
          else
            *slot = parse_number<T>(key, value);
        },
        b.slot);
    return;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::get(const std::string& key) {
  for (auto& b : bindings()) {
    if (b.key != key) continue;
    return std::visit(
        [](auto* slot) -> std::string {
          using T = std::remove_pointer_t<decltype(slot)>;
          if constexpr (std::is_same_v<T, std::string>)
            return *slot;
          else if constexpr (std::is_same_v<T, double>)
            return format(*slot);
          else
            return std::to_string(*slot);
        },
        b.slot);
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> RunConfig::dump() {
  std::map<std::string, std::string> out;
  for (const auto& b : bindings()) out[b.key] = get(b.key);
  return out;
}

SamplerOptions RunConfig::sampler_options() const {
  SamplerOptions o;
  o.n_samples = static_cast<std::size_t>(sampler.n_samples);
  o.seed = static_cast<std::uint64_t>(sampler.seed);
  o.n_mats = sampler.n_mats;
  o.shards = static_cast<std::size_t>(sampler.shards);
  return o;
}

InteractionSpec RunConfig::interaction_spec() const {
  InteractionSpec s;
  s.kind = parse_interaction_kind(interaction.kind);
  s.ordering = parse_ordering(interaction.ordering);
  s.coefficients = parse_doubles(interaction.coefficients);
  s.alpha = interaction.alpha;
  s.amplitude = interaction.amplitude;
  s.cutoff.lambda = interaction.lambda;
  s.cutoff.chi = ChiProfile::parse(cutoff.chi_profile);
  s.cutoff.g = spatial_cutoff(mode_grid(), cutoff.g_profile);
  return s;
}

std::vector<double> RunConfig::ladder() const { return parse_doubles(interaction.lambda_ladder); }

bool RunConfig::wants(const std::string& fmt) const {
  std::stringstream ss(output.formats);
  std::string item;
  while (std::getline(ss, item, ','))
    if (trim(item) == fmt) return true;
  return false;
}

void RunConfig::validate(const std::string& command) const {
  const auto& names = command_names();
  require(std::find(names.begin(), names.end(), command) != names.end(), "unknown command '" + command + "'");
  require(grid.delta_k > 0.0, "grid.delta_k must be positive");
  require(grid.half_count >= 0 && grid.half_count <= 512, "grid.half_count must be in [0, 512]");
  require(grid.mass > 0.0, "grid.mass must be positive");
  require(thermal.beta > 0.0, "thermal.beta must be positive");
  require(time_grid.n_t >= 4 && time_grid.n_t % 2 == 0, "time_grid.n_t must be even and >= 4");
  require(sampler.n_samples >= 2, "sampler.n_samples must be >= 2");
  require(sampler.seed >= 0, "sampler.seed must be non-negative");
  require(sampler.n_mats >= 1, "sampler.n_mats must be >= 1");
  require(sampler.shards >= 1 && sampler.shards <= 256, "sampler.shards must be in [1, 256]");
  require(tolerances.closed_form > 0 && tolerances.kms > 0 && tolerances.stat_sigma > 0,
          "tolerances must be positive");
  require(!output.dir.empty(), "output.dir must not be empty");
  {
    std::stringstream ss(output.formats);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto f = trim(item);
      require(f == "json" || f == "csv" || f == "tfpe", "output.formats: unknown format '" + f + "'");
    }
  }
  require(observable.site >= -1 && observable.site <= 2 * grid.half_count, "observable.site out of range");
  require(standard_form.dim >= 1 && standard_form.dim <= 64, "standard_form.dim must be in [1, 64]");
  require(standard_form.systems >= 1, "standard_form.systems must be >= 1");
  require(standard_form.seed >= 0, "standard_form.seed must be non-negative");

  try {
    mode_grid().validate();
    time_grid_value().validate();
    if (command == "interaction-converge" || command == "fkn-perturb" || command == "lp-bound") {
      const auto spec = interaction_spec();
      if (command == "interaction-converge")
        spec.validate_shape(mode_grid());
      else
        spec.validate(mode_grid());
      if (command == "interaction-converge") require(ladder().size() >= 2, "interaction.lambda_ladder needs two entries");
    }
    if (command == "exp-series") {
      (void)spatial_cutoff(mode_grid(), cutoff.g_profile);
      require(std::abs(interaction.alpha) < std::sqrt(2 * 3.141592653589793), "interaction.alpha out of range");
    }
    if (command == "fkn-perturb" || command == "feynman-kac")
      require(observable.s_index >= 0 && observable.s_index < time_grid.n_t, "observable.s_index out of range");
    if (command == "greens") {
      const auto t = parse_doubles(word.times);
      const auto m = parse_ints(word.modes);
      require(!t.empty() && t.size() == m.size(), "word.times and word.modes must have equal, nonzero length");
      for (int j : m) require(j >= 0 && j < mode_grid().size(), "word.modes entry out of range");
    }
    if (command == "charged-witness") {
      require(std::abs(thermal.mu) < grid.mass, "|thermal.mu| must be below grid.mass");
      require(witness.s >= 0.0 && witness.s <= thermal.beta, "witness.s must lie in [0, beta]");
    }
    if (command == "standard-form-verify" && !standard_form.charges.empty())
      require(static_cast<int>(parse_ints(standard_form.charges).size()) == standard_form.dim,
              "standard_form.charges needs one entry per dimension");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void load_config_file(RunConfig& config, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read config file " + file.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(file.string() + ":" + std::to_string(number) + ": expected 'section.key = value'");
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(parse_number<double>("list", item));
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(parse_number<int>("list", item));
  return out;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "greens",       "kms-check",   "sample-paths", "os-check",  "markov-check",
      "wick-check",   "interaction-converge",        "exp-series", "fkn-perturb",
      "lp-bound",     "standard-form-verify",        "feynman-kac", "charged-witness"};
  return names;
}

}  // namespace thermal::cli
