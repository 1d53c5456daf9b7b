#pragma once

// Run configuration: `section.key = value` files, matching `--section.key`
// flags, and validation against the module preconditions.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "thermal/interactions.hpp"
#include "thermal/pathspace.hpp"
#include "thermal/spectral.hpp"

namespace thermal::cli {

/// Bad key, bad value or failed precondition (exit status 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  struct {
    double delta_k = 0.5;
    int half_count = 8;
    double mass = 1.0;
  } grid;
  struct {
    double beta = 1.0;
    double mu = 0.0;
  } thermal;
  struct {
    int n_t = 32;
  } time_grid;
  struct {
    std::int64_t n_samples = 20000;
    std::int64_t seed = 1;
    int n_mats = 8192;
    int shards = 1;
  } sampler;
  struct {
    std::string kind = "polynomial";
    std::string coefficients = "0,0,0,0,1";
    double alpha = 1.0;
    double amplitude = 1.0;
    double lambda = 8.0;
    std::string lambda_ladder = "2,4,8,16,32";
    std::string ordering = "thermal";
  } interaction;
  struct {
    std::string g_profile = "box:2";
    std::string chi_profile = "cos2:1";
  } cutoff;
  struct {
    double closed_form = 1e-10;
    double kms = 1e-8;
    double stat_sigma = 5.0;
  } tolerances;
  struct {
    std::string dir = "thermal-out";
    std::string formats = "json,csv";
  } output;
  // Weyl word for `greens`: one factor per entry.
  struct {
    std::string times = "0";
    std::string modes = "0";
    double amplitude = 1.0;
  } word;
  // Euclidean observable position for the path-integral commands.
  struct {
    int s_index = 8;
    int site = -1;  // lattice index; -1 = the origin
  } observable;
  struct {
    double s = 0.25;
  } witness;
  struct {
    int dim = 4;
    int systems = 10;
    std::int64_t seed = 13;
    std::string charges = "";
  } standard_form;

  using Slot = std::variant<double*, int*, std::int64_t*, std::string*>;
  struct Binding {
    std::string key;
    Slot slot;
    std::string help;
  };
  /// Every settable key, in a fixed order.
  std::vector<Binding> bindings();

  /// Sets one key from text; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Current value of a key as text.
  [[nodiscard]] std::string get(const std::string& key);
  /// key -> value for every key.
  std::map<std::string, std::string> dump();

  /// Checks ranges and the module preconditions for `command`.
  void validate(const std::string& command) const;

  [[nodiscard]] ModeGrid mode_grid() const { return {grid.delta_k, grid.half_count, grid.mass}; }
  [[nodiscard]] TimeGrid time_grid_value() const { return {thermal.beta, time_grid.n_t}; }
  [[nodiscard]] SamplerOptions sampler_options() const;
  [[nodiscard]] InteractionSpec interaction_spec() const;
  [[nodiscard]] std::vector<double> ladder() const;
  [[nodiscard]] bool wants(const std::string& format) const;
};

/// Reads `section.key = value` lines; `#` starts a comment.
void load_config_file(RunConfig& config, const std::filesystem::path& file);

std::vector<double> parse_doubles(const std::string& text);
std::vector<int> parse_ints(const std::string& text);

/// The thirteen commands.
const std::vector<std::string>& command_names();

}  // namespace thermal::cli
