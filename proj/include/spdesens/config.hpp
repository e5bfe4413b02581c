#pragma once

#include "spdesens/norms.hpp"
#include "spdesens/problem.hpp"
#include "spdesens/verify.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdesens {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parsed right-hand side: number, word, [list], (tuple), name(args) or
/// name { key = value, ... }.
struct ConfigValue {
  enum class Kind { Number, Word, List, Tuple, Call, Object };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string text;  // number as written, the word, or the call/object name
  std::vector<ConfigValue> items;
  std::vector<std::pair<std::string, ConfigValue>> fields;

  std::string describe() const;
};

/// Section -> key -> value, in file order within each section.
struct ConfigDocument {
  std::map<std::string, std::vector<std::pair<std::string, ConfigValue>>> sections;
  std::uint64_t hash = 0;  // FNV-1a of the source text

  const ConfigValue* find(const std::string& section, const std::string& key) const;
};

ConfigDocument parse_config_text(const std::string& text);

struct VerifySettings {
  std::vector<double> epsilons{0.1, 0.05, 0.025, 0.0125};
  std::size_t directions = 8;
  std::uint64_t direction_seed = 11;
  std::optional<StateVector> h;
  std::vector<StateVector> order_directions;  // h_1..h_n for higher/derivative/chainrule
  int order = 1;
  std::size_t paths = 1000;
  std::size_t pairs = 4;
  std::uint64_t pair_seed = 17;
  std::vector<double> magnitudes{1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> windows{0.4, 0.2, 0.1, 0.05};
  std::uint64_t frozen_path = 0;
  Component component = Component::Diffusion;
  double tol_abs = 1e-12;
  double band_lo = 1.5;
  double band_hi = 2.5;
  bool band_given = false;  // otherwise the Frechet test widens the band to [1.4, 2.6]
};

struct PlanSettings {
  int n = 1;
  std::string m = "0";
  std::string p = "1";
  std::string q = "2";
  std::optional<std::vector<std::string>> budget;  // p0, p1..pn
};

struct RunConfig {
  Problem problem;
  bool seed_given = false;
  double p = 2.0;
  double q = 3.0;
  std::optional<Window> window;
  std::vector<double> deltas;
  VerifySettings verify;
  PlanSettings plan;
  std::string out;
  std::uint64_t hash = 0;
};

/// Builds a run configuration. Unknown sections or keys, missing required
/// keys and inconsistent dimensions raise ConfigError naming the offenders.
RunConfig build_config(const ConfigDocument& doc);
RunConfig load_config(const std::string& path);
ConfigDocument load_document(const std::string& path);

/// The [plan] section alone, with numbers kept as written for exact
/// arithmetic. Other sections are ignored.
PlanSettings plan_settings(const ConfigDocument& doc);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace spdesens
