#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phylodiv/selection.hpp"

namespace phylodiv {

enum class ProblemKind { exploration, nk, sortnet };
enum class SelectionKind { tournament, random, sharing, lexicase, ecoea };

inline const char* to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::exploration: return "exploration";
    case ProblemKind::nk: return "nk";
    case ProblemKind::sortnet: return "sortnet";
  }
  return "?";
}

inline const char* to_string(SelectionKind s) {
  switch (s) {
    case SelectionKind::tournament: return "tournament";
    case SelectionKind::random: return "random";
    case SelectionKind::sharing: return "sharing";
    case SelectionKind::lexicase: return "lexicase";
    case SelectionKind::ecoea: return "ecoea";
  }
  return "?";
}

/// Fully resolved run parameters. Defaults depend on the problem (exploration
/// runs use pop 500 / 500000 generations / T=8; the other landscapes use pop
/// 1000 / 1000 generations / T=2, with their own resource-flow settings).
struct RunConfig {
  ProblemKind problem = ProblemKind::exploration;
  SelectionKind selection = SelectionKind::tournament;

  std::size_t pop_size = 500;
  std::uint64_t generations = 500000;
  std::uint64_t seed = 1;
  std::uint64_t record_interval = 10;

  std::size_t tournament_t = 8;

  double sharing_sigma = 2.0;
  double sharing_alpha = 1.0;

  EcoEaParams ecoea;
  double resource_inflow = 250.0;
  double resource_outflow = 0.0001;

  // exploration diagnostic
  std::size_t genome_length = 50;
  double value_min = 0.0;
  double value_max = 25.0;
  double mutation_rate = 0.007;
  double mutation_sd = 1.0;

  // NK landscape
  std::size_t nk_n = 20;
  std::size_t nk_k = 3;
  double bitflip_rate = 0.01;

  // sorting networks
  std::size_t sortnet_cases = 100;
  std::size_t sortnet_values = 30;
  std::size_t sortnet_max_comparators = 128;

  std::string timeseries_path = "timeseries.csv";
  std::string snapshot_path = "phylogeny.csv";
};

using ConfigMap = std::map<std::string, std::string>;

/// Parses flat `key = value` text. '#' starts a comment; blank lines are
/// skipped. Later assignments override earlier ones.
inline ConfigMap parse_config_text(std::istream& is, const std::string& source_name = "<config>") {
  ConfigMap kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": expected `key = value`");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file: " + path);
  return parse_config_text(is, path);
}

namespace detail {

inline std::uint64_t config_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw std::runtime_error("config key `" + key + "`: expected a nonnegative integer, got `" +
                             value + "`");
  }
}

inline double config_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key `" + key + "`: expected a number, got `" + value + "`");
  }
}

}  // namespace detail

/// Resolves a key/value map into a RunConfig, applying problem-dependent
/// defaults for any key not present. Unknown keys and malformed values are
/// reported by name.
inline RunConfig resolve_config(const ConfigMap& kv) {
  RunConfig cfg;

  ProblemKind problem = ProblemKind::exploration;
  if (auto it = kv.find("problem"); it != kv.end()) {
    const std::string& v = it->second;
    if (v == "exploration") {
      problem = ProblemKind::exploration;
    } else if (v == "nk") {
      problem = ProblemKind::nk;
    } else if (v == "sortnet") {
      problem = ProblemKind::sortnet;
    } else {
      throw std::runtime_error("config key `problem`: expected exploration|nk|sortnet, got `" +
                               v + "`");
    }
  }
  cfg.problem = problem;

  if (problem == ProblemKind::exploration) {
    cfg.pop_size = 500;
    cfg.generations = 500000;
    cfg.tournament_t = 8;
    cfg.ecoea = EcoEaParams{1.0, 0.25, 1.0, 5.0};
    cfg.resource_inflow = 250.0;
    cfg.resource_outflow = 0.0001;
  } else {
    cfg.pop_size = 1000;
    cfg.generations = 1000;
    cfg.tournament_t = 2;
    cfg.ecoea = EcoEaParams{0.01, 2.0, 3.0, 5.0};
    cfg.resource_inflow = 50.0;
    cfg.resource_outflow = 0.05;
  }

  for (const auto& [key, value] : kv) {
    if (key == "problem") continue;  // handled above
    if (key == "selection") {
      if (value == "tournament") {
        cfg.selection = SelectionKind::tournament;
      } else if (value == "random") {
        cfg.selection = SelectionKind::random;
      } else if (value == "sharing") {
        cfg.selection = SelectionKind::sharing;
      } else if (value == "lexicase") {
        cfg.selection = SelectionKind::lexicase;
      } else if (value == "ecoea") {
        cfg.selection = SelectionKind::ecoea;
      } else {
        throw std::runtime_error(
            "config key `selection`: expected tournament|random|sharing|lexicase|ecoea, got `" +
            value + "`");
      }
    } else if (key == "pop_size") {
      cfg.pop_size = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "generations") {
      cfg.generations = detail::config_u64(key, value);
    } else if (key == "seed") {
      cfg.seed = detail::config_u64(key, value);
    } else if (key == "record_interval") {
      cfg.record_interval = detail::config_u64(key, value);
    } else if (key == "tournament_t") {
      cfg.tournament_t = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "sharing_sigma") {
      cfg.sharing_sigma = detail::config_double(key, value);
    } else if (key == "sharing_alpha") {
      cfg.sharing_alpha = detail::config_double(key, value);
    } else if (key == "ecoea_cf") {
      cfg.ecoea.consumption_fraction = detail::config_double(key, value);
    } else if (key == "ecoea_alpha") {
      cfg.ecoea.alpha = detail::config_double(key, value);
    } else if (key == "ecoea_cost") {
      cfg.ecoea.cost = detail::config_double(key, value);
    } else if (key == "ecoea_max_bonus") {
      cfg.ecoea.max_bonus = detail::config_double(key, value);
    } else if (key == "resource_inflow") {
      cfg.resource_inflow = detail::config_double(key, value);
    } else if (key == "resource_outflow") {
      cfg.resource_outflow = detail::config_double(key, value);
    } else if (key == "genome_length") {
      cfg.genome_length = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "value_min") {
      cfg.value_min = detail::config_double(key, value);
    } else if (key == "value_max") {
      cfg.value_max = detail::config_double(key, value);
    } else if (key == "mutation_rate") {
      cfg.mutation_rate = detail::config_double(key, value);
    } else if (key == "mutation_sd") {
      cfg.mutation_sd = detail::config_double(key, value);
    } else if (key == "nk_n") {
      cfg.nk_n = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "nk_k") {
      cfg.nk_k = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "bitflip_rate") {
      cfg.bitflip_rate = detail::config_double(key, value);
    } else if (key == "sortnet_cases") {
      cfg.sortnet_cases = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "sortnet_values") {
      cfg.sortnet_values = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "sortnet_max_comparators") {
      cfg.sortnet_max_comparators = static_cast<std::size_t>(detail::config_u64(key, value));
    } else if (key == "timeseries_path") {
      cfg.timeseries_path = value;
    } else if (key == "snapshot_path") {
      cfg.snapshot_path = value;
    } else {
      throw std::runtime_error("unknown config key `" + key + "`");
    }
  }

  // validation, by key
  if (cfg.pop_size == 0) throw std::runtime_error("config key `pop_size`: must be >= 1");
  if (cfg.record_interval == 0) {
    throw std::runtime_error("config key `record_interval`: must be >= 1");
  }
  if (cfg.tournament_t == 0) throw std::runtime_error("config key `tournament_t`: must be >= 1");
  if (cfg.sharing_sigma <= 0.0) {
    throw std::runtime_error("config key `sharing_sigma`: must be positive");
  }
  if (cfg.ecoea.consumption_fraction <= 0.0 || cfg.ecoea.consumption_fraction > 1.0) {
    throw std::runtime_error("config key `ecoea_cf`: must be in (0, 1]");
  }
  if (cfg.ecoea.alpha <= 0.0) throw std::runtime_error("config key `ecoea_alpha`: must be > 0");
  if (cfg.ecoea.cost < 0.0) throw std::runtime_error("config key `ecoea_cost`: must be >= 0");
  if (cfg.ecoea.max_bonus <= 0.0) {
    throw std::runtime_error("config key `ecoea_max_bonus`: must be > 0");
  }
  if (cfg.resource_outflow < 0.0 || cfg.resource_outflow > 1.0) {
    throw std::runtime_error("config key `resource_outflow`: must be in [0, 1]");
  }
  if (cfg.genome_length == 0) throw std::runtime_error("config key `genome_length`: must be >= 1");
  if (cfg.value_max <= cfg.value_min) {
    throw std::runtime_error("config key `value_max`: must exceed value_min");
  }
  if (cfg.nk_n == 0) throw std::runtime_error("config key `nk_n`: must be >= 1");
  if (cfg.nk_k >= cfg.nk_n) throw std::runtime_error("config key `nk_k`: must be smaller than nk_n");
  if (cfg.sortnet_values < 2) {
    throw std::runtime_error("config key `sortnet_values`: must be >= 2");
  }
  if (cfg.sortnet_max_comparators == 0) {
    throw std::runtime_error("config key `sortnet_max_comparators`: must be >= 1");
  }
  return cfg;
}

/// Names accepted by resolve_config, for CLI flag generation.
inline const std::vector<std::string>& config_key_names() {
  static const std::vector<std::string> keys = {
      "problem",        "selection",      "pop_size",
      "generations",    "seed",           "record_interval",
      "tournament_t",   "sharing_sigma",  "sharing_alpha",
      "ecoea_cf",       "ecoea_alpha",    "ecoea_cost",
      "ecoea_max_bonus", "resource_inflow", "resource_outflow",
      "genome_length",  "value_min",      "value_max",
      "mutation_rate",  "mutation_sd",    "nk_n",
      "nk_k",           "bitflip_rate",   "sortnet_cases",
      "sortnet_values", "sortnet_max_comparators", "timeseries_path",
      "snapshot_path"};
  return keys;
}

}  // namespace phylodiv
