// phylodiv command-line interface: `run` one experiment, `batch` replicate
// sets, `analyze` recorded time series (transfer entropy + Spearman).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phylodiv/analysis.hpp"
#include "phylodiv/batch.hpp"
#include "phylodiv/config.hpp"
#include "phylodiv/engine.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  phylodiv::ConfigMap overrides;
};

void add_config_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (flat `key = value` lines)");
  for (const std::string& key : phylodiv::config_key_names()) {
    cmd->add_option_function<std::string>(
           "--" + key, [&opts, key](const std::string& value) { opts.overrides[key] = value; },
           "Override config key `" + key + "`")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

phylodiv::RunConfig load_config(const CommonOptions& opts) {
  phylodiv::ConfigMap kv;
  if (!opts.config_path.empty()) {
    kv = phylodiv::parse_config_file(opts.config_path);
  }
  for (const auto& [key, value] : opts.overrides) kv[key] = value;
  return phylodiv::resolve_config(kv);
}

std::vector<std::uint64_t> parse_lags(const std::string& text) {
  std::vector<std::uint64_t> lags;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    if (!item.empty()) {
      try {
        lags.push_back(std::stoull(item));
      } catch (const std::exception&) {
        throw std::runtime_error("bad lag value `" + item + "`");
      }
    }
    pos = comma + 1;
  }
  return lags;
}

struct AnalyzePair {
  std::string source;
  std::string target;
};

std::vector<AnalyzePair> parse_pairs(const std::vector<std::string>& specs) {
  std::vector<AnalyzePair> pairs;
  for (const std::string& spec : specs) {
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size()) {
      throw std::runtime_error("bad --pair `" + spec + "` (expected SOURCE:TARGET)");
    }
    pairs.push_back({spec.substr(0, colon), spec.substr(colon + 1)});
  }
  return pairs;
}

int run_command(const CommonOptions& opts) {
  const phylodiv::RunConfig cfg = load_config(opts);
  const phylodiv::RunResult result = phylodiv::run_experiment(cfg);
  std::cout << "run complete: " << result.records.size() << " records, final best fitness "
            << result.final_summary.best_fitness << "\n";
  if (!cfg.timeseries_path.empty()) std::cout << "  time series: " << cfg.timeseries_path << "\n";
  if (!cfg.snapshot_path.empty()) std::cout << "  phylogeny:   " << cfg.snapshot_path << "\n";
  return 0;
}

int batch_command(const CommonOptions& opts, std::size_t replicates, std::uint64_t seed_base,
                  bool seed_base_set, const std::string& outdir, std::size_t jobs) {
  phylodiv::RunConfig cfg = load_config(opts);
  if (!seed_base_set) seed_base = cfg.seed;
  const phylodiv::BatchResult batch =
      phylodiv::run_batch(cfg, replicates, seed_base, outdir, jobs);
  std::size_t failures = 0;
  for (const auto& rep : batch.replicates) {
    if (!rep.ok) {
      ++failures;
      std::cerr << "replicate seed " << rep.seed << " failed: " << rep.error << "\n";
    }
  }
  std::cout << "batch complete: " << (batch.replicates.size() - failures) << "/"
            << batch.replicates.size() << " replicates, manifest " << batch.manifest_path << "\n";
  return failures == 0 ? 0 : 1;
}

int analyze_command(const std::vector<std::string>& inputs, const std::string& manifest_path,
                    const std::vector<std::string>& pair_specs, const std::string& lags_text,
                    int nbins, const std::string& te_out, const std::string& spearman_out) {
  std::vector<std::pair<std::string, std::string>> replicates;  // (label, path)
  if (!manifest_path.empty()) {
    for (const auto& entry : phylodiv::read_manifest(manifest_path)) {
      replicates.emplace_back(std::to_string(entry.seed), entry.timeseries_path);
    }
  }
  for (const std::string& path : inputs) replicates.emplace_back(path, path);
  if (replicates.empty()) {
    throw std::runtime_error("analyze: no inputs (use --manifest or positional CSV paths)");
  }

  std::vector<AnalyzePair> pairs = parse_pairs(pair_specs);
  if (pairs.empty()) {
    pairs = {{"mpd_mean", "best_fitness"},
             {"phenotypic_richness", "best_fitness"},
             {"mpd_mean", "phenotypic_richness"}};
  }

  std::ofstream te_os(te_out);
  if (!te_os) throw std::runtime_error("cannot write " + te_out);
  te_os << "replicate,source,target,lag,te_nats\n";
  std::ofstream sp_os(spearman_out);
  if (!sp_os) throw std::runtime_error("cannot write " + spearman_out);
  sp_os << "replicate,x,y,rho\n";

  char buf[64];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };

  for (const auto& [label, path] : replicates) {
    const phylodiv::TimeSeriesTable table = phylodiv::read_timeseries_file(path);
    for (const AnalyzePair& pair : pairs) {
      const auto [x, y] = phylodiv::extract_pair(table, pair.source, pair.target);
      std::vector<std::uint64_t> lags;
      if (lags_text.empty()) {
        lags = phylodiv::default_lag_grid(x.values.size(), x.stride);
      } else {
        for (const std::uint64_t lag : parse_lags(lags_text)) {
          if (lag % x.stride == 0 && lag / x.stride < x.values.size()) lags.push_back(lag);
        }
      }
      for (const auto& row : phylodiv::lag_sweep(x, y, lags, nbins)) {
        te_os << label << ',' << pair.source << ',' << pair.target << ',' << row.lag << ','
              << fmt(row.te_xy) << '\n';
        te_os << label << ',' << pair.target << ',' << pair.source << ',' << row.lag << ','
              << fmt(row.te_yx) << '\n';
      }
      sp_os << label << ',' << pair.source << ',' << pair.target << ','
            << fmt(phylodiv::spearman(x.values, y.values)) << '\n';
    }
  }
  if (!te_os.good() || !sp_os.good()) throw std::runtime_error("failed writing analysis output");
  std::cout << "analysis complete: " << te_out << ", " << spearman_out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary runs with phylogeny tracking, diversity metrics, and "
               "transfer-entropy analysis"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  add_config_options(run, run_opts);

  CommonOptions batch_opts;
  std::size_t replicates = 1;
  std::uint64_t seed_base = 0;
  std::string outdir = "batch_out";
  std::size_t jobs = 1;
  CLI::App* batch = app.add_subcommand("batch", "Run a replicate set");
  add_config_options(batch, batch_opts);
  batch->add_option("--replicates", replicates, "Number of replicates")->check(CLI::PositiveNumber);
  CLI::Option* seed_base_opt =
      batch->add_option("--seed-base", seed_base, "First replicate seed (default: config seed)");
  batch->add_option("--outdir", outdir, "Output directory");
  batch->add_option("--jobs", jobs, "Concurrent replicates")->check(CLI::PositiveNumber);

  std::vector<std::string> analyze_inputs;
  std::string manifest_path;
  std::vector<std::string> pair_specs;
  std::string lags_text;
  int nbins = 0;
  std::string te_out = "te_results.csv";
  std::string spearman_out = "spearman.csv";
  CLI::App* analyze = app.add_subcommand("analyze", "Transfer entropy and Spearman analysis");
  analyze->add_option("inputs", analyze_inputs, "Time-series CSV files");
  analyze->add_option("--manifest", manifest_path, "Batch manifest listing replicates");
  analyze->add_option("--pair", pair_specs,
                      "Column pair SOURCE:TARGET (repeatable; default mpd_mean:best_fitness, "
                      "phenotypic_richness:best_fitness, mpd_mean:phenotypic_richness)");
  analyze->add_option("--lags", lags_text,
                      "Comma-separated lags in generations (default decades 10..100000, clipped)");
  analyze->add_option("--nbins", nbins, "Discretization bins (default: cube root of length)");
  analyze->add_option("--te-out", te_out, "Transfer-entropy output CSV");
  analyze->add_option("--spearman-out", spearman_out, "Spearman output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(run_opts);
    if (batch->parsed()) {
      return batch_command(batch_opts, replicates, seed_base, !seed_base_opt->empty(), outdir,
                           jobs);
    }
    if (analyze->parsed()) {
      return analyze_command(analyze_inputs, manifest_path, pair_specs, lags_text, nbins, te_out,
                             spearman_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
