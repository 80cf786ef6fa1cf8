#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "phylodiv/engine.hpp"

namespace phylodiv {

struct ReplicateSeries {
  std::uint64_t seed = 0;
  std::vector<DiversityRecord> records;
};

/// Runs `count` replicates of the base config with seeds seed_base,
/// seed_base+1, ..., keeping only the recorded series (replicates are
/// independent, so they run on up to `jobs` threads). Output paths in the
/// base config are ignored.
inline std::vector<ReplicateSeries> run_replicates(const RunConfig& base, std::size_t count,
                                                   std::uint64_t seed_base, std::size_t jobs) {
  std::vector<ReplicateSeries> out(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) break;
      RunConfig cfg = base;
      cfg.seed = seed_base + i;
      cfg.timeseries_path.clear();
      cfg.snapshot_path.clear();
      try {
        RunResult result = run_experiment(cfg);
        out[i].seed = cfg.seed;
        out[i].records = std::move(result.records);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failed.load()) throw std::runtime_error("replicate failed: " + first_error);
  return out;
}

struct ReplicateOutcome {
  std::uint64_t seed = 0;
  std::string timeseries_path;
  std::string snapshot_path;
  bool ok = false;
  std::string error;
};

struct BatchResult {
  std::vector<ReplicateOutcome> replicates;
  std::string manifest_path;

  bool all_ok() const {
    for (const auto& r : replicates) {
      if (!r.ok) return false;
    }
    return !replicates.empty();
  }
};

/// Runs replicates to disk: per-replicate time-series and snapshot files
/// under `outdir`, plus a manifest listing `seed <tab> timeseries <tab>
/// snapshot` for every replicate that completed. Failures are recorded per
/// replicate and do not abort the batch.
inline BatchResult run_batch(const RunConfig& base, std::size_t count, std::uint64_t seed_base,
                             const std::string& outdir, std::size_t jobs) {
  if (count == 0) throw std::invalid_argument("run_batch: replicate count must be >= 1");
  std::filesystem::create_directories(outdir);

  BatchResult result;
  result.replicates.resize(count);
  std::atomic<std::size_t> next{0};

  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      ReplicateOutcome& rep = result.replicates[i];
      RunConfig cfg = base;
      cfg.seed = seed_base + i;
      const std::string stem = outdir + "/rep_" + std::to_string(cfg.seed);
      cfg.timeseries_path = stem + "_timeseries.csv";
      cfg.snapshot_path = stem + "_phylogeny.csv";
      rep.seed = cfg.seed;
      rep.timeseries_path = cfg.timeseries_path;
      rep.snapshot_path = cfg.snapshot_path;
      try {
        run_experiment(cfg);
        rep.ok = true;
      } catch (const std::exception& e) {
        rep.ok = false;
        rep.error = e.what();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  result.manifest_path = outdir + "/manifest.txt";
  std::ofstream manifest(result.manifest_path);
  if (!manifest) throw std::runtime_error("cannot write manifest: " + result.manifest_path);
  for (const auto& rep : result.replicates) {
    if (rep.ok) {
      manifest << rep.seed << '\t' << rep.timeseries_path << '\t' << rep.snapshot_path << '\n';
    }
  }
  if (!manifest.good()) throw std::runtime_error("failed writing manifest");
  return result;
}

/// Parses a manifest back into (seed, timeseries, snapshot) entries.
struct ManifestEntry {
  std::uint64_t seed = 0;
  std::string timeseries_path;
  std::string snapshot_path;
};

inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed manifest line");
    }
    ManifestEntry entry;
    try {
      entry.seed = std::stoull(line.substr(0, t1));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad seed");
    }
    entry.timeseries_path = line.substr(t1 + 1, t2 - t1 - 1);
    entry.snapshot_path = line.substr(t2 + 1);
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace phylodiv
