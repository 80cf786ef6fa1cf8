#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phylodiv/config.hpp"
#include "phylodiv/evaluation.hpp"
#include "phylodiv/metrics.hpp"
#include "phylodiv/phylogeny.hpp"
#include "phylodiv/problems/exploration.hpp"
#include "phylodiv/problems/nk.hpp"
#include "phylodiv/problems/sorting_network.hpp"
#include "phylodiv/random.hpp"
#include "phylodiv/selection.hpp"

namespace phylodiv {

template <typename P>
concept ProblemType = requires(const P& p, const typename P::genome_t& g,
                               typename P::genome_t& gm, Random& rng) {
  { p.random_genome(rng) } -> std::same_as<typename P::genome_t>;
  { p.evaluate(g) } -> std::same_as<Evaluation>;
  { p.mutate(gm, rng) };
  { p.sharing_distance(g, std::declval<const Evaluation&>(), g,
                       std::declval<const Evaluation&>()) } -> std::convertible_to<double>;
  { p.criteria_count() } -> std::convertible_to<std::size_t>;
};

struct FinalSummary {
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t phenotypic_richness = 0;
};

struct RunResult {
  std::vector<DiversityRecord> records;
  Phylogeny phylogeny;
  FinalSummary final_summary;
};

/// Writes the recorded rows in the fixed time-series schema. Undefined
/// summaries come out as `nan`.
inline void write_timeseries_csv(std::ostream& os, std::span<const DiversityRecord> records) {
  os << "generation,best_fitness,mean_fitness,phenotypic_richness,phenotypic_shannon,"
        "mpd_min,mpd_max,mpd_mean,mpd_variance,ed_min,ed_max,ed_mean,ed_variance,extant_taxa\n";
  char buf[64];
  const auto put = [&](double v) {
    if (std::isnan(v)) {
      os << "nan";
    } else {
      std::snprintf(buf, sizeof(buf), "%.10g", v);
      os << buf;
    }
  };
  for (const DiversityRecord& r : records) {
    os << r.generation << ',';
    put(r.best_fitness);
    os << ',';
    put(r.mean_fitness);
    os << ',' << r.phenotypic_richness << ',';
    put(r.phenotypic_shannon);
    for (const double v : {r.pairwise_distance.min, r.pairwise_distance.max,
                           r.pairwise_distance.mean, r.pairwise_distance.variance,
                           r.distinctiveness.min, r.distinctiveness.max, r.distinctiveness.mean,
                           r.distinctiveness.variance}) {
      os << ',';
      put(v);
    }
    os << ',' << r.extant_taxa << '\n';
  }
}

inline void write_timeseries_file(const std::string& path,
                                  std::span<const DiversityRecord> records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open time-series file for writing: " + path);
  write_timeseries_csv(os, records);
  if (!os.good()) throw std::runtime_error("failed writing time-series file: " + path);
}

/// Synchronous generational evolution loop binding one problem, one selection
/// scheme, one phylogeny tracker, and the diversity metrics. Full population
/// replacement each generation, asexual reproduction, no elitism.
template <ProblemType P>
class Engine {
 public:
  struct Individual {
    typename P::genome_t genome;
    Evaluation eval;
    taxon_id taxon = 0;
  };

  Engine(P problem, const RunConfig& cfg)
      : problem_(std::move(problem)), cfg_(cfg), rng_(cfg.seed) {
    resources_.levels.assign(problem_.criteria_count(), 0.0);
    resources_.inflow_rate = cfg_.resource_inflow;
    resources_.outflow_fraction = cfg_.resource_outflow;
    sharing_params_.sigma_share = cfg_.sharing_sigma;
    sharing_params_.alpha = cfg_.sharing_alpha;
  }

  /// Seeds the population with uniform random genomes; every founder is a
  /// phylogeny root birth at generation 0.
  void initialize() {
    generation_ = 0;
    pop_.clear();
    pop_.reserve(cfg_.pop_size);
    phylogeny_ = Phylogeny();
    for (std::size_t i = 0; i < cfg_.pop_size; ++i) {
      Individual ind;
      ind.genome = problem_.random_genome(rng_);
      ind.eval = problem_.evaluate(ind.genome);
      ind.taxon = phylogeny_.record_birth(std::nullopt, ind.eval.phenotype, 0);
      pop_.push_back(std::move(ind));
    }
    initialized_ = true;
  }

  /// One generation: scheme preprocessing, pop_size parent draws with
  /// replacement, mutated offspring, then phylogeny bookkeeping (births of
  /// the new generation before deaths of the old, so parents are extant when
  /// offspring are registered).
  void step() {
    if (!initialized_) throw std::logic_error("Engine::step before initialize");
    const std::size_t n = pop_.size();
    const ScoredPopulation scored = build_scored();

    std::vector<double> effective;
    switch (cfg_.selection) {
      case SelectionKind::tournament:
        effective = scored.fitness;
        break;
      case SelectionKind::sharing:
        effective = shared_fitness(scored, sharing_params_, [&](std::size_t i, std::size_t j) {
          return problem_.sharing_distance(pop_[i].genome, pop_[i].eval, pop_[j].genome,
                                           pop_[j].eval);
        });
        break;
      case SelectionKind::ecoea:
        effective = ecoea_adjust(scored, resources_, cfg_.ecoea, rng_);
        update_resources(resources_);
        break;
      case SelectionKind::random:
      case SelectionKind::lexicase:
        break;
    }

    std::vector<std::size_t> parents(n);
    for (std::size_t i = 0; i < n; ++i) {
      switch (cfg_.selection) {
        case SelectionKind::tournament:
        case SelectionKind::sharing:
        case SelectionKind::ecoea:
          parents[i] = tournament_select(std::span<const double>(effective), cfg_.tournament_t,
                                         rng_);
          break;
        case SelectionKind::random:
          parents[i] = random_select(n, rng_);
          break;
        case SelectionKind::lexicase:
          parents[i] = lexicase_select(scored, rng_, lexicase_scratch_);
          break;
      }
    }

    ++generation_;
    std::vector<Individual> next;
    next.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Individual& parent = pop_[parents[i]];
      Individual child;
      child.genome = parent.genome;
      problem_.mutate(child.genome, rng_);
      // evaluation is pure, so an unmutated copy keeps the parent's scores
      child.eval = (child.genome == parent.genome) ? parent.eval : problem_.evaluate(child.genome);
      child.taxon = phylogeny_.record_birth(parent.taxon, child.eval.phenotype, generation_);
      next.push_back(std::move(child));
    }
    for (const Individual& old : pop_) {
      phylogeny_.record_death(old.taxon, generation_);
    }
    pop_ = std::move(next);
  }

  DiversityRecord make_record() const {
    DiversityRecord rec;
    rec.generation = generation_;
    rec.best_fitness = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::vector<std::string_view> keys;
    keys.reserve(pop_.size());
    for (const Individual& ind : pop_) {
      rec.best_fitness = std::max(rec.best_fitness, ind.eval.fitness);
      sum += ind.eval.fitness;
      keys.push_back(ind.eval.phenotype);
    }
    rec.mean_fitness = sum / static_cast<double>(pop_.size());
    rec.phenotypic_richness = phenotypic_richness(keys);
    rec.phenotypic_shannon = phenotypic_shannon(keys);
    rec.pairwise_distance = summarize_pairwise(phylogeny_);
    rec.distinctiveness = summarize_distinctiveness(phylogeny_, generation_);
    rec.extant_taxa = phylogeny_.extant_count();
    return rec;
  }

  /// Full run: records at generation 0, every record_interval generations,
  /// and at the final generation.
  RunResult run() {
    initialize();
    RunResult result;
    result.records.push_back(make_record());
    for (std::uint64_t g = 1; g <= cfg_.generations; ++g) {
      step();
      if (g % cfg_.record_interval == 0 || g == cfg_.generations) {
        result.records.push_back(make_record());
      }
    }
    FinalSummary& fs = result.final_summary;
    fs.best_fitness = result.records.back().best_fitness;
    fs.mean_fitness = result.records.back().mean_fitness;
    fs.phenotypic_richness = result.records.back().phenotypic_richness;
    result.phylogeny = std::move(phylogeny_);
    phylogeny_ = Phylogeny();
    initialized_ = false;
    return result;
  }

  std::uint64_t generation() const { return generation_; }
  const std::vector<Individual>& population() const { return pop_; }
  const Phylogeny& phylogeny() const { return phylogeny_; }
  const P& problem() const { return problem_; }
  const ResourcePool& resources() const { return resources_; }

 private:
  ScoredPopulation build_scored() const {
    ScoredPopulation scored;
    scored.fitness.reserve(pop_.size());
    scored.criteria_cols = problem_.criteria_count();
    scored.criteria.reserve(pop_.size() * scored.criteria_cols);
    scored.phenotype_keys.reserve(pop_.size());
    for (const Individual& ind : pop_) {
      scored.fitness.push_back(ind.eval.fitness);
      scored.criteria.insert(scored.criteria.end(), ind.eval.criteria.begin(),
                             ind.eval.criteria.end());
      scored.phenotype_keys.push_back(ind.eval.phenotype);
    }
    return scored;
  }

  P problem_;
  RunConfig cfg_;
  Random rng_;
  Phylogeny phylogeny_;
  std::vector<Individual> pop_;
  ResourcePool resources_;
  FitnessSharingParams sharing_params_;
  LexicaseScratch lexicase_scratch_;
  std::uint64_t generation_ = 0;
  bool initialized_ = false;
};

/// Runs one experiment per the config, dispatching on the problem kind, and
/// writes the time-series CSV and phylogeny snapshot when paths are set.
inline RunResult run_experiment(const RunConfig& cfg) {
  RunResult result;
  switch (cfg.problem) {
    case ProblemKind::exploration: {
      Engine<ExplorationDiagnostic> engine(
          ExplorationDiagnostic(cfg.genome_length, cfg.value_min, cfg.value_max,
                                cfg.mutation_rate, cfg.mutation_sd),
          cfg);
      result = engine.run();
      break;
    }
    case ProblemKind::nk: {
      Engine<NkProblem> engine(NkProblem(nk_generate(cfg.nk_n, cfg.nk_k, cfg.seed),
                                         cfg.bitflip_rate),
                               cfg);
      result = engine.run();
      break;
    }
    case ProblemKind::sortnet: {
      Random setup_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
      Engine<SortingNetworkProblem> engine(
          SortingNetworkProblem(cfg.sortnet_cases, static_cast<int>(cfg.sortnet_values),
                                cfg.sortnet_max_comparators, setup_rng),
          cfg);
      result = engine.run();
      break;
    }
  }
  if (!cfg.timeseries_path.empty()) {
    write_timeseries_file(cfg.timeseries_path, result.records);
  }
  if (!cfg.snapshot_path.empty()) {
    result.phylogeny.write_snapshot_file(cfg.snapshot_path);
  }
  return result;
}

}  // namespace phylodiv
