#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "phylodiv/random.hpp"

namespace phylodiv {

/// Population view handed to the selection schemes: scalar fitness plus the
/// per-criterion score matrix used by lexicase and resource-mediated
/// selection. phenotype_keys view into the owning population and stay valid
/// for the duration of one selection round.
struct ScoredPopulation {
  std::vector<double> fitness;
  std::size_t criteria_cols = 0;
  std::vector<double> criteria;  ///< row-major, size() x criteria_cols
  std::vector<std::string_view> phenotype_keys;

  std::size_t size() const { return fitness.size(); }

  std::span<const double> criteria_row(std::size_t i) const {
    return std::span<const double>(criteria).subspan(i * criteria_cols, criteria_cols);
  }
};

struct FitnessSharingParams {
  double sigma_share = 2.0;  ///< niche width
  double alpha = 1.0;        ///< sharing function shape
};

struct EcoEaParams {
  double consumption_fraction = 1.0;  ///< C_f, fraction of the pool consumable
  double alpha = 0.25;                ///< score exponent
  double cost = 1.0;                  ///< penalty for over-demanding a resource
  double max_bonus = 5.0;             ///< per-sub-task exponent cap
};

/// Per-sub-task resource levels with constant-rate inflow and proportional
/// outflow, applied once per generation after consumption.
struct ResourcePool {
  std::vector<double> levels;
  double inflow_rate = 0.0;
  double outflow_fraction = 0.0;
};

/// Tournament selection: T contestants sampled uniformly with replacement,
/// the fittest sampled slot wins, ties among sampled slots broken uniformly.
/// Consumes exactly T index draws, plus one more when several slots tie.
inline std::size_t tournament_select(std::span<const double> fitness, std::size_t tournament_size,
                                     Random& rng) {
  if (fitness.empty()) throw std::invalid_argument("tournament_select: empty population");
  if (tournament_size == 0) throw std::invalid_argument("tournament_select: T must be >= 1");
  std::vector<std::size_t> sampled(tournament_size);
  for (auto& s : sampled) s = static_cast<std::size_t>(rng.index(fitness.size()));
  double best = -std::numeric_limits<double>::infinity();
  std::size_t ties = 0;
  for (const std::size_t s : sampled) {
    if (fitness[s] > best) {
      best = fitness[s];
      ties = 1;
    } else if (fitness[s] == best) {
      ++ties;
    }
  }
  std::size_t pick = ties > 1 ? static_cast<std::size_t>(rng.index(ties)) : 0;
  for (const std::size_t s : sampled) {
    if (fitness[s] == best) {
      if (pick == 0) return s;
      --pick;
    }
  }
  return sampled.back();  // unreachable
}

inline std::size_t tournament_select(const ScoredPopulation& pop, std::size_t tournament_size,
                                     Random& rng) {
  return tournament_select(std::span<const double>(pop.fitness), tournament_size, rng);
}

/// Control scheme: uniform over the population, fitness ignored.
inline std::size_t random_select(std::size_t population_size, Random& rng) {
  if (population_size == 0) throw std::invalid_argument("random_select: empty population");
  return static_cast<std::size_t>(rng.index(population_size));
}

inline std::size_t random_select(const ScoredPopulation& pop, Random& rng) {
  return random_select(pop.size(), rng);
}

/// Goldberg-Richardson shared fitness: f_i' = f_i / sum_j sh(d_ij) with
/// sh(d) = 1 - (d / sigma)^alpha for d < sigma, 0 beyond the niche. The self
/// term sh(0) = 1 is always included, so the niche count is at least one.
/// `distance(i, j)` must be a nonnegative phenotype distance.
template <typename DistanceFn>
inline std::vector<double> shared_fitness(const ScoredPopulation& pop,
                                          const FitnessSharingParams& params,
                                          DistanceFn&& distance) {
  if (params.sigma_share <= 0.0) {
    throw std::invalid_argument("shared_fitness: sigma_share must be positive");
  }
  const std::size_t n = pop.size();
  std::vector<double> niche(n, 1.0);  // self term
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(i, j);
      if (d < 0.0) throw std::invalid_argument("shared_fitness: negative distance");
      if (d < params.sigma_share) {
        const double sh = 1.0 - std::pow(d / params.sigma_share, params.alpha);
        niche[i] += sh;
        niche[j] += sh;
      }
    }
  }
  std::vector<double> shared(n);
  for (std::size_t i = 0; i < n; ++i) shared[i] = pop.fitness[i] / niche[i];
  return shared;
}

struct LexicaseScratch {
  std::vector<std::size_t> order;
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> survivors;
};

/// Lexicase selection: criteria shuffled, candidates filtered to the exact
/// best on each criterion in turn until one remains or criteria run out.
inline std::size_t lexicase_select(const ScoredPopulation& pop, Random& rng,
                                   LexicaseScratch& scratch) {
  if (pop.size() == 0) throw std::invalid_argument("lexicase_select: empty population");
  if (pop.criteria_cols == 0) {
    throw std::invalid_argument("lexicase_select: at least one criterion required");
  }
  scratch.order.resize(pop.criteria_cols);
  std::iota(scratch.order.begin(), scratch.order.end(), std::size_t{0});
  rng.shuffle(scratch.order);

  scratch.candidates.resize(pop.size());
  std::iota(scratch.candidates.begin(), scratch.candidates.end(), std::size_t{0});

  for (const std::size_t crit : scratch.order) {
    if (scratch.candidates.size() == 1) break;
    double best = -std::numeric_limits<double>::infinity();
    for (const std::size_t c : scratch.candidates) {
      best = std::max(best, pop.criteria[c * pop.criteria_cols + crit]);
    }
    scratch.survivors.clear();
    for (const std::size_t c : scratch.candidates) {
      if (pop.criteria[c * pop.criteria_cols + crit] == best) scratch.survivors.push_back(c);
    }
    scratch.candidates.swap(scratch.survivors);
  }
  return scratch.candidates[rng.index(scratch.candidates.size())];
}

inline std::size_t lexicase_select(const ScoredPopulation& pop, Random& rng) {
  LexicaseScratch scratch;
  return lexicase_select(pop, rng, scratch);
}

/// Resource-mediated fitness adjustment. Individuals are processed in a
/// uniformly shuffled order; each sub-task score earns an exponent of
/// min(score^alpha * C_f * level, max_bonus) while consuming that demand from
/// the pool (capped so levels stay nonnegative). Demanding more than the pool
/// holds costs `cost` off the individual's accumulated exponent, floored at
/// zero, and the total fitness is base * 2^exponent.
inline std::vector<double> ecoea_adjust(const ScoredPopulation& pop, ResourcePool& resources,
                                        const EcoEaParams& params, Random& rng) {
  if (pop.criteria_cols != resources.levels.size()) {
    throw std::invalid_argument("ecoea_adjust: resource count != criteria count");
  }
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  std::vector<double> total(pop.size());
  for (const std::size_t i : order) {
    const auto row = pop.criteria_row(i);
    double exponent = 0.0;
    for (std::size_t s = 0; s < row.size(); ++s) {
      const double score = row[s];
      if (score < 0.0) throw std::invalid_argument("ecoea_adjust: negative sub-task score");
      double& level = resources.levels[s];
      const double demand = std::pow(score, params.alpha) * params.consumption_fraction * level;
      exponent += std::min(demand, params.max_bonus);
      if (demand > level) {
        exponent -= params.cost;
        level = 0.0;
      } else {
        level -= demand;
      }
    }
    total[i] = pop.fitness[i] * std::exp2(std::max(exponent, 0.0));
  }
  return total;
}

/// Per-generation resource flow: level <- (level + inflow) * (1 - outflow).
inline void update_resources(ResourcePool& resources) {
  for (double& level : resources.levels) {
    level = (level + resources.inflow_rate) * (1.0 - resources.outflow_fraction);
  }
}

}  // namespace phylodiv
