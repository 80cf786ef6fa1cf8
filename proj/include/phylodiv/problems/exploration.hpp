#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "phylodiv/evaluation.hpp"
#include "phylodiv/random.hpp"

namespace phylodiv {

using real_vector_genome = std::vector<double>;

/// Exploration diagnostic evaluation. The active region starts at the first
/// position holding the genome's maximum and extends while values are
/// non-increasing; active sites contribute their value as their criterion,
/// all other sites score zero.
inline Evaluation exploration_eval(const real_vector_genome& genome) {
  if (genome.empty()) throw std::invalid_argument("exploration_eval: empty genome");
  std::size_t start = 0;
  for (std::size_t i = 1; i < genome.size(); ++i) {
    if (genome[i] > genome[start]) start = i;
  }
  Evaluation eval;
  eval.criteria.assign(genome.size(), 0.0);
  eval.criteria[start] = genome[start];
  eval.fitness = genome[start];
  for (std::size_t i = start + 1; i < genome.size() && genome[i] <= genome[i - 1]; ++i) {
    eval.criteria[i] = genome[i];
    eval.fitness += genome[i];
  }
  eval.phenotype = render_signature(eval.criteria);
  return eval;
}

/// Per-position mutation: with probability `rate`, add a normal deviate and
/// clamp back into [lo, hi].
inline void mutate_real_vector(real_vector_genome& genome, Random& rng, double rate = 0.007,
                               double sd = 1.0, double lo = 0.0, double hi = 25.0) {
  for (double& v : genome) {
    if (rng.chance(rate)) v = std::clamp(v + rng.normal(0.0, sd), lo, hi);
  }
}

/// Engine adapter for the exploration diagnostic.
class ExplorationDiagnostic {
 public:
  using genome_t = real_vector_genome;

  explicit ExplorationDiagnostic(std::size_t length = 50, double lo = 0.0, double hi = 25.0,
                                 double mutation_rate = 0.007, double mutation_sd = 1.0)
      : length_(length), lo_(lo), hi_(hi), rate_(mutation_rate), sd_(mutation_sd) {
    if (length_ == 0) throw std::invalid_argument("ExplorationDiagnostic: zero genome length");
    if (hi_ <= lo_) throw std::invalid_argument("ExplorationDiagnostic: bad value range");
  }

  genome_t random_genome(Random& rng) const {
    genome_t g(length_);
    for (double& v : g) v = rng.uniform(lo_, hi_);
    return g;
  }

  Evaluation evaluate(const genome_t& genome) const { return exploration_eval(genome); }

  void mutate(genome_t& genome, Random& rng) const {
    mutate_real_vector(genome, rng, rate_, sd_, lo_, hi_);
  }

  // Euclidean distance between criteria vectors.
  double sharing_distance(const genome_t&, const Evaluation& a, const genome_t&,
                          const Evaluation& b) const {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.criteria.size(); ++i) {
      const double d = a.criteria[i] - b.criteria[i];
      ss += d * d;
    }
    return std::sqrt(ss);
  }

  std::size_t criteria_count() const { return length_; }

 private:
  std::size_t length_;
  double lo_, hi_, rate_, sd_;
};

}  // namespace phylodiv
