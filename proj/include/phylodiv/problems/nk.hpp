#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "phylodiv/evaluation.hpp"
#include "phylodiv/random.hpp"

namespace phylodiv {

using bitstring_genome = std::vector<std::uint8_t>;  // entries 0/1

/// NK fitness landscape: per-site lookup tables over the site's bit and its K
/// right neighbors (wrapping), 2^(K+1) entries each.
struct NkLandscape {
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> tables;
};

/// Deterministic landscape generation: entries i.i.d. uniform in [0, 1).
inline NkLandscape nk_generate(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k >= n) throw std::invalid_argument("nk_generate: K must be smaller than N");
  NkLandscape land;
  land.n = n;
  land.k = k;
  land.seed = seed;
  Random rng(seed);
  const std::size_t entries = std::size_t{1} << (k + 1);
  land.tables.resize(n);
  for (auto& table : land.tables) {
    table.resize(entries);
    for (double& v : table) v = rng.uniform();
  }
  return land;
}

/// Site i looks up the pattern formed by bits i..i+K (mod N), bit i most
/// significant. Fitness is the sum of the per-site contributions, which also
/// serve as the selection criteria.
inline Evaluation nk_eval(const NkLandscape& land, const bitstring_genome& genome) {
  if (genome.size() != land.n) {
    throw std::invalid_argument("nk_eval: genome length != landscape N");
  }
  Evaluation eval;
  eval.criteria.resize(land.n);
  for (std::size_t i = 0; i < land.n; ++i) {
    std::size_t pattern = 0;
    for (std::size_t j = 0; j <= land.k; ++j) {
      pattern = (pattern << 1) | genome[(i + j) % land.n];
    }
    eval.criteria[i] = land.tables[i][pattern];
    eval.fitness += eval.criteria[i];
  }
  eval.phenotype = render_signature(eval.criteria);
  return eval;
}

/// Independent per-bit flips.
inline void mutate_bitstring(bitstring_genome& genome, Random& rng, double rate = 0.01) {
  for (auto& b : genome) {
    if (rng.chance(rate)) b ^= 1;
  }
}

/// Engine adapter for NK landscapes.
class NkProblem {
 public:
  using genome_t = bitstring_genome;

  explicit NkProblem(NkLandscape landscape, double bitflip_rate = 0.01)
      : land_(std::move(landscape)), rate_(bitflip_rate) {}

  genome_t random_genome(Random& rng) const {
    genome_t g(land_.n);
    for (auto& b : g) b = static_cast<std::uint8_t>(rng.index(2));
    return g;
  }

  Evaluation evaluate(const genome_t& genome) const { return nk_eval(land_, genome); }

  void mutate(genome_t& genome, Random& rng) const { mutate_bitstring(genome, rng, rate_); }

  // Hamming distance between bitstrings.
  double sharing_distance(const genome_t& ga, const Evaluation&, const genome_t& gb,
                          const Evaluation&) const {
    std::size_t d = 0;
    for (std::size_t i = 0; i < ga.size(); ++i) d += ga[i] != gb[i];
    return static_cast<double>(d);
  }

  std::size_t criteria_count() const { return land_.n; }
  const NkLandscape& landscape() const { return land_; }

 private:
  NkLandscape land_;
  double rate_;
};

}  // namespace phylodiv
