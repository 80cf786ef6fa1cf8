#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phylodiv/evaluation.hpp"
#include "phylodiv/random.hpp"

namespace phylodiv {

struct Comparator {
  int a = 0;
  int b = 0;
  bool operator==(const Comparator&) const = default;
};

using comparator_network_genome = std::vector<Comparator>;

struct SortnetMutationRates {
  double insert = 0.0005;
  double duplicate = 0.0005;
  double remove = 0.001;
  double swap = 0.001;
  double substitute = 0.001;
};

/// Applies the network to each test case (comparing two positions puts the
/// smaller value at the lower index) and scores one criterion per case: 1 if
/// the case ends fully sorted ascending, else 0. When every case passes, a
/// bonus of (cap - comparator_count) / cap rewards shorter networks.
inline Evaluation sortnet_eval(const comparator_network_genome& network,
                               const std::vector<std::vector<int>>& test_cases,
                               std::size_t max_comparators = 128) {
  Evaluation eval;
  eval.criteria.resize(test_cases.size());
  std::vector<int> work;
  std::size_t passed = 0;
  for (std::size_t c = 0; c < test_cases.size(); ++c) {
    work = test_cases[c];
    for (const Comparator& cmp : network) {
      if (cmp.a < 0 || cmp.b < 0 || static_cast<std::size_t>(cmp.a) >= work.size() ||
          static_cast<std::size_t>(cmp.b) >= work.size()) {
        throw std::invalid_argument("sortnet_eval: comparator index out of range");
      }
      const std::size_t lo = static_cast<std::size_t>(std::min(cmp.a, cmp.b));
      const std::size_t hi = static_cast<std::size_t>(std::max(cmp.a, cmp.b));
      if (work[lo] > work[hi]) std::swap(work[lo], work[hi]);
    }
    const bool sorted = std::is_sorted(work.begin(), work.end());
    eval.criteria[c] = sorted ? 1.0 : 0.0;
    passed += sorted;
  }
  eval.fitness = static_cast<double>(passed);
  if (passed == test_cases.size() && !test_cases.empty() && network.size() <= max_comparators) {
    eval.fitness += static_cast<double>(max_comparators - network.size()) /
                    static_cast<double>(max_comparators);
  }
  std::string sig;
  sig.reserve(test_cases.size() + 8);
  for (const double v : eval.criteria) sig.push_back(v > 0.0 ? '1' : '0');
  sig.push_back('#');
  sig += std::to_string(network.size());
  eval.phenotype = std::move(sig);
  return eval;
}

/// Per-comparator-position mutation classes, applied in order: insertion,
/// duplication, deletion, pair swap, index substitution. Insertions and
/// duplications are rejected at the length cap; deletions are rejected when
/// they would empty the network.
inline void mutate_network(comparator_network_genome& network, Random& rng,
                           const SortnetMutationRates& rates = {}, std::size_t max_len = 128,
                           int width = 30) {
  const auto random_comparator = [&rng, width]() {
    return Comparator{static_cast<int>(rng.index(static_cast<std::uint64_t>(width))),
                      static_cast<int>(rng.index(static_cast<std::uint64_t>(width)))};
  };

  comparator_network_genome next = network;

  // insertions: a new random comparator may appear before each position
  {
    comparator_network_genome out;
    out.reserve(next.size() + 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (rng.chance(rates.insert) && out.size() + (next.size() - i) < max_len) {
        out.push_back(random_comparator());
      }
      out.push_back(next[i]);
    }
    next.swap(out);
  }

  // duplications: each comparator may repeat immediately after itself
  {
    comparator_network_genome out;
    out.reserve(next.size() + 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      out.push_back(next[i]);
      if (rng.chance(rates.duplicate) && out.size() + (next.size() - i - 1) < max_len) {
        out.push_back(next[i]);
      }
    }
    next.swap(out);
  }

  // deletions, never below one comparator
  {
    comparator_network_genome out;
    out.reserve(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      const std::size_t remaining = next.size() - i - 1;
      if (rng.chance(rates.remove) && out.size() + remaining >= 1) continue;
      out.push_back(next[i]);
    }
    next.swap(out);
  }

  // swaps with a uniformly chosen partner position
  for (std::size_t i = 0; i < next.size(); ++i) {
    if (rng.chance(rates.swap)) {
      const std::size_t j = static_cast<std::size_t>(rng.index(next.size()));
      std::swap(next[i], next[j]);
    }
  }

  // index substitutions: one side of the comparator is redrawn
  for (Comparator& cmp : next) {
    if (rng.chance(rates.substitute)) {
      const int fresh = static_cast<int>(rng.index(static_cast<std::uint64_t>(width)));
      if (rng.index(2) == 0) {
        cmp.a = fresh;
      } else {
        cmp.b = fresh;
      }
    }
  }

  network.swap(next);
}

/// Engine adapter for sorting-network evolution. Test cases are uniform
/// random permutations of 0..width-1, generated once per run.
class SortingNetworkProblem {
 public:
  using genome_t = comparator_network_genome;

  SortingNetworkProblem(std::size_t num_cases, int width, std::size_t max_comparators,
                        Random& rng, SortnetMutationRates rates = {})
      : width_(width), max_comparators_(max_comparators), rates_(rates) {
    if (width_ < 2) throw std::invalid_argument("SortingNetworkProblem: width must be >= 2");
    if (max_comparators_ == 0) {
      throw std::invalid_argument("SortingNetworkProblem: comparator cap must be >= 1");
    }
    cases_.resize(num_cases);
    for (auto& tc : cases_) {
      tc.resize(static_cast<std::size_t>(width_));
      std::iota(tc.begin(), tc.end(), 0);
      rng.shuffle(tc);
    }
  }

  genome_t random_genome(Random& rng) const {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.index(max_comparators_));
    genome_t g(len);
    for (Comparator& cmp : g) {
      cmp.a = static_cast<int>(rng.index(static_cast<std::uint64_t>(width_)));
      cmp.b = static_cast<int>(rng.index(static_cast<std::uint64_t>(width_)));
    }
    return g;
  }

  Evaluation evaluate(const genome_t& genome) const {
    return sortnet_eval(genome, cases_, max_comparators_);
  }

  void mutate(genome_t& genome, Random& rng) const {
    mutate_network(genome, rng, rates_, max_comparators_, width_);
  }

  // Euclidean distance between pass/fail vectors.
  double sharing_distance(const genome_t&, const Evaluation& a, const genome_t&,
                          const Evaluation& b) const {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.criteria.size(); ++i) {
      const double d = a.criteria[i] - b.criteria[i];
      ss += d * d;
    }
    return std::sqrt(ss);
  }

  std::size_t criteria_count() const { return cases_.size(); }
  const std::vector<std::vector<int>>& test_cases() const { return cases_; }

 private:
  int width_;
  std::size_t max_comparators_;
  SortnetMutationRates rates_;
  std::vector<std::vector<int>> cases_;
};

}  // namespace phylodiv
