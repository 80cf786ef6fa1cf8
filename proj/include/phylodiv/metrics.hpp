#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phylodiv/phylogeny.hpp"

namespace phylodiv {

/// Min/max/mean/population-variance summary. All fields are NaN when the
/// summary is undefined (e.g. pairwise distances with fewer than two extant
/// taxa).
struct SummaryStats {
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double mean = std::numeric_limits<double>::quiet_NaN();
  double variance = std::numeric_limits<double>::quiet_NaN();

  bool defined() const { return !std::isnan(mean); }
};

/// Per-generation diversity row, one per recorded generation.
struct DiversityRecord {
  std::uint64_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t phenotypic_richness = 0;
  double phenotypic_shannon = 0.0;
  SummaryStats pairwise_distance;
  SummaryStats distinctiveness;
  std::size_t extant_taxa = 0;
};

/// Number of distinct phenotype signatures in the population.
inline std::size_t phenotypic_richness(std::span<const std::string_view> phenotypes) {
  if (phenotypes.empty()) {
    throw std::invalid_argument("phenotypic_richness: empty population");
  }
  std::map<std::string_view, std::size_t> counts;
  for (const auto p : phenotypes) ++counts[p];
  return counts.size();
}

/// Shannon entropy (natural log) of the phenotype frequency distribution.
inline double phenotypic_shannon(std::span<const std::string_view> phenotypes) {
  if (phenotypes.empty()) {
    throw std::invalid_argument("phenotypic_shannon: empty population");
  }
  std::map<std::string_view, std::size_t> counts;
  for (const auto p : phenotypes) ++counts[p];
  const double n = static_cast<double>(phenotypes.size());
  double h = 0.0;
  for (const auto& [sig, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

namespace detail {

/// Distance distribution moments from a tree node to the extant taxa in its
/// subtree. Enough to combine min/max/mean/variance of all pairwise path
/// lengths without materializing the distances.
struct DistanceMoments {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;

  void add_edge() {
    if (count == 0) return;
    sum_sq += 2.0 * sum + static_cast<double>(count);
    sum += static_cast<double>(count);
    ++min;
    ++max;
  }

  void merge(const DistanceMoments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    min = std::min(min, o.min);
    max = std::max(max, o.max);
    count += o.count;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
};

struct PairAccumulator {
  std::uint64_t pairs = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t min = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t max = 0;

  /// Accounts for every pair with one endpoint counted in `a` and the other
  /// in `b`; the path of each such pair is the concatenation of the two
  /// recorded distances.
  void cross(const DistanceMoments& a, const DistanceMoments& b) {
    if (a.count == 0 || b.count == 0) return;
    const double ca = static_cast<double>(a.count);
    const double cb = static_cast<double>(b.count);
    pairs += a.count * b.count;
    sum += ca * b.sum + cb * a.sum;
    sum_sq += ca * b.sum_sq + cb * a.sum_sq + 2.0 * a.sum * b.sum;
    min = std::min(min, a.min + b.min);
    max = std::max(max, a.max + b.max);
  }

  SummaryStats stats() const {
    SummaryStats s;
    if (pairs == 0) return s;
    const double n = static_cast<double>(pairs);
    s.min = static_cast<double>(min);
    s.max = static_cast<double>(max);
    s.mean = sum / n;
    s.variance = std::max(sum_sq / n - s.mean * s.mean, 0.0);
    return s;
  }
};

}  // namespace detail

/// Summary of unweighted path lengths between all unordered pairs of distinct
/// extant taxa. When the forest has several roots they are joined through a
/// virtual shared root, so a cross-root pair is depth(a) + depth(b) + 2.
/// Fewer than two extant taxa yields the undefined (NaN) summary.
///
/// Single pass over the retained tree: each pair is accounted at the node
/// where its two endpoints' root paths meet.
inline SummaryStats summarize_pairwise(const Phylogeny& tree) {
  if (tree.extant_count() < 2) return {};

  struct Frame {
    taxon_id id;
    std::size_t next_child = 0;
    detail::DistanceMoments agg;
  };

  detail::PairAccumulator acc;
  detail::DistanceMoments forest;  // roots joined via the virtual shared root
  std::vector<Frame> stack;

  for (const taxon_id root : tree.roots()) {
    stack.push_back({root, 0, {}});
    if (tree.taxon(root).extant()) stack.back().agg = {1, 0.0, 0.0, 0, 0};
    while (!stack.empty()) {
      Frame& frame = stack.back();
      const Taxon& t = tree.taxon(frame.id);
      if (frame.next_child < t.children.size()) {
        const taxon_id child = t.children[frame.next_child++];
        stack.push_back({child, 0, {}});
        if (tree.taxon(child).extant()) stack.back().agg = {1, 0.0, 0.0, 0, 0};
        continue;
      }
      detail::DistanceMoments done = frame.agg;
      stack.pop_back();
      if (!stack.empty()) {
        done.add_edge();
        acc.cross(stack.back().agg, done);
        stack.back().agg.merge(done);
      } else {
        done.add_edge();  // edge from the virtual root
        acc.cross(forest, done);
        forest.merge(done);
      }
    }
  }
  return acc.stats();
}

/// Evolutionary distinctiveness of every extant taxon, in one downward pass.
/// See Phylogeny::evolutionary_distinctiveness for the branch-age model;
/// this computes identical scores for all extant taxa in O(tree size).
inline std::vector<std::pair<taxon_id, double>> distinctiveness_scores(const Phylogeny& tree,
                                                                       std::uint64_t at_time) {
  if (at_time < tree.current_time()) {
    throw std::invalid_argument("distinctiveness_scores: at_time precedes the last event");
  }
  const auto counts = tree.extant_below_counts();
  std::vector<std::pair<taxon_id, double>> scores;
  scores.reserve(tree.extant_count());

  struct Entry {
    taxon_id id;
    double acc;  // share of all segments above this taxon's own branch
  };
  std::vector<Entry> stack;
  for (const taxon_id root : tree.roots()) stack.push_back({root, 0.0});

  struct Attachment {
    std::uint64_t time;
    taxon_id child;
    std::uint64_t led;  // extant taxa reached through this attachment
    bool is_self;
  };
  std::vector<Attachment> attach;
  while (!stack.empty()) {
    const Entry entry = stack.back();
    stack.pop_back();
    const Taxon& t = tree.taxon(entry.id);

    // Attachments on t's branch: children at their origins, plus t itself at
    // at_time when extant (a zero-age pendant marking its living lineage).
    attach.clear();
    for (const taxon_id c : t.children) {
      attach.push_back({tree.taxon(c).origin_time, c, counts.at(c), false});
    }
    if (t.extant()) attach.push_back({at_time, 0, 1, true});
    if (!std::is_sorted(attach.begin(), attach.end(),
                        [](const auto& a, const auto& b) { return a.time < b.time; })) {
      std::stable_sort(attach.begin(), attach.end(),
                       [](const auto& a, const auto& b) { return a.time < b.time; });
    }
    std::uint64_t remaining = 0;
    for (const auto& a : attach) remaining += a.led;

    double running = entry.acc;
    std::uint64_t prev = t.origin_time;
    std::size_t i = 0;
    while (i < attach.size()) {
      const std::uint64_t tm = attach[i].time;
      running += static_cast<double>(tm - prev) / static_cast<double>(remaining);
      std::uint64_t group = 0;
      std::size_t j = i;
      while (j < attach.size() && attach[j].time == tm) {
        if (attach[j].is_self) {
          scores.emplace_back(t.id, running);
        } else {
          stack.push_back({attach[j].child, running});
        }
        group += attach[j].led;
        ++j;
      }
      remaining -= group;
      prev = tm;
      i = j;
    }
  }
  return scores;
}

/// Summary of evolutionary distinctiveness over all extant taxa.
inline SummaryStats summarize_distinctiveness(const Phylogeny& tree, std::uint64_t at_time) {
  if (tree.extant_count() == 0) {
    throw std::invalid_argument("summarize_distinctiveness: no extant taxa");
  }
  const auto scores = distinctiveness_scores(tree, at_time);
  SummaryStats s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& [id, ed] : scores) {
    s.min = std::min(s.min, ed);
    s.max = std::max(s.max, ed);
    sum += ed;
  }
  const double n = static_cast<double>(scores.size());
  s.mean = sum / n;
  double ss = 0.0;
  for (const auto& [id, ed] : scores) ss += (ed - s.mean) * (ed - s.mean);
  s.variance = ss / n;
  return s;
}

}  // namespace phylodiv
