#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phylodiv {

using taxon_id = std::uint64_t;

/// One taxonomically unique phenotype: a phenotype with a unique evolutionary
/// origin. Two lineages that independently arrive at the same phenotype are
/// distinct taxa.
struct Taxon {
  taxon_id id = 0;
  std::optional<taxon_id> parent;
  std::string phenotype;
  std::uint64_t origin_time = 0;
  std::optional<std::uint64_t> extinction_time;  ///< unset while extant
  std::uint32_t living_count = 0;
  std::vector<taxon_id> children;  ///< retained children, in birth order

  bool extant() const { return living_count > 0; }
};

/// Online ancestry tree of taxa. Lineages with no extant descendants are
/// pruned as soon as they die out, so every retained taxon is either extant
/// or ancestral to an extant taxon.
///
/// Single writer per run; const queries may run concurrently between
/// mutations.
class Phylogeny {
 public:
  /// Registers one organism birth. If the offspring phenotype matches the
  /// parent taxon's, the organism joins the parent taxon; otherwise a new
  /// taxon is created below it. A birth with no parent founds a new root
  /// taxon (always a new taxon, even if the phenotype already exists
  /// elsewhere: same phenotype, separate origin).
  taxon_id record_birth(std::optional<taxon_id> parent, std::string_view phenotype,
                        std::uint64_t time) {
    if (time > current_time_) current_time_ = time;
    if (parent) {
      auto it = taxa_.find(*parent);
      if (it == taxa_.end()) {
        throw std::invalid_argument("record_birth: unknown parent taxon " +
                                    std::to_string(*parent));
      }
      Taxon& par = it->second;
      if (!par.extant()) {
        throw std::invalid_argument("record_birth: parent taxon " + std::to_string(*parent) +
                                    " is not extant");
      }
      if (time < par.origin_time) {
        throw std::invalid_argument("record_birth: birth precedes parent origin time");
      }
      if (par.phenotype == phenotype) {
        ++par.living_count;
        return par.id;
      }
      const taxon_id id = next_id_++;
      Taxon child;
      child.id = id;
      child.parent = parent;
      child.phenotype = std::string(phenotype);
      child.origin_time = time;
      child.living_count = 1;
      par.children.push_back(id);
      taxa_.emplace(id, std::move(child));
      ++extant_count_;
      return id;
    }
    const taxon_id id = next_id_++;
    Taxon root;
    root.id = id;
    root.phenotype = std::string(phenotype);
    root.origin_time = time;
    root.living_count = 1;
    taxa_.emplace(id, std::move(root));
    roots_.push_back(id);
    ++extant_count_;
    return id;
  }

  /// Registers one organism death. When a taxon's last organism dies its
  /// extinction time is set; taxa left with neither living organisms nor
  /// retained children are pruned, cascading rootward.
  void record_death(taxon_id id, std::uint64_t time) {
    if (time > current_time_) current_time_ = time;
    auto it = taxa_.find(id);
    if (it == taxa_.end()) {
      throw std::invalid_argument("record_death: unknown taxon " + std::to_string(id));
    }
    Taxon& t = it->second;
    if (t.living_count == 0) {
      throw std::invalid_argument("record_death: taxon " + std::to_string(id) +
                                  " has no living organisms");
    }
    --t.living_count;
    if (t.living_count > 0) return;
    t.extinction_time = time;
    --extant_count_;

    taxon_id cur = id;
    while (true) {
      Taxon& node = taxa_.at(cur);
      if (node.extant() || !node.children.empty()) break;
      const std::optional<taxon_id> parent = node.parent;
      if (parent) {
        std::erase(taxa_.at(*parent).children, cur);
      } else {
        std::erase(roots_, cur);
      }
      taxa_.erase(cur);
      if (!parent) break;
      cur = *parent;
    }
  }

  /// Edge count of the unique path between two retained taxa. Throws if the
  /// taxa lie in different rooted trees of the forest.
  std::uint64_t pairwise_distance(taxon_id a, taxon_id b) const {
    return walk_to_mrca(a, b).distance;
  }

  /// Deepest taxon ancestral to (or equal to) both arguments.
  taxon_id mrca(taxon_id a, taxon_id b) const { return walk_to_mrca(a, b).ancestor; }

  /// Fair-proportion evolutionary distinctiveness of an extant taxon.
  ///
  /// Each taxon's lifetime is a branch running from its origin to the origin
  /// of its latest retained child (or to at_time if it is extant). Child
  /// origins subdivide that branch into segments; each segment's age is
  /// divided by the number of extant taxa reachable through attachment
  /// points at or after the segment's upper end. An extant taxon counts as a
  /// zero-age attachment at at_time on its own branch. The score of an
  /// extant taxon is the sum of the shares of every segment between it and
  /// its root, so the scores of all extant taxa always sum to the total
  /// branch age of the retained tree.
  double evolutionary_distinctiveness(taxon_id id, std::uint64_t at_time) const {
    const Taxon& tax = taxon(id);
    if (!tax.extant()) {
      throw std::invalid_argument("evolutionary_distinctiveness: taxon " + std::to_string(id) +
                                  " is not extant");
    }
    if (at_time < current_time_) {
      throw std::invalid_argument(
          "evolutionary_distinctiveness: at_time precedes the last recorded event");
    }
    const auto counts = extant_below_counts();
    double total = timeline_share(tax, at_time, at_time, counts);
    const Taxon* child = &tax;
    while (child->parent) {
      const Taxon& par = taxa_.at(*child->parent);
      total += timeline_share(par, at_time, child->origin_time, counts);
      child = &par;
    }
    return total;
  }

  /// Number of extant taxa in the subtree rooted at each retained taxon
  /// (the taxon itself included when extant).
  std::unordered_map<taxon_id, std::uint64_t> extant_below_counts() const {
    std::unordered_map<taxon_id, std::uint64_t> counts;
    counts.reserve(taxa_.size());
    std::vector<taxon_id> order;
    order.reserve(taxa_.size());
    std::vector<taxon_id> stack(roots_.begin(), roots_.end());
    while (!stack.empty()) {
      const taxon_id cur = stack.back();
      stack.pop_back();
      order.push_back(cur);
      const Taxon& t = taxa_.at(cur);
      stack.insert(stack.end(), t.children.begin(), t.children.end());
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Taxon& t = taxa_.at(*it);
      std::uint64_t c = t.extant() ? 1 : 0;
      for (const taxon_id child : t.children) c += counts.at(child);
      counts.emplace(*it, c);
    }
    return counts;
  }

  bool contains(taxon_id id) const { return taxa_.contains(id); }

  const Taxon& taxon(taxon_id id) const {
    auto it = taxa_.find(id);
    if (it == taxa_.end()) {
      throw std::invalid_argument("unknown taxon " + std::to_string(id));
    }
    return it->second;
  }

  const std::unordered_map<taxon_id, Taxon>& taxa() const { return taxa_; }
  const std::vector<taxon_id>& roots() const { return roots_; }
  std::size_t size() const { return taxa_.size(); }
  bool empty() const { return taxa_.empty(); }
  std::size_t extant_count() const { return extant_count_; }
  std::uint64_t current_time() const { return current_time_; }

  /// Ids of extant taxa, ascending.
  std::vector<taxon_id> extant_ids() const {
    std::vector<taxon_id> ids;
    ids.reserve(extant_count_);
    for (const auto& [id, t] : taxa_) {
      if (t.extant()) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  /// Total number of living organisms across extant taxa.
  std::uint64_t living_organisms() const {
    std::uint64_t n = 0;
    for (const auto& [id, t] : taxa_) n += t.living_count;
    return n;
  }

  std::uint64_t depth(taxon_id id) const {
    const Taxon* t = &taxon(id);
    std::uint64_t d = 0;
    while (t->parent) {
      t = &taxa_.at(*t->parent);
      ++d;
    }
    return d;
  }

  // -- snapshot serialization (ALife community phylogeny data format) --

  static constexpr const char* snapshot_header =
      "id,ancestor_list,origin_time,destruction_time,num_orgs,phenotype";

  void write_snapshot(std::ostream& os) const {
    os << snapshot_header << '\n';
    std::vector<taxon_id> ids;
    ids.reserve(taxa_.size());
    for (const auto& [id, t] : taxa_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (const taxon_id id : ids) {
      const Taxon& t = taxa_.at(id);
      os << id << ",[";
      if (t.parent) {
        os << *t.parent;
      } else {
        os << "NONE";
      }
      os << "]," << t.origin_time << ',';
      if (t.extinction_time) {
        os << *t.extinction_time;
      } else {
        os << "inf";
      }
      os << ',' << t.living_count << ',' << t.phenotype << '\n';
    }
  }

  void write_snapshot_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open snapshot file for writing: " + path);
    write_snapshot(os);
    if (!os.good()) throw std::runtime_error("failed writing snapshot file: " + path);
  }

  static Phylogeny load_snapshot(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
      throw std::runtime_error("snapshot: missing header line");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != snapshot_header) {
      throw std::runtime_error("snapshot: unexpected header: " + line);
    }
    Phylogeny tree;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      // First five fields are comma-separated; the rest of the line is the
      // phenotype (which may itself contain commas).
      std::array<std::string, 5> field;
      std::size_t pos = 0;
      for (auto& f : field) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
          throw std::runtime_error("snapshot: malformed row at line " + std::to_string(line_no));
        }
        f = line.substr(pos, comma - pos);
        pos = comma + 1;
      }
      const std::string phenotype = line.substr(pos);

      Taxon t;
      t.id = parse_u64(field[0], line_no);
      if (field[1].size() < 2 || field[1].front() != '[' || field[1].back() != ']') {
        throw std::runtime_error("snapshot: malformed ancestor_list at line " +
                                 std::to_string(line_no));
      }
      const std::string anc = field[1].substr(1, field[1].size() - 2);
      if (anc != "NONE") t.parent = parse_u64(anc, line_no);
      t.origin_time = parse_u64(field[2], line_no);
      if (field[3] != "inf") t.extinction_time = parse_u64(field[3], line_no);
      t.living_count = static_cast<std::uint32_t>(parse_u64(field[4], line_no));
      if (t.extant() == t.extinction_time.has_value()) {
        throw std::runtime_error("snapshot: inconsistent extinction state at line " +
                                 std::to_string(line_no));
      }
      t.phenotype = phenotype;
      if (!tree.taxa_.emplace(t.id, t).second) {
        throw std::runtime_error("snapshot: duplicate taxon id at line " +
                                 std::to_string(line_no));
      }
    }
    // Link children and rebuild derived state.
    std::vector<taxon_id> ids;
    ids.reserve(tree.taxa_.size());
    for (const auto& [id, t] : tree.taxa_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (const taxon_id id : ids) {
      Taxon& t = tree.taxa_.at(id);
      if (t.parent) {
        auto pit = tree.taxa_.find(*t.parent);
        if (pit == tree.taxa_.end()) {
          throw std::runtime_error("snapshot: taxon " + std::to_string(id) +
                                   " references unknown ancestor " + std::to_string(*t.parent));
        }
        pit->second.children.push_back(id);
      } else {
        tree.roots_.push_back(id);
      }
      if (t.extant()) ++tree.extant_count_;
      tree.next_id_ = std::max(tree.next_id_, id + 1);
      tree.current_time_ = std::max(tree.current_time_, t.origin_time);
      if (t.extinction_time) {
        tree.current_time_ = std::max(tree.current_time_, *t.extinction_time);
      }
    }
    // Children were linked in id order; restore birth order.
    for (auto& [id, t] : tree.taxa_) {
      std::stable_sort(t.children.begin(), t.children.end(),
                       [&](taxon_id a, taxon_id b) {
                         return tree.taxa_.at(a).origin_time < tree.taxa_.at(b).origin_time;
                       });
    }
    return tree;
  }

  static Phylogeny load_snapshot_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open snapshot file: " + path);
    return load_snapshot(is);
  }

 private:
  struct MrcaResult {
    taxon_id ancestor;
    std::uint64_t distance;
  };

  MrcaResult walk_to_mrca(taxon_id a, taxon_id b) const {
    const Taxon* ta = &taxon(a);
    const Taxon* tb = &taxon(b);
    std::uint64_t da = depth(a);
    std::uint64_t db = depth(b);
    std::uint64_t dist = 0;
    while (da > db) {
      ta = &taxa_.at(*ta->parent);
      --da;
      ++dist;
    }
    while (db > da) {
      tb = &taxa_.at(*tb->parent);
      --db;
      ++dist;
    }
    while (ta->id != tb->id) {
      if (!ta->parent || !tb->parent) {
        throw std::invalid_argument("taxa " + std::to_string(a) + " and " + std::to_string(b) +
                                    " are in disjoint trees");
      }
      ta = &taxa_.at(*ta->parent);
      tb = &taxa_.at(*tb->parent);
      dist += 2;
    }
    return {ta->id, dist};
  }

  /// Share of taxon `t`'s own branch accumulated by a lineage entering the
  /// branch at attachment time `enter` and walking down to t's origin.
  double timeline_share(const Taxon& t, std::uint64_t at_time, std::uint64_t enter,
                        const std::unordered_map<taxon_id, std::uint64_t>& counts) const {
    // Attachment points along t's branch: each retained child at its origin,
    // plus the taxon itself at at_time when extant.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> attach;  // (time, extant led to)
    attach.reserve(t.children.size() + 1);
    for (const taxon_id c : t.children) {
      attach.emplace_back(taxa_.at(c).origin_time, counts.at(c));
    }
    if (t.extant()) attach.emplace_back(at_time, 1);
    if (!std::is_sorted(attach.begin(), attach.end(),
                        [](const auto& x, const auto& y) { return x.first < y.first; })) {
      std::stable_sort(attach.begin(), attach.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
    }
    std::uint64_t remaining = 0;
    for (const auto& [tm, c] : attach) remaining += c;

    double share = 0.0;
    std::uint64_t prev = t.origin_time;
    std::size_t i = 0;
    while (i < attach.size()) {
      const std::uint64_t tm = attach[i].first;
      if (tm > enter) break;
      share += static_cast<double>(tm - prev) / static_cast<double>(remaining);
      std::uint64_t group = 0;
      while (i < attach.size() && attach[i].first == tm) {
        group += attach[i].second;
        ++i;
      }
      remaining -= group;
      prev = tm;
    }
    return share;
  }

  static std::uint64_t parse_u64(const std::string& s, std::size_t line_no) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw std::runtime_error("snapshot: bad integer '" + s + "' at line " +
                               std::to_string(line_no));
    }
  }

  std::unordered_map<taxon_id, Taxon> taxa_;
  std::vector<taxon_id> roots_;
  taxon_id next_id_ = 1;
  std::uint64_t current_time_ = 0;
  std::size_t extant_count_ = 0;
};

}  // namespace phylodiv
