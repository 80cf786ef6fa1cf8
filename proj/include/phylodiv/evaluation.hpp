#pragma once

#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace phylodiv {

/// Result of evaluating one genome on a fitness landscape.
struct Evaluation {
  double fitness = 0.0;
  std::vector<double> criteria;  ///< per-site / per-test-case scores
  std::string phenotype;         ///< canonical signature, keys taxon identity
};

/// Canonical fixed-precision rendering of a criteria vector: 6 significant
/// digits per value, '|'-separated. Signatures must be stable across
/// platforms, so taxon identity never depends on the last bits of a double.
inline std::string render_signature(std::span<const double> values) {
  std::string out;
  out.reserve(values.size() * 8);
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out.push_back('|');
    double v = values[i];
    if (v == 0.0) v = 0.0;  // normalize -0
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    out.append(buf);
  }
  return out;
}

}  // namespace phylodiv
