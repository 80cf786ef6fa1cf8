#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace phylodiv {

/// A recorded time series: one value per recorded generation, generations
/// `stride` apart.
struct Series {
  std::vector<double> values;
  std::uint64_t stride = 1;
};

struct DiscretizedSeries {
  std::vector<int> symbols;
  int nbins = 0;
};

/// Estimator default: max(2, floor(cbrt(length))) equal-frequency bins.
inline int default_nbins(std::size_t length) {
  auto b = static_cast<std::int64_t>(std::llround(std::cbrt(static_cast<double>(length))));
  while (b > 1 && b * b * b > static_cast<std::int64_t>(length)) --b;
  while ((b + 1) * (b + 1) * (b + 1) <= static_cast<std::int64_t>(length)) ++b;
  return static_cast<int>(std::max<std::int64_t>(2, b));
}

/// Midranks (0-based): tied values share the average of their tie group's
/// sorted positions.
inline std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

/// Equal-frequency binning on midranks: symbol = floor(midrank * nbins / n).
/// A constant series maps to all zeros (one effective bin).
inline DiscretizedSeries discretize(std::span<const double> values, int nbins) {
  if (nbins < 2) throw std::invalid_argument("discretize: nbins must be >= 2");
  if (values.empty()) throw std::invalid_argument("discretize: empty series");
  for (const double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("discretize: non-finite value");
  }
  DiscretizedSeries out;
  out.nbins = nbins;
  out.symbols.resize(values.size());
  const bool constant =
      std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
  if (constant) return out;  // all zeros
  const auto ranks = midranks(values);
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto s = static_cast<int>(std::floor(ranks[i] * static_cast<double>(nbins) / n));
    out.symbols[i] = std::clamp(s, 0, nbins - 1);
  }
  return out;
}

/// Plug-in conditional mutual information I(A;B|C) in nats, from the joint
/// frequency tables. Equals H(A,C) + H(B,C) - H(A,B,C) - H(C), computed as
/// the single sum over joint cells so that degenerate inputs (A determined
/// by C, or B constant) come out exactly zero.
inline double conditional_mutual_information(std::span<const int> a, std::span<const int> b,
                                             std::span<const int> c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw std::invalid_argument("conditional_mutual_information: length mismatch");
  }
  if (a.empty()) throw std::invalid_argument("conditional_mutual_information: empty input");
  const auto alphabet = [](std::span<const int> s) {
    int m = 0;
    for (const int v : s) {
      if (v < 0) throw std::invalid_argument("conditional_mutual_information: negative symbol");
      m = std::max(m, v);
    }
    return static_cast<std::size_t>(m) + 1;
  };
  const std::size_t na = alphabet(a), nb = alphabet(b), nc = alphabet(c);
  std::vector<std::uint32_t> abc(na * nb * nc, 0), ac(na * nc, 0), bc(nb * nc, 0), cc(nc, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ai = static_cast<std::size_t>(a[i]);
    const auto bi = static_cast<std::size_t>(b[i]);
    const auto ci = static_cast<std::size_t>(c[i]);
    ++abc[(ai * nb + bi) * nc + ci];
    ++ac[ai * nc + ci];
    ++bc[bi * nc + ci];
    ++cc[ci];
  }
  const double n = static_cast<double>(a.size());
  double cmi = 0.0;
  for (std::size_t ai = 0; ai < na; ++ai) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      for (std::size_t ci = 0; ci < nc; ++ci) {
        const std::uint32_t joint = abc[(ai * nb + bi) * nc + ci];
        if (joint == 0) continue;
        const double num = static_cast<double>(joint) * static_cast<double>(cc[ci]);
        const double den =
            static_cast<double>(ac[ai * nc + ci]) * static_cast<double>(bc[bi * nc + ci]);
        cmi += (static_cast<double>(joint) / n) * std::log(num / den);
      }
    }
  }
  return std::max(cmi, 0.0);
}

/// Transfer entropy TE(X -> Y) at the given lag (in generations, a multiple
/// of the series stride): I(Y_t ; X_{t-k} | Y_{t-k}) over aligned triples.
/// nbins <= 0 selects the default binning.
inline double transfer_entropy(const Series& x, const Series& y, std::uint64_t lag,
                               int nbins = 0) {
  if (x.values.size() != y.values.size() || x.stride != y.stride) {
    throw std::invalid_argument("transfer_entropy: series must share length and stride");
  }
  const std::size_t n = x.values.size();
  if (n < 2) throw std::invalid_argument("transfer_entropy: series too short");
  if (lag == 0 || lag % x.stride != 0) {
    throw std::invalid_argument("transfer_entropy: lag must be a positive multiple of the stride");
  }
  const std::uint64_t shift = lag / x.stride;
  if (shift >= n) throw std::invalid_argument("transfer_entropy: lag exceeds the series span");
  if (nbins <= 0) nbins = default_nbins(n);

  const DiscretizedSeries dx = discretize(x.values, nbins);
  const DiscretizedSeries dy = discretize(y.values, nbins);
  const std::size_t m = n - static_cast<std::size_t>(shift);
  std::vector<int> yt(m), xlag(m), ylag(m);
  for (std::size_t t = 0; t < m; ++t) {
    yt[t] = dy.symbols[t + shift];
    xlag[t] = dx.symbols[t];
    ylag[t] = dy.symbols[t];
  }
  return conditional_mutual_information(yt, xlag, ylag);
}

struct LagSweepRow {
  std::uint64_t lag = 0;
  double te_xy = 0.0;  ///< TE(X -> Y)
  double te_yx = 0.0;  ///< TE(Y -> X)
};

/// Both directions of transfer entropy for each lag.
inline std::vector<LagSweepRow> lag_sweep(const Series& x, const Series& y,
                                          std::span<const std::uint64_t> lags, int nbins = 0) {
  std::vector<LagSweepRow> rows;
  rows.reserve(lags.size());
  for (const std::uint64_t lag : lags) {
    rows.push_back({lag, transfer_entropy(x, y, lag, nbins), transfer_entropy(y, x, lag, nbins)});
  }
  return rows;
}

/// Decade lag grid {10, 100, ...} clipped to lags strictly inside the span
/// of a series with `points` entries at `stride` generations apart.
inline std::vector<std::uint64_t> default_lag_grid(std::size_t points, std::uint64_t stride) {
  std::vector<std::uint64_t> lags;
  if (points < 2) return lags;
  const std::uint64_t span = (points - 1) * stride;
  for (std::uint64_t lag = 10; lag <= 100000; lag *= 10) {
    if (lag < span && lag % stride == 0) lags.push_back(lag);
  }
  return lags;
}

/// Spearman rank correlation: Pearson correlation of midranks. Returns NaN
/// when either input is constant.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 points");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

// ---- time-series CSV ingestion ----

struct TimeSeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  ///< rows[i][column]

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    std::string msg = "unknown column `" + name + "`; available columns:";
    for (const auto& c : columns) msg += " " + c;
    throw std::runtime_error(msg);
  }
};

inline TimeSeriesTable read_timeseries_csv(std::istream& is,
                                           const std::string& source_name = "<csv>") {
  TimeSeriesTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(source_name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream header(line);
  std::string field;
  while (std::getline(header, field, ',')) table.columns.push_back(field);
  if (table.columns.empty()) throw std::runtime_error(source_name + ": no columns");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.columns.size());
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string cell = line.substr(pos, comma - pos);
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                 ": cannot parse value `" + cell + "`");
      }
      pos = comma + 1;
    }
    if (row.size() != table.columns.size()) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": wrong field count");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline TimeSeriesTable read_timeseries_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open time-series file: " + path);
  return read_timeseries_csv(is, path);
}

/// Extracts an aligned pair of series from a recorded table. Rows where
/// either column is NaN are dropped pairwise; a trailing row that breaks the
/// recording stride (a final generation off the record interval) is dropped.
inline std::pair<Series, Series> extract_pair(const TimeSeriesTable& table,
                                              const std::string& x_col,
                                              const std::string& y_col) {
  const std::size_t gi = table.column_index("generation");
  const std::size_t xi = table.column_index(x_col);
  const std::size_t yi = table.column_index(y_col);

  std::vector<double> gens;
  Series x, y;
  for (const auto& row : table.rows) {
    if (std::isnan(row[xi]) || std::isnan(row[yi])) continue;
    gens.push_back(row[gi]);
    x.values.push_back(row[xi]);
    y.values.push_back(row[yi]);
  }
  if (x.values.size() < 2) {
    throw std::runtime_error("series too short after dropping undefined rows");
  }
  const double stride = gens[1] - gens[0];
  if (stride <= 0) throw std::runtime_error("non-increasing generation column");
  for (std::size_t i = 2; i < gens.size(); ++i) {
    if (gens[i] - gens[i - 1] != stride) {
      if (i == gens.size() - 1 && gens[i] - gens[i - 1] < stride) {
        gens.pop_back();
        x.values.pop_back();
        y.values.pop_back();
        break;
      }
      throw std::runtime_error("irregular recording stride in time series");
    }
  }
  x.stride = static_cast<std::uint64_t>(stride);
  y.stride = x.stride;
  return {std::move(x), std::move(y)};
}

}  // namespace phylodiv
