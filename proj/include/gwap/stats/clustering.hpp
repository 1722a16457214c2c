#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "gwap/error.hpp"

namespace gwap::stats {

using Point = std::vector<double>;

inline double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(const Point& a, const Point& b) { return std::sqrt(squared_distance(a, b)); }

/// Relabels clusters 0, 1, ... in order of first appearance.
inline std::vector<int> canonical_labels(std::span<const int> labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

inline std::size_t cluster_count(std::span<const int> labels) {
  std::vector<int> sorted(labels.begin(), labels.end());
  std::ranges::sort(sorted);
  return static_cast<std::size_t>(std::ranges::unique(sorted).begin() - sorted.begin());
}

/// Within-cluster sum of squared distances to the cluster means.
inline double within_sum_of_squares(std::span<const Point> points, std::span<const int> labels) {
  if (points.empty()) return 0.0;
  std::map<int, std::pair<Point, std::size_t>> sums;
  const auto dims = points.front().size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& [sum, count] = sums.try_emplace(labels[i], Point(dims, 0.0), 0).first->second;
    for (std::size_t d = 0; d < dims; ++d) sum[d] += points[i][d];
    ++count;
  }
  for (auto& [label, entry] : sums) {
    for (auto& v : entry.first) v /= static_cast<double>(entry.second);
  }
  double wss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) wss += squared_distance(points[i], sums.at(labels[i]).first);
  return wss;
}

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<Point> centroids;
  double wss = 0.0;
  std::size_t iterations = 0;
  std::vector<double> wss_trace;  // after every assignment step
};

namespace detail {

inline int nearest_centroid(const Point& p, const std::vector<Point>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {  // strict: ties go to the lowest index
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

inline KMeansResult lloyd(std::span<const Point> points, std::vector<Point> centroids, std::size_t max_iter) {
  KMeansResult r;
  const auto dims = points.front().size();
  r.assignment.assign(points.size(), -1);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iter, 1); ++iter) {
    bool changed = false;
    double wss = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = nearest_centroid(points[i], centroids);
      wss += squared_distance(points[i], centroids[c]);
      if (c != r.assignment[i]) {
        r.assignment[i] = c;
        changed = true;
      }
    }
    r.wss_trace.push_back(wss);
    r.iterations = iter + 1;
    if (!changed) break;
    std::vector<Point> sums(centroids.size(), Point(dims, 0.0));
    std::vector<std::size_t> counts(centroids.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[r.assignment[i]];
      for (std::size_t d = 0; d < dims; ++d) s[d] += points[i][d];
      ++counts[r.assignment[i]];
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dims; ++d) centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }
  r.centroids = std::move(centroids);
  double wss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) wss += squared_distance(points[i], r.centroids[r.assignment[i]]);
  r.wss = wss;
  return r;
}

// Index of the point farthest from its nearest centroid (ties: lowest index).
inline std::size_t farthest_point(std::span<const Point> points, const std::vector<Point>& centroids) {
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : centroids) d = std::min(d, squared_distance(points[i], c));
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

/// Farthest-point ("maximin") seeds starting from point 0.
inline std::vector<Point> maximin_seeds(std::span<const Point> points, std::size_t k) {
  std::vector<Point> seeds;
  if (k == 0 || points.empty()) return seeds;
  seeds.push_back(points.front());
  while (seeds.size() < k) seeds.push_back(points[detail::farthest_point(points, seeds)]);
  return seeds;
}

/// Deterministic k-means.
///
/// Solutions are built for 1..k clusters in turn; each is the better (lower
/// WSS, maximin run on ties) of a maximin-seeded Lloyd run and a run warm
/// started from the previous solution plus its farthest point. The warm
/// start makes WSS non-increasing in k.
inline KMeansResult kmeans(std::span<const Point> points, std::size_t k, std::size_t max_iter = 100) {
  if (k == 0 || points.size() < k) {
    throw Error(ErrorCode::TooFewPoints, "k-means needs at least k points");
  }
  KMeansResult best = detail::lloyd(points, maximin_seeds(points, 1), max_iter);
  for (std::size_t j = 2; j <= k; ++j) {
    auto fresh = detail::lloyd(points, maximin_seeds(points, j), max_iter);
    auto warm_seeds = best.centroids;
    warm_seeds.push_back(points[detail::farthest_point(points, best.centroids)]);
    auto warm = detail::lloyd(points, std::move(warm_seeds), max_iter);
    best = fresh.wss <= warm.wss ? std::move(fresh) : std::move(warm);
  }
  return best;
}

struct Merge {
  std::size_t left = 0;   // surviving cluster slot
  std::size_t right = 0;  // absorbed cluster slot
  double height = 0.0;    // Lance-Williams Ward distance at merge time
};

/// Full Ward dendrogram via Lance-Williams updates on squared Euclidean
/// distances. Ties go to the smallest (left, right) slot pair.
inline std::vector<Merge> ward_linkage(std::span<const Point> points) {
  const std::size_t n = points.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = squared_distance(points[i], points[j]);
  }
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);
  std::vector<Merge> merges;
  merges.reserve(n > 0 ? n - 1 : 0);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const double* row = &dist[i * n];
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && row[j] < best) {
          best = row[j];
          bi = i;
          bj = j;
        }
      }
    }
    const double ni = static_cast<double>(size[bi]);
    const double nj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double nk = static_cast<double>(size[k]);
      const double d = ((ni + nk) * dist[bi * n + k] + (nj + nk) * dist[bj * n + k] - nk * best) / (ni + nj + nk);
      dist[bi * n + k] = dist[k * n + bi] = d;
    }
    size[bi] += size[bj];
    active[bj] = 0;
    merges.push_back({bi, bj, best});
  }
  return merges;
}

/// Cuts a Ward dendrogram into k clusters; labels in first-appearance order.
inline std::vector<int> cut_dendrogram(std::size_t n, std::span<const Merge> merges, std::size_t k) {
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const std::size_t steps = n - k;
  for (std::size_t s = 0; s < steps; ++s) parent[find(merges[s].right)] = find(merges[s].left);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(find(i));
  return canonical_labels(labels);
}

inline std::vector<int> ward_agglomerative(std::span<const Point> points, std::size_t k) {
  if (k == 0 || points.size() < k) {
    throw Error(ErrorCode::TooFewPoints, "Ward clustering needs at least k points");
  }
  return cut_dendrogram(points.size(), ward_linkage(points), k);
}

/// Mean silhouette width with Euclidean distance; singleton clusters score 0.
inline double silhouette(std::span<const Point> points, std::span<const int> labels) {
  const auto canon = canonical_labels(labels);
  const auto k = cluster_count(canon);
  if (k < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs at least two clusters");
  std::vector<std::size_t> sizes(k, 0);
  for (int l : canon) ++sizes[l];
  double total = 0.0;
  std::vector<double> sum_to(k);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (sizes[canon[i]] == 1) continue;
    std::ranges::fill(sum_to, 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j != i) sum_to[canon[j]] += distance(points[i], points[j]);
    }
    const double a = sum_to[canon[i]] / static_cast<double>(sizes[canon[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (static_cast<int>(c) != canon[i]) b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(points.size());
}

/// Adjusted Rand index between two partitions of the same points.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  const auto ca = canonical_labels(a);
  const auto cb = canonical_labels(b);
  const auto ka = cluster_count(ca);
  const auto kb = cluster_count(cb);
  std::vector<double> table(ka * kb, 0.0), rows(ka, 0.0), cols(kb, 0.0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    table[ca[i] * kb + cb[i]] += 1.0;
    rows[ca[i]] += 1.0;
    cols[cb[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (double v : table) index += pairs(v);
  for (double v : rows) sum_rows += pairs(v);
  for (double v : cols) sum_cols += pairs(v);
  const double expected = sum_rows * sum_cols / pairs(static_cast<double>(ca.size()));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

struct Standardized {
  std::vector<Point> points;
  std::vector<double> means;
  std::vector<double> sds;
  std::vector<std::size_t> kept_columns;
  std::vector<std::size_t> dropped_columns;  // zero variance
};

/// Z-scores every column (population sd); zero-variance columns are dropped.
inline Standardized standardize(std::span<const Point> rows) {
  Standardized out;
  if (rows.empty()) return out;
  const auto dims = rows.front().size();
  const auto n = static_cast<double>(rows.size());
  std::vector<double> means(dims, 0.0), sds(dims, 0.0);
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dims; ++d) means[d] += r[d];
  }
  for (auto& m : means) m /= n;
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dims; ++d) sds[d] += (r[d] - means[d]) * (r[d] - means[d]);
  }
  for (std::size_t d = 0; d < dims; ++d) {
    sds[d] = std::sqrt(sds[d] / n);
    (sds[d] > 1e-12 * std::max(1.0, std::fabs(means[d])) ? out.kept_columns : out.dropped_columns).push_back(d);
  }
  out.points.reserve(rows.size());
  for (const auto& r : rows) {
    Point p;
    p.reserve(out.kept_columns.size());
    for (auto d : out.kept_columns) p.push_back((r[d] - means[d]) / sds[d]);
    out.points.push_back(std::move(p));
  }
  for (auto d : out.kept_columns) {
    out.means.push_back(means[d]);
    out.sds.push_back(sds[d]);
  }
  return out;
}

}  // namespace gwap::stats
