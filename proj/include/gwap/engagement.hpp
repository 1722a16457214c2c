#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwap/error.hpp"
#include "gwap/gwap_metrics.hpp"
#include "gwap/ingest.hpp"
#include "gwap/stats/clustering.hpp"
#include "gwap/stats/descriptive.hpp"
#include "gwap/types.hpp"

namespace gwap {

struct EngagementMetrics {
  PlayerIndex player = 0;
  std::string player_id;
  double activity_ratio = 0.0;     // active days / inclusive linked span
  double daily_devoted_time = 0.0;  // hours per active day
  std::optional<double> relative_active_duration;
  double variation_in_periodicity = 0.0;  // days
  Timestamp total_active_time = 0;         // seconds, last - first event
  std::size_t active_days = 0;
  std::size_t rounds = 0;
};

struct EngagementOptions {
  PeriodFilter period;                     // restrict to one period's events
  std::optional<Timestamp> project_end;    // enables relative_active_duration (exclusive end)
  bool all_pairs_periodicity = false;      // sensitivity variant
};

namespace detail {

inline double periodicity(std::span<const Timestamp> days, bool all_pairs) {
  std::vector<double> gaps;
  if (all_pairs) {
    for (std::size_t i = 0; i < days.size(); ++i) {
      for (std::size_t j = i + 1; j < days.size(); ++j) gaps.push_back(static_cast<double>(days[j] - days[i]));
    }
  } else {
    for (std::size_t i = 1; i < days.size(); ++i) gaps.push_back(static_cast<double>(days[i] - days[i - 1]));
  }
  if (gaps.size() < 2) return 0.0;
  return stats::population_sd(gaps);
}

}  // namespace detail

/// Engagement metrics for every player with at least one event in scope,
/// ordered by player id. Day boundaries are UTC midnights.
inline std::vector<EngagementMetrics> engagement_table(const EventLog& log, std::span<const RoundRecord> rounds,
                                                       const EngagementOptions& options = {}) {
  const auto by_round = index_rounds({rounds.begin(), rounds.end()}, log.round_count());
  struct Acc {
    std::vector<Timestamp> days;
    std::vector<RoundIndex> rounds;
    Timestamp first = 0, last = 0;
    bool any = false;
  };
  std::vector<Acc> acc(log.player_count());
  const auto events = log.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (options.period && log.period_of(i) != *options.period) continue;
    const auto& e = events[i];
    auto& a = acc[e.player];
    if (!a.any) a.first = e.timestamp;
    a.any = true;
    a.last = e.timestamp;  // events are time-ordered
    const auto day = utc_day(e.timestamp);
    if (a.days.empty() || a.days.back() != day) a.days.push_back(day);
    a.rounds.push_back(e.round);
  }
  std::vector<EngagementMetrics> table;
  for (PlayerIndex p = 0; p < acc.size(); ++p) {
    auto& a = acc[p];
    if (!a.any) continue;
    std::ranges::sort(a.rounds);
    a.rounds.erase(std::ranges::unique(a.rounds).begin(), a.rounds.end());
    double seconds = 0.0;
    for (auto r : a.rounds) seconds += static_cast<double>(by_round[r] ? by_round[r]->duration : 60);

    EngagementMetrics m;
    m.player = p;
    m.player_id = log.player_ids()[p];
    m.active_days = a.days.size();
    const auto span = a.days.back() - a.days.front() + 1;
    m.activity_ratio = static_cast<double>(m.active_days) / static_cast<double>(span);
    m.rounds = a.rounds.size();
    m.daily_devoted_time = seconds / 3600.0 / static_cast<double>(m.active_days);
    m.variation_in_periodicity = detail::periodicity(a.days, options.all_pairs_periodicity);
    m.total_active_time = a.last - a.first;
    if (options.project_end) {
      const auto end_day = utc_day(*options.project_end - 1);
      if (a.days.front() <= end_day) {
        const auto linked = std::min(a.days.back(), end_day) - a.days.front() + 1;
        m.relative_active_duration = static_cast<double>(linked) / static_cast<double>(end_day - a.days.front() + 1);
      }
    }
    table.push_back(std::move(m));
  }
  return table;
}

inline EngagementMetrics engagement_metrics(const EventLog& log, std::span<const RoundRecord> rounds,
                                            std::string_view player_id, const EngagementOptions& options = {}) {
  auto index = log.find_player(player_id);
  if (!index) throw Error(ErrorCode::UnknownPlayer, "no events for player '" + std::string(player_id) + "'");
  for (auto& m : engagement_table(log, rounds, options)) {
    if (m.player == *index) return m;
  }
  throw Error(ErrorCode::UnknownPlayer, "player '" + std::string(player_id) + "' has no events in scope");
}

struct EngagementSummary {
  std::size_t players = 0;
  stats::Summary activity_ratio;
  stats::Summary daily_devoted_time;
  std::optional<stats::Summary> relative_active_duration;
  stats::Summary variation_in_periodicity;
};

inline EngagementSummary summarize(std::span<const EngagementMetrics> table) {
  EngagementSummary s;
  s.players = table.size();
  std::vector<double> ar, dt, rad, vp;
  for (const auto& m : table) {
    ar.push_back(m.activity_ratio);
    dt.push_back(m.daily_devoted_time);
    vp.push_back(m.variation_in_periodicity);
    if (m.relative_active_duration) rad.push_back(*m.relative_active_duration);
  }
  s.activity_ratio = stats::summarize(ar);
  s.daily_devoted_time = stats::summarize(dt);
  s.variation_in_periodicity = stats::summarize(vp);
  if (!rad.empty()) s.relative_active_duration = stats::summarize(rad);
  return s;
}

// ---------------------------------------------------------------------------
// Clustering

struct EngagementCluster {
  int id = 0;
  std::vector<std::string> members;
  std::vector<double> centroid;  // standardized feature space
  std::string profile;           // hardworker, focused hardworker, transient, unlabeled
};

struct ClusterDiagnostics {
  std::size_t k = 0;
  double wss = 0.0;
  double kmeans_silhouette = 0.0;
  double ward_silhouette = 0.0;
  double agreement_ari = 0.0;  // k-means vs Ward
};

struct EngagementClustering {
  std::vector<std::string> features;
  std::vector<std::string> dropped_features;
  std::size_t chosen_k = 0;
  std::vector<ClusterDiagnostics> diagnostics;
  std::vector<EngagementCluster> clusters;
  std::vector<std::string> warnings;
};

/// Names a cluster from its standardized centroid: high activity and low
/// periodicity variation is a hardworker, focused when daily time is also
/// above average; below-average activity and daily time is transient.
inline std::string engagement_profile(const std::vector<std::string>& features, std::span<const double> centroid) {
  auto z = [&](std::string_view name) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features[i] == name) return centroid[i];
    }
    return 0.0;
  };
  const double activity = z("activity_ratio");
  const double daily = z("daily_devoted_time");
  const double variation = z("variation_in_periodicity");
  if (activity >= 0.0 && variation <= 0.0) return daily > 0.0 ? "focused hardworker" : "hardworker";
  if (activity <= 0.0 && daily <= 0.0 && z("relative_active_duration") <= 0.0) return "transient";
  return "unlabeled";
}

/// Runs k-means and Ward for every k in [k_min, k_max] on z-scored
/// engagement features and keeps the k with the best mean k-means
/// silhouette (smallest k on ties).
inline EngagementClustering cluster_engagement(std::span<const EngagementMetrics> metrics, std::size_t k_min = 2,
                                               std::size_t k_max = 6) {
  if (k_min < 2 || k_max < k_min) throw Error(ErrorCode::InvalidConfig, "k range must satisfy 2 <= k_min <= k_max");
  if (metrics.size() < k_max + 1) {
    throw Error(ErrorCode::TooFewPlayers, "clustering needs more than k_max players");
  }
  std::vector<const EngagementMetrics*> sorted;
  for (const auto& m : metrics) sorted.push_back(&m);
  std::ranges::sort(sorted, {}, &EngagementMetrics::player_id);

  std::vector<std::string> names{"activity_ratio", "daily_devoted_time", "variation_in_periodicity"};
  const bool with_rad = std::ranges::all_of(sorted, [](auto* m) { return m->relative_active_duration.has_value(); });
  if (with_rad) names.push_back("relative_active_duration");
  std::vector<stats::Point> rows;
  for (const auto* m : sorted) {
    stats::Point p{m->activity_ratio, m->daily_devoted_time, m->variation_in_periodicity};
    if (with_rad) p.push_back(*m->relative_active_duration);
    rows.push_back(std::move(p));
  }
  auto z = stats::standardize(rows);

  EngagementClustering out;
  for (auto d : z.kept_columns) out.features.push_back(names[d]);
  for (auto d : z.dropped_columns) {
    out.dropped_features.push_back(names[d]);
    out.warnings.push_back("feature " + names[d] + " has zero variance and was dropped");
  }
  if (out.features.empty()) throw Error(ErrorCode::DegenerateFeature, "every engagement feature has zero variance");

  const auto merges = stats::ward_linkage(z.points);
  double best = -2.0;
  std::vector<int> best_labels;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    auto km = stats::kmeans(z.points, k);
    auto ward = stats::cut_dendrogram(z.points.size(), merges, k);
    ClusterDiagnostics d;
    d.k = k;
    d.wss = km.wss;
    // coincident points can leave a k-means cluster empty; silhouette needs two
    const auto km_labels = stats::canonical_labels(km.assignment);
    d.kmeans_silhouette = stats::cluster_count(km_labels) >= 2 ? stats::silhouette(z.points, km_labels) : -1.0;
    d.ward_silhouette = stats::silhouette(z.points, ward);
    d.agreement_ari = stats::adjusted_rand_index(km_labels, ward);
    out.diagnostics.push_back(d);
    if (d.kmeans_silhouette > best) {
      best = d.kmeans_silhouette;
      out.chosen_k = k;
      best_labels = km_labels;
    }
  }

  const auto k = stats::cluster_count(best_labels);
  const auto dims = out.features.size();
  out.clusters.resize(k);
  std::vector<double> counts(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    out.clusters[c].id = static_cast<int>(c);
    out.clusters[c].centroid.assign(dims, 0.0);
  }
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    auto& cl = out.clusters[best_labels[i]];
    cl.members.push_back(sorted[i]->player_id);
    for (std::size_t d = 0; d < dims; ++d) cl.centroid[d] += z.points[i][d];
    counts[best_labels[i]] += 1.0;
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (auto& v : out.clusters[c].centroid) v /= counts[c];
    out.clusters[c].profile = engagement_profile(out.features, out.clusters[c].centroid);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Total active time

struct ActiveTimeSummary {
  std::size_t players = 0;
  double p25 = 0.0, p50 = 0.0, p75 = 0.0, p90 = 0.0;  // seconds
  double fraction_under_5_minutes = 0.0;
  double fraction_over_1_day = 0.0;
};

inline ActiveTimeSummary active_time_summary(const EventLog& log) {
  std::vector<Timestamp> first(log.player_count(), 0), last(log.player_count(), 0);
  std::vector<char> seen(log.player_count(), 0);
  for (const auto& e : log.events()) {
    if (!seen[e.player]) first[e.player] = e.timestamp;
    seen[e.player] = 1;
    last[e.player] = e.timestamp;
  }
  std::vector<double> spans;
  for (PlayerIndex p = 0; p < log.player_count(); ++p) {
    if (seen[p]) spans.push_back(static_cast<double>(last[p] - first[p]));
  }
  ActiveTimeSummary s;
  s.players = spans.size();
  if (spans.empty()) return s;
  s.p25 = stats::quantile(spans, 0.25);
  s.p50 = stats::quantile(spans, 0.50);
  s.p75 = stats::quantile(spans, 0.75);
  s.p90 = stats::quantile(spans, 0.90);
  const auto n = static_cast<double>(spans.size());
  s.fraction_under_5_minutes = static_cast<double>(std::ranges::count_if(spans, [](double x) { return x < 300.0; })) / n;
  s.fraction_over_1_day =
      static_cast<double>(std::ranges::count_if(spans, [](double x) { return x > static_cast<double>(kSecondsPerDay); })) / n;
  return s;
}

}  // namespace gwap
