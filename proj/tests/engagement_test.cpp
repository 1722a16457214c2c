#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "gwap/engagement.hpp"
#include "gwap/ingest.hpp"

namespace {

using fixtures::log_of;
using fixtures::row;

constexpr gwap::Timestamp kDay0 = 1'514'764'800;

// One 60 s round per listed day for the player, one answer each.
std::vector<std::string> days_rows(const std::string& player, const std::vector<int>& days, gwap::Timestamp offset = 0) {
  std::vector<std::string> rows;
  for (int d : days) {
    const auto t = kDay0 + offset + d * gwap::kSecondsPerDay + 3600;
    rows.push_back(row(t, player, player + "_r" + std::to_string(d), player + "_t" + std::to_string(d), 1));
  }
  return rows;
}

gwap::EngagementMetrics single(const std::vector<int>& days, gwap::Timestamp offset = 0) {
  auto log = log_of(days_rows("x", days, offset));
  return gwap::engagement_metrics(log, gwap::build_rounds(log), "x");
}

TEST(Engagement, ConsecutiveDays) {
  auto m = single({1, 2, 3});
  EXPECT_DOUBLE_EQ(m.activity_ratio, 1.0);
  EXPECT_DOUBLE_EQ(m.variation_in_periodicity, 0.0);
  EXPECT_EQ(m.active_days, 3u);
  EXPECT_NEAR(m.daily_devoted_time, 60.0 / 3600.0, 1e-15);
}

TEST(Engagement, IrregularDays) {
  auto m = single({1, 3, 7});
  EXPECT_NEAR(m.activity_ratio, 3.0 / 7.0, 1e-15);
  EXPECT_NEAR(m.variation_in_periodicity, 1.0, 1e-15);
}

TEST(Engagement, InvariantUnderWholeDayTranslation) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> days;
    for (int d = 0; d < 40; ++d) {
      if (rng() % 3 == 0) days.push_back(d);
    }
    if (days.empty()) days.push_back(0);
    auto a = single(days);
    auto b = single(days, 17 * gwap::kSecondsPerDay);
    EXPECT_DOUBLE_EQ(a.activity_ratio, b.activity_ratio);
    EXPECT_DOUBLE_EQ(a.variation_in_periodicity, b.variation_in_periodicity);
    EXPECT_DOUBLE_EQ(a.daily_devoted_time, b.daily_devoted_time);
    EXPECT_GT(a.activity_ratio, 0.0);
    EXPECT_LE(a.activity_ratio, 1.0);
  }
}

TEST(Engagement, AllPairsVariant) {
  auto log = log_of(days_rows("x", {1, 3, 7}));
  gwap::EngagementOptions opt;
  opt.all_pairs_periodicity = true;
  auto m = gwap::engagement_metrics(log, gwap::build_rounds(log), "x", opt);
  // differences 2, 6, 4
  EXPECT_NEAR(m.variation_in_periodicity, std::sqrt(8.0 / 3.0), 1e-12);
}

TEST(Engagement, RelativeActiveDuration) {
  auto log = log_of(days_rows("x", {0, 4}));
  gwap::EngagementOptions opt;
  opt.project_end = kDay0 + 10 * gwap::kSecondsPerDay;
  auto m = gwap::engagement_metrics(log, gwap::build_rounds(log), "x", opt);
  ASSERT_TRUE(m.relative_active_duration);
  EXPECT_DOUBLE_EQ(*m.relative_active_duration, 5.0 / 10.0);
}

TEST(Engagement, UnknownPlayer) {
  auto log = log_of(days_rows("x", {1}));
  try {
    gwap::engagement_metrics(log, gwap::build_rounds(log), "nobody");
    FAIL();
  } catch (const gwap::Error& e) {
    EXPECT_EQ(e.code(), gwap::ErrorCode::UnknownPlayer);
  }
}

TEST(EngagementSummary, MeanAndSampleSd) {
  std::vector<gwap::EngagementMetrics> table(3);
  table[0].activity_ratio = 0.2;
  table[1].activity_ratio = 0.4;
  table[2].activity_ratio = 0.6;
  auto s = gwap::summarize(table);
  EXPECT_NEAR(s.activity_ratio.mean, 0.4, 1e-15);
  EXPECT_NEAR(s.activity_ratio.sd, 0.2, 1e-15);
  EXPECT_FALSE(s.relative_active_duration);
}

std::vector<gwap::EngagementMetrics> three_groups(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.02);
  std::vector<gwap::EngagementMetrics> out;
  const double centres[3][3] = {{0.9, 0.2, 0.3}, {0.9, 1.5, 0.3}, {0.15, 0.1, 4.0}};
  for (int i = 0; i < 60; ++i) {
    const auto& c = centres[i % 3];
    gwap::EngagementMetrics m;
    m.player_id = "p" + std::to_string(100 + i);
    m.activity_ratio = c[0] + jitter(rng);
    m.daily_devoted_time = c[1] + jitter(rng);
    m.variation_in_periodicity = c[2] + 5.0 * jitter(rng);
    out.push_back(m);
  }
  return out;
}

TEST(EngagementClustering, RecoversThreeGroups) {
  auto metrics = three_groups(1);
  auto c = gwap::cluster_engagement(metrics);
  EXPECT_EQ(c.chosen_k, 3u);
  ASSERT_EQ(c.clusters.size(), 3u);
  double best = -1.0;
  for (const auto& d : c.diagnostics) {
    if (d.k == 3) {
      best = d.kmeans_silhouette;
      EXPECT_DOUBLE_EQ(d.agreement_ari, 1.0);
    }
  }
  EXPECT_GT(best, 0.5);
  std::multiset<std::string> profiles;
  for (const auto& cl : c.clusters) {
    EXPECT_EQ(cl.members.size(), 20u);
    profiles.insert(cl.profile);
  }
  EXPECT_EQ(profiles, (std::multiset<std::string>{"focused hardworker", "hardworker", "transient"}));
}

TEST(EngagementClustering, InvariantUnderInputOrder) {
  auto metrics = three_groups(4);
  auto a = gwap::cluster_engagement(metrics);
  std::mt19937_64 rng(2);
  std::shuffle(metrics.begin(), metrics.end(), rng);
  auto b = gwap::cluster_engagement(metrics);
  ASSERT_EQ(a.clusters.size(), b.clusters.size());
  for (std::size_t i = 0; i < a.clusters.size(); ++i) EXPECT_EQ(a.clusters[i].members, b.clusters[i].members);
}

TEST(EngagementClustering, DegenerateAndTooFew) {
  std::vector<gwap::EngagementMetrics> same(10);
  for (std::size_t i = 0; i < same.size(); ++i) same[i].player_id = "p" + std::to_string(i);
  try {
    gwap::cluster_engagement(same);
    FAIL();
  } catch (const gwap::Error& e) {
    EXPECT_EQ(e.code(), gwap::ErrorCode::DegenerateFeature);
  }
  auto few = three_groups(1);
  few.resize(5);
  try {
    gwap::cluster_engagement(few);
    FAIL();
  } catch (const gwap::Error& e) {
    EXPECT_EQ(e.code(), gwap::ErrorCode::TooFewPlayers);
  }
}

TEST(EngagementClustering, ConstantFeatureDroppedWithWarning) {
  auto metrics = three_groups(6);
  for (auto& m : metrics) m.daily_devoted_time = 0.5;
  auto c = gwap::cluster_engagement(metrics);
  EXPECT_EQ(c.dropped_features, (std::vector<std::string>{"daily_devoted_time"}));
  EXPECT_EQ(c.warnings.size(), 1u);
}

TEST(ActiveTime, Quantiles) {
  std::vector<std::string> rows;
  // spans 0, 100, 200, 1000, 100000 seconds
  const gwap::Timestamp spans[] = {0, 100, 200, 1000, 100'000};
  for (int i = 0; i < 5; ++i) {
    const std::string p = "p" + std::to_string(i);
    rows.push_back(row(kDay0, p, p + "a", p + "t1", 1));
    if (spans[i] > 0) rows.push_back(row(kDay0 + spans[i], p, p + "b", p + "t2", 1));
  }
  auto s = gwap::active_time_summary(log_of(rows));
  EXPECT_EQ(s.players, 5u);
  EXPECT_DOUBLE_EQ(s.p50, 200.0);
  EXPECT_DOUBLE_EQ(s.p25, 100.0);
  EXPECT_DOUBLE_EQ(s.p75, 1000.0);
  EXPECT_DOUBLE_EQ(s.fraction_under_5_minutes, 0.6);
  EXPECT_DOUBLE_EQ(s.fraction_over_1_day, 0.2);
}

}  // namespace
