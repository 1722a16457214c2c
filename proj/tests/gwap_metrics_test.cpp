#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "gwap/gwap_metrics.hpp"
#include "gwap/ingest.hpp"

namespace {

using fixtures::log_of;
using fixtures::row;

constexpr gwap::Timestamp kDay0 = 1'514'764'800;  // 2018-01-01 UTC

// Ten rounds, each played by the same two players who each answer one image.
TEST(PlayTime, TenTwoPlayerRounds) {
  std::vector<std::string> rows;
  for (int r = 0; r < 10; ++r) {
    const auto t = kDay0 + r * 100;
    rows.push_back(row(t, "a", "r" + std::to_string(r), "t" + std::to_string(r), 1));
    rows.push_back(row(t + 3, "b", "r" + std::to_string(r), "u" + std::to_string(r), 1));
  }
  auto log = log_of(rows);
  auto rounds = gwap::build_rounds(log);
  EXPECT_NEAR(gwap::play_time_hours(log, rounds), 1.0 / 3.0, 1e-12);
}

TEST(Formulas, WorkedValues) {
  EXPECT_DOUBLE_EQ(gwap::throughput(10, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(gwap::alp(2.0, 4), 30.0);
  EXPECT_NEAR(gwap::ec(24'600, 174), 141.4, 0.05);
  EXPECT_NEAR(gwap::ec(1'830, 285), 6.42, 0.005);
  EXPECT_THROW(gwap::throughput(3, 0.0), gwap::Error);
  EXPECT_THROW(gwap::alp(1.0, 0), gwap::Error);
  EXPECT_THROW(gwap::ec(3, 0), gwap::Error);
}

// Tasks solved by unanimous quartets of players spread over `days` days.
gwap::EventLog quartet_log(std::mt19937_64& rng, int days, int players) {
  std::vector<std::string> rows;
  int task = 0, round = 0;
  for (int d = 0; d < days; ++d) {
    const int tasks_today = static_cast<int>(rng() % 6);
    for (int k = 0; k < tasks_today; ++k, ++task) {
      std::vector<int> who(players);
      std::iota(who.begin(), who.end(), 0);
      std::shuffle(who.begin(), who.end(), rng);
      const int answered = 1 + static_cast<int>(rng() % 5);
      for (int j = 0; j < answered; ++j, ++round) {
        const auto t = kDay0 + d * gwap::kSecondsPerDay + 3600 + task * 7 + j * 90;
        rows.push_back(row(t, "p" + std::to_string(who[j]), "r" + std::to_string(round), "t" + std::to_string(task), 2));
      }
    }
  }
  rows.push_back(row(kDay0 + days * gwap::kSecondsPerDay - 10, "p0", "last", "tz", 1));
  return log_of(rows);
}

gwap::EventLog with_three_periods(const gwap::EventLog& log, int days) {
  const gwap::Timestamp a = kDay0 + days / 3 * gwap::kSecondsPerDay;
  const gwap::Timestamp b = kDay0 + 2 * days / 3 * gwap::kSecondsPerDay;
  return gwap::assign_periods(log, {{"before", kDay0, a, gwap::Motivation::intrinsic},
                                    {"during", a, b, gwap::Motivation::extrinsic},
                                    {"after", b, kDay0 + days * gwap::kSecondsPerDay, gwap::Motivation::intrinsic}});
}

TEST(MetricsTable, EcEqualsThroughputTimesAlp) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto log = with_three_periods(quartet_log(rng, 9, 7), 9);
    auto rounds = gwap::build_rounds(log);
    auto res = gwap::resolve_all(log, {});
    for (const auto& m : gwap::gwap_metrics_table(log, rounds, res)) {
      if (!m.throughput || !m.alp || !m.ec) continue;
      EXPECT_NEAR(*m.ec, *m.throughput * *m.alp / 60.0, 1e-9 * (1.0 + *m.ec)) << m.period;
    }
  }
}

TEST(MetricsTable, PeriodsPartitionTheGlobalTotals) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto log = with_three_periods(quartet_log(rng, 12, 9), 12);
    auto rounds = gwap::build_rounds(log);
    auto res = gwap::resolve_all(log, {});
    auto table = gwap::gwap_metrics_table(log, rounds, res);
    ASSERT_EQ(table.size(), 4u);
    EXPECT_EQ(table[0].period, "before");
    EXPECT_EQ(table[3].period, "global");
    std::size_t images = 0, contributions = 0, users = 0;
    double hours = 0.0;
    for (int p = 0; p < 3; ++p) {
      images += table[p].classified_images;
      contributions += table[p].contributions;
      users += table[p].users;
      hours += table[p].total_play_time_hours;
    }
    EXPECT_EQ(images, table[3].classified_images);
    EXPECT_EQ(contributions, table[3].contributions);
    EXPECT_GE(users, table[3].users);
    EXPECT_NEAR(hours, table[3].total_play_time_hours, 1e-9);
  }
}

TEST(DailySeries, ConservesSolvedTasks) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto log = quartet_log(rng, 10, 6);
    auto res = gwap::resolve_all(log, {});
    auto series = gwap::daily_solved_series(log, res);
    EXPECT_LE(series.size(), 10u);
    std::size_t total = 0;
    for (const auto& d : series) {
      EXPECT_EQ(d.day_start % gwap::kSecondsPerDay, 0);
      total += d.solved;
    }
    EXPECT_EQ(total, gwap::solved_tasks(log, res));
  }
}

TEST(DailySeries, GapDaysAreExplicitZeros) {
  std::vector<std::string> rows;
  for (int i = 0; i < 4; ++i) rows.push_back(row(kDay0 + 10 + i, "p" + std::to_string(i), "r" + std::to_string(i), "t", 1));
  rows.push_back(row(kDay0 + 3 * gwap::kSecondsPerDay + 5, "p0", "rx", "u", 1));
  auto log = log_of(rows);
  auto series = gwap::daily_solved_series(log, gwap::resolve_all(log, {}));
  ASSERT_EQ(series.size(), 4u);
  EXPECT_EQ(series[0].solved, 1u);
  EXPECT_EQ(series[1].solved, 0u);
  EXPECT_EQ(series[2].solved, 0u);
  EXPECT_EQ(series[3].solved, 0u);
}

TEST(Speed, FifteenImagesInOneRound) {
  std::vector<std::string> rows;
  for (int i = 0; i < 15; ++i) rows.push_back(row(kDay0 + 3 * i, "solo", "r1", "t" + std::to_string(i), 0));
  auto log = log_of(rows);
  auto h = gwap::contribution_speed(log, gwap::build_rounds(log));
  EXPECT_EQ(h.counts, (std::map<std::size_t, std::size_t>{{15, 1}}));
  EXPECT_EQ(h.rounds, 1u);
  EXPECT_DOUBLE_EQ(h.median, 15.0);
}

TEST(Speed, TwoPlayersCountSeparately) {
  std::vector<std::string> rows;
  for (int i = 0; i < 3; ++i) rows.push_back(row(kDay0 + i, "a", "r1", "t" + std::to_string(i), 0));
  for (int i = 0; i < 5; ++i) rows.push_back(row(kDay0 + i, "b", "r1", "u" + std::to_string(i), 0));
  auto log = log_of(rows);
  auto h = gwap::contribution_speed(log, gwap::build_rounds(log));
  EXPECT_EQ(h.counts, (std::map<std::size_t, std::size_t>{{3, 1}, {5, 1}}));
  EXPECT_DOUBLE_EQ(h.mean, 4.0);
}

TEST(UtcDay, FloorsTowardsNegativeInfinity) {
  EXPECT_EQ(gwap::utc_day(0), 0);
  EXPECT_EQ(gwap::utc_day(86'399), 0);
  EXPECT_EQ(gwap::utc_day(86'400), 1);
  EXPECT_EQ(gwap::utc_day(-1), -1);
}

}  // namespace
