#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwap/error.hpp"
#include "gwap/profiles.hpp"
#include "gwap/stats/descriptive.hpp"
#include "gwap/stats/tests.hpp"
#include "gwap/truth_inference.hpp"
#include "gwap/types.hpp"

namespace gwap {

enum class Grouping { incentive, difficulty, category };

inline std::string_view to_string(Grouping g) noexcept {
  switch (g) {
    case Grouping::incentive: return "incentive";
    case Grouping::difficulty: return "difficulty";
    case Grouping::category: return "category";
  }
  return "?";
}

struct GroupSample {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> sd;
};

struct GroupComparison {
  std::string group;  // "intrinsic", "easy", "City", ...
  GroupSample casual;
  GroupSample frequent;
  std::optional<stats::TestResult> welch;
  std::optional<stats::TestResult> wilcoxon;
  std::vector<std::string> errors;
};

struct ComparisonReport {
  Grouping grouping = Grouping::incentive;
  double median_participation = 0.0;
  std::vector<GroupComparison> comparisons;
};

namespace detail {

inline GroupSample sample_summary(std::span<const double> xs) {
  GroupSample s;
  s.n = xs.size();
  if (!xs.empty()) s.mean = stats::mean(xs);
  if (xs.size() >= 2) s.sd = stats::sample_sd(xs);
  return s;
}

inline GroupComparison compare_restricted(const EventLog& log, std::span<const TaskResolution> resolutions,
                                          const CasualFrequentSplit& split, std::string group,
                                          const std::function<bool(std::size_t)>& include) {
  const auto tallies = accuracy_tallies(log, resolutions, include);
  auto collect = [&](std::span<const PlayerIndex> players) {
    std::vector<double> xs;
    for (auto p : players) {
      if (auto r = tallies[p].ratio()) xs.push_back(*r);
    }
    return xs;
  };
  const auto casual = collect(split.casual);
  const auto frequent = collect(split.frequent);
  GroupComparison c;
  c.group = std::move(group);
  c.casual = sample_summary(casual);
  c.frequent = sample_summary(frequent);
  try {
    c.welch = stats::welch_t(casual, frequent);
  } catch (const Error& e) {
    c.errors.push_back(std::string("welch_t: ") + e.what());
  }
  try {
    c.wilcoxon = stats::wilcoxon_rank_sum(casual, frequent);
  } catch (const Error& e) {
    c.errors.push_back(std::string("wilcoxon_rank_sum: ") + e.what());
  }
  return c;
}

}  // namespace detail

/// Casual versus frequent accuracy within each group. Players are split at the
/// cohort's participation median; each player's accuracy is recomputed over
/// the group's events only. Easy tasks are those solved with the minimum
/// number of contributions.
inline ComparisonReport compare_groups(const EventLog& log, std::span<const TaskResolution> resolutions,
                                       std::span<const PlayerAxes> axes, Grouping grouping,
                                       const InferenceConfig& config = {}) {
  ComparisonReport report;
  report.grouping = grouping;
  const auto split = casual_frequent_split(axes);
  report.median_participation = split.median_participation;
  const auto events = log.events();

  switch (grouping) {
    case Grouping::incentive:
      for (auto regime : {Motivation::intrinsic, Motivation::extrinsic}) {
        report.comparisons.push_back(
            detail::compare_restricted(log, resolutions, split, std::string(to_string(regime)), [&](std::size_t i) {
              const auto p = log.period_of(i);
              return p != kNoPeriod && log.periods()[p].motivation == regime;
            }));
      }
      break;
    case Grouping::difficulty:
      for (bool easy : {true, false}) {
        report.comparisons.push_back(
            detail::compare_restricted(log, resolutions, split, easy ? "easy" : "difficult", [&](std::size_t i) {
              const auto& r = resolutions[events[i].task];
              if (events[i].is_control || !r.difficulty) return false;
              return (*r.difficulty <= config.min_contributions) == easy;
            }));
      }
      break;
    case Grouping::category:
      for (std::uint16_t c = 0; c < log.categories().size(); ++c) {
        report.comparisons.push_back(detail::compare_restricted(
            log, resolutions, split, std::string(log.categories().name(CategoryId{c})), [&](std::size_t i) {
              const auto& r = resolutions[events[i].task];
              return !events[i].is_control && r.final_category == CategoryId{c};
            }));
      }
      break;
  }
  return report;
}

/// Solved regular tasks by final category and difficulty.
struct DifficultyHistogram {
  std::vector<std::string> categories;
  std::vector<std::map<std::size_t, std::size_t>> counts;  // per category: difficulty -> tasks
};

inline DifficultyHistogram difficulty_by_category(const EventLog& log, std::span<const TaskResolution> resolutions) {
  DifficultyHistogram h;
  for (const auto& name : log.categories().names()) h.categories.push_back(name);
  h.counts.resize(h.categories.size());
  for (const auto& r : resolutions) {
    if (r.is_control || !r.solved() || !r.difficulty || !r.final_category) continue;
    ++h.counts[r.final_category->value][*r.difficulty];
  }
  return h;
}

}  // namespace gwap
