#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gwap/error.hpp"
#include "gwap/stats/descriptive.hpp"
#include "gwap/types.hpp"

namespace gwap {

struct PlayerAxes {
  PlayerIndex player = 0;
  std::string player_id;
  std::size_t participation = 0;  // every contribution event, controls included
  double accuracy = 0.0;
};

struct AxesTable {
  std::vector<PlayerAxes> players;  // ordered by player id
  std::size_t excluded = 0;         // active players without a defined accuracy
};

inline AxesTable compute_axes(const EventLog& log, std::span<const std::optional<double>> accuracies) {
  std::vector<std::size_t> participation(log.player_count(), 0);
  for (const auto& e : log.events()) ++participation[e.player];
  AxesTable table;
  for (PlayerIndex p = 0; p < log.player_count(); ++p) {
    if (participation[p] == 0) continue;
    if (p >= accuracies.size() || !accuracies[p]) {
      ++table.excluded;
      continue;
    }
    table.players.push_back({p, log.player_ids()[p], participation[p], *accuracies[p]});
  }
  return table;
}

enum class Profile : std::uint8_t { beginner, sniper, champion, troll };
inline constexpr std::array kProfiles{Profile::beginner, Profile::sniper, Profile::champion, Profile::troll};

inline std::string_view to_string(Profile p) noexcept {
  switch (p) {
    case Profile::beginner: return "Beginner";
    case Profile::sniper: return "Sniper";
    case Profile::champion: return "Champion";
    case Profile::troll: return "Troll";
  }
  return "?";
}

struct Thresholds {
  double participation = 0.0;
  double accuracy = 0.0;
  bool operator==(const Thresholds&) const = default;
};

inline Thresholds median_thresholds(std::span<const PlayerAxes> axes) {
  if (axes.empty()) throw Error(ErrorCode::EmptyPopulation, "no players to profile");
  std::vector<double> part, acc;
  for (const auto& a : axes) {
    part.push_back(static_cast<double>(a.participation));
    acc.push_back(a.accuracy);
  }
  return {stats::median(std::move(part)), stats::median(std::move(acc))};
}

/// Values equal to a threshold fall in the low half.
inline Profile classify(std::size_t participation, double accuracy, const Thresholds& t) noexcept {
  const bool frequent = static_cast<double>(participation) > t.participation;
  const bool accurate = accuracy > t.accuracy;
  if (frequent) return accurate ? Profile::champion : Profile::troll;
  return accurate ? Profile::sniper : Profile::beginner;
}

struct ProfileAssignment {
  PlayerIndex player = 0;
  std::string player_id;
  std::size_t participation = 0;
  double accuracy = 0.0;
  Profile profile = Profile::beginner;
  Thresholds thresholds;
};

inline std::vector<ProfileAssignment> assign_profiles(std::span<const PlayerAxes> axes,
                                                      std::optional<Thresholds> thresholds = std::nullopt) {
  if (axes.empty()) throw Error(ErrorCode::EmptyPopulation, "no players to profile");
  const auto t = thresholds ? *thresholds : median_thresholds(axes);
  std::vector<ProfileAssignment> out;
  out.reserve(axes.size());
  for (const auto& a : axes) {
    out.push_back({a.player, a.player_id, a.participation, a.accuracy, classify(a.participation, a.accuracy, t), t});
  }
  return out;
}

struct ProfileDistribution {
  std::size_t players = 0;
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> fractions{};

  double share(Profile p) const { return fractions[static_cast<std::size_t>(p)]; }
};

inline ProfileDistribution profile_distribution(std::span<const ProfileAssignment> assignments) {
  ProfileDistribution d;
  for (const auto& a : assignments) ++d.counts[static_cast<std::size_t>(a.profile)];
  d.players = assignments.size();
  if (d.players > 0) {
    for (std::size_t i = 0; i < 4; ++i) d.fractions[i] = static_cast<double>(d.counts[i]) / static_cast<double>(d.players);
  }
  return d;
}

/// Fraction of the profiled players' contributions made by each profile.
inline std::array<double, 4> contribution_share(std::span<const ProfileAssignment> assignments) {
  std::array<double, 4> sums{};
  double total = 0.0;
  for (const auto& a : assignments) {
    sums[static_cast<std::size_t>(a.profile)] += static_cast<double>(a.participation);
    total += static_cast<double>(a.participation);
  }
  if (total > 0.0) {
    for (auto& s : sums) s /= total;
  }
  return sums;
}

// ---------------------------------------------------------------------------
// Distributions by incentive period

enum class ThresholdMode { global, per_period };

struct PopulationProfiles {
  std::string population;  // period name, motivation regime name, or "total"
  Thresholds thresholds;
  ProfileDistribution distribution;
};

/// Profile distributions for the whole cohort, each motivation regime and each
/// period. Membership is "active in the period"; every member keeps the axes
/// computed over the whole log. In global mode the cohort medians classify
/// every population; in per-period mode the medians are recomputed over the
/// population's members.
inline std::vector<PopulationProfiles> period_profile_distributions(const EventLog& log, std::span<const PlayerAxes> axes,
                                                                    ThresholdMode mode = ThresholdMode::global) {
  const auto global = median_thresholds(axes);
  const auto& periods = log.periods();
  std::vector<std::vector<char>> active(periods.size(), std::vector<char>(log.player_count(), 0));
  const auto events = log.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (auto p = log.period_of(i); p != kNoPeriod) active[p][events[i].player] = 1;
  }

  auto population = [&](std::string name, auto&& member) {
    std::vector<PlayerAxes> subset;
    for (const auto& a : axes) {
      if (member(a.player)) subset.push_back(a);
    }
    PopulationProfiles out{std::move(name), global, {}};
    if (subset.empty()) return out;
    if (mode == ThresholdMode::per_period) out.thresholds = median_thresholds(subset);
    out.distribution = profile_distribution(assign_profiles(subset, out.thresholds));
    return out;
  };

  std::vector<PopulationProfiles> out;
  out.push_back(population("total", [](PlayerIndex) { return true; }));
  for (auto regime : {Motivation::intrinsic, Motivation::extrinsic}) {
    out.push_back(population(std::string(to_string(regime)), [&](PlayerIndex p) {
      for (std::size_t k = 0; k < periods.size(); ++k) {
        if (periods[k].motivation == regime && active[k][p]) return true;
      }
      return false;
    }));
  }
  for (std::size_t k = 0; k < periods.size(); ++k) {
    out.push_back(population(periods[k].name, [&](PlayerIndex p) { return active[k][p] != 0; }));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Casual and frequent players

struct CasualFrequentSplit {
  double median_participation = 0.0;
  std::vector<PlayerIndex> casual;    // participation <= median
  std::vector<PlayerIndex> frequent;  // participation > median
};

inline CasualFrequentSplit casual_frequent_split(std::span<const PlayerAxes> axes) {
  CasualFrequentSplit s;
  s.median_participation = median_thresholds(axes).participation;
  for (const auto& a : axes) {
    (static_cast<double>(a.participation) > s.median_participation ? s.frequent : s.casual).push_back(a.player);
  }
  return s;
}

}  // namespace gwap
