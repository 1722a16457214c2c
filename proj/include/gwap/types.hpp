#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "gwap/error.hpp"

namespace gwap {

using Timestamp = std::int64_t;  // UTC epoch seconds
using PlayerIndex = std::uint32_t;
using RoundIndex = std::uint32_t;
using TaskIndex = std::uint32_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

/// Index into a CategorySet.
struct CategoryId {
  std::uint16_t value = 0;
  friend constexpr auto operator<=>(CategoryId, CategoryId) = default;
};

/// Closed, ordered set of answer labels.
class CategorySet {
 public:
  CategorySet() : CategorySet(default_names()) {}

  explicit CategorySet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) {
      throw Error(ErrorCode::InvalidConfig, "category set needs at least two names");
    }
    auto sorted = names_;
    std::ranges::sort(sorted);
    if (std::ranges::adjacent_find(sorted) != sorted.end()) {
      throw Error(ErrorCode::InvalidConfig, "duplicate category name");
    }
    for (const auto& n : names_) {
      if (n.empty()) throw Error(ErrorCode::InvalidConfig, "empty category name");
    }
  }

  static std::vector<std::string> default_names() {
    return {"Black", "City", "Stars", "Aurora", "ISS", "None"};
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(CategoryId id) const { return names_.at(id.value); }

  std::optional<CategoryId> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return CategoryId{static_cast<std::uint16_t>(i)};
    }
    return std::nullopt;
  }

  CategoryId at(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw Error(ErrorCode::UnknownCategory, "'" + std::string(name) + "' is not a configured category");
  }

  friend bool operator==(const CategorySet&, const CategorySet&) = default;

 private:
  std::vector<std::string> names_;
};

enum class Motivation { intrinsic, extrinsic };

inline std::string_view to_string(Motivation m) noexcept {
  return m == Motivation::intrinsic ? "intrinsic" : "extrinsic";
}

/// Half-open time window [start, end) with an incentive regime.
struct IncentivePeriod {
  std::string name;
  Timestamp start = 0;
  Timestamp end = 0;
  Motivation motivation = Motivation::intrinsic;

  bool contains(Timestamp t) const noexcept { return t >= start && t < end; }
  friend bool operator==(const IncentivePeriod&, const IncentivePeriod&) = default;
};

/// One answer exactly as it appears in the log, with ids as strings.
struct ContributionEvent {
  Timestamp timestamp = 0;
  std::string player_id;
  std::string round_id;
  std::string task_id;
  CategoryId answer;
  bool is_control = false;
  std::optional<CategoryId> control_truth;

  friend bool operator==(const ContributionEvent&, const ContributionEvent&) = default;
};

/// Interned form used by the analysis code. Indices are assigned in
/// lexicographic order of the ids, so comparing indices compares ids.
struct Event {
  Timestamp timestamp = 0;
  PlayerIndex player = 0;
  RoundIndex round = 0;
  TaskIndex task = 0;
  CategoryId answer;
  bool is_control = false;
  std::optional<CategoryId> control_truth;

  friend bool operator==(const Event&, const Event&) = default;
};

struct RoundRecord {
  std::string round_id;
  RoundIndex round = 0;
  std::vector<PlayerIndex> players;  // 1 or 2, sorted
  Timestamp start_time = 0;
  Timestamp duration = 60;
  std::size_t event_count = 0;
};

inline constexpr std::uint16_t kNoPeriod = 0xffff;

/// Immutable, validated and time-ordered contribution log.
///
/// Events are sorted by (timestamp, round_id, player_id, task_id). Period
/// labels are empty until assign_periods() produces a labelled copy.
class EventLog {
 public:
  EventLog() = default;

  /// Validates and sorts raw events. Throws DuplicatePlayerTask,
  /// ControlWithoutTruth or UnknownCategory (answers out of range).
  static EventLog build(std::vector<ContributionEvent> raw, CategorySet categories) {
    EventLog log;
    log.categories_ = std::move(categories);
    const auto ncat = log.categories_.size();

    auto intern = [](std::vector<std::string> ids) {
      std::ranges::sort(ids);
      auto [first, last] = std::ranges::unique(ids);
      ids.erase(first, last);
      return ids;
    };
    std::vector<std::string> players, rounds, tasks;
    players.reserve(raw.size());
    rounds.reserve(raw.size());
    tasks.reserve(raw.size());
    for (const auto& e : raw) {
      if (e.answer.value >= ncat) {
        throw Error(ErrorCode::UnknownCategory, "answer index out of range for task " + e.task_id);
      }
      if (e.is_control != e.control_truth.has_value()) {
        throw Error(ErrorCode::ControlWithoutTruth,
                    "control flag and control truth disagree for task " + e.task_id);
      }
      if (e.control_truth && e.control_truth->value >= ncat) {
        throw Error(ErrorCode::UnknownCategory, "control truth out of range for task " + e.task_id);
      }
      players.push_back(e.player_id);
      rounds.push_back(e.round_id);
      tasks.push_back(e.task_id);
    }
    log.players_ = intern(std::move(players));
    log.rounds_ = intern(std::move(rounds));
    log.tasks_ = intern(std::move(tasks));

    auto index_of = [](const std::vector<std::string>& table, const std::string& id) {
      auto it = std::ranges::lower_bound(table, id);
      return static_cast<std::uint32_t>(it - table.begin());
    };
    log.events_.reserve(raw.size());
    for (const auto& e : raw) {
      log.events_.push_back(Event{e.timestamp, index_of(log.players_, e.player_id),
                                  index_of(log.rounds_, e.round_id), index_of(log.tasks_, e.task_id),
                                  e.answer, e.is_control, e.control_truth});
    }
    std::ranges::sort(log.events_, [](const Event& a, const Event& b) {
      return std::tie(a.timestamp, a.round, a.player, a.task) <
             std::tie(b.timestamp, b.round, b.player, b.task);
    });

    // Never-twice rule: a player sees a task at most once.
    std::vector<std::pair<PlayerIndex, TaskIndex>> seen;
    seen.reserve(log.events_.size());
    for (const auto& e : log.events_) seen.emplace_back(e.player, e.task);
    std::ranges::sort(seen);
    if (auto it = std::ranges::adjacent_find(seen); it != seen.end()) {
      throw Error(ErrorCode::DuplicatePlayerTask,
                  "player " + log.players_[it->first] + " answered task " + log.tasks_[it->second] +
                      " more than once");
    }

    // A task id is either always a control (with one truth) or never.
    {
      std::vector<std::pair<TaskIndex, int>> kinds;
      kinds.reserve(log.events_.size());
      for (const auto& e : log.events_) {
        kinds.emplace_back(e.task, e.control_truth ? e.control_truth->value : -1);
      }
      std::ranges::sort(kinds);
      auto [first, last] = std::ranges::unique(kinds);
      kinds.erase(first, last);
      if (auto it = std::ranges::adjacent_find(kinds, {}, &std::pair<TaskIndex, int>::first); it != kinds.end()) {
        throw Error(ErrorCode::MalformedRow, "task " + log.tasks_[it->first] +
                                                 " mixes control and regular rows or has conflicting truths");
      }
    }

    return log;
  }

  const CategorySet& categories() const noexcept { return categories_; }
  std::span<const Event> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  const std::vector<std::string>& player_ids() const noexcept { return players_; }
  const std::vector<std::string>& round_ids() const noexcept { return rounds_; }
  const std::vector<std::string>& task_ids() const noexcept { return tasks_; }
  std::size_t player_count() const noexcept { return players_.size(); }
  std::size_t round_count() const noexcept { return rounds_.size(); }
  std::size_t task_count() const noexcept { return tasks_.size(); }

  std::optional<PlayerIndex> find_player(std::string_view id) const { return find(players_, id); }
  std::optional<TaskIndex> find_task(std::string_view id) const { return find(tasks_, id); }

  /// String form of event i.
  ContributionEvent contribution(std::size_t i) const {
    const auto& e = events_.at(i);
    return {e.timestamp, players_[e.player], rounds_[e.round], tasks_[e.task],
            e.answer,    e.is_control,       e.control_truth};
  }

  // Period labelling (set by assign_periods).
  bool has_periods() const noexcept { return !periods_.empty(); }
  const std::vector<IncentivePeriod>& periods() const noexcept { return periods_; }
  std::uint16_t period_of(std::size_t event_index) const {
    return period_labels_.empty() ? kNoPeriod : period_labels_[event_index];
  }
  std::span<const std::uint16_t> period_labels() const noexcept { return period_labels_; }

  std::optional<std::uint16_t> period_index_of(Timestamp t) const {
    for (std::size_t i = 0; i < periods_.size(); ++i) {
      if (periods_[i].contains(t)) return static_cast<std::uint16_t>(i);
    }
    return std::nullopt;
  }

  EventLog with_periods(std::vector<IncentivePeriod> periods, std::vector<std::uint16_t> labels) const {
    EventLog copy = *this;
    copy.periods_ = std::move(periods);
    copy.period_labels_ = std::move(labels);
    return copy;
  }

 private:
  static std::optional<std::uint32_t> find(const std::vector<std::string>& table, std::string_view id) {
    auto it = std::ranges::lower_bound(table, id, {}, [](const std::string& s) { return std::string_view(s); });
    if (it == table.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - table.begin());
  }

  CategorySet categories_;
  std::vector<Event> events_;
  std::vector<std::string> players_;
  std::vector<std::string> rounds_;
  std::vector<std::string> tasks_;
  std::vector<IncentivePeriod> periods_;
  std::vector<std::uint16_t> period_labels_;
};

}  // namespace gwap
