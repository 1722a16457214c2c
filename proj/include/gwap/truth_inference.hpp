#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwap/error.hpp"
#include "gwap/types.hpp"

namespace gwap {

struct InferenceConfig {
  double alpha = 1.0;                 // Laplace smoothing of control accuracy
  std::size_t min_contributions = 4;  // distinct players before a task may be solved
  std::size_t max_contributions = 17; // cap; reaching it unsolved gives up
  double agreement_fraction = 0.75;   // required weight share of the winning label
  double prior_reliability = 0.5;     // weight before any control in the round
  bool cumulative_reliability = false;  // carry control counts across rounds

  void validate() const {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidConfig, "alpha must be positive");
    if (min_contributions < 2) throw Error(ErrorCode::InvalidConfig, "min_contributions must be >= 2");
    if (max_contributions < min_contributions) {
      throw Error(ErrorCode::InvalidConfig, "max_contributions must be >= min_contributions");
    }
    if (!(agreement_fraction > 0.5 && agreement_fraction <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "agreement_fraction must be in (0.5, 1]");
    }
    if (!(prior_reliability > 0.0 && prior_reliability <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "prior_reliability must be in (0, 1]");
    }
  }

  friend bool operator==(const InferenceConfig&, const InferenceConfig&) = default;
};

inline nlohmann::json to_json(const InferenceConfig& c) {
  return {{"alpha", c.alpha},
          {"min_contributions", c.min_contributions},
          {"max_contributions", c.max_contributions},
          {"agreement_fraction", c.agreement_fraction},
          {"prior_reliability", c.prior_reliability},
          {"cumulative_reliability", c.cumulative_reliability}};
}

inline InferenceConfig parse_inference_config(const nlohmann::json& doc) {
  InferenceConfig c;
  c.alpha = doc.value("alpha", c.alpha);
  c.min_contributions = doc.value("min_contributions", c.min_contributions);
  c.max_contributions = doc.value("max_contributions", c.max_contributions);
  c.agreement_fraction = doc.value("agreement_fraction", c.agreement_fraction);
  c.prior_reliability = doc.value("prior_reliability", c.prior_reliability);
  c.cumulative_reliability = doc.value("cumulative_reliability", c.cumulative_reliability);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Reliability

inline double smoothed_reliability(std::size_t correct, std::size_t seen, double alpha) {
  return (static_cast<double>(correct) + alpha) / (static_cast<double>(seen) + 2.0 * alpha);
}

struct ReliabilitySnapshot {
  std::string player_id;
  std::string round_id;
  std::size_t controls_seen = 0;
  std::size_t controls_correct = 0;
  double reliability = 0.5;
};

inline ReliabilitySnapshot update_reliability(ReliabilitySnapshot s, bool control_correct, double alpha = 1.0) {
  ++s.controls_seen;
  if (control_correct) ++s.controls_correct;
  s.reliability = smoothed_reliability(s.controls_correct, s.controls_seen, alpha);
  return s;
}

// ---------------------------------------------------------------------------
// Stopping rule

struct Decision {
  enum class Kind { keep_going, solve, give_up };
  Kind kind = Kind::keep_going;
  std::optional<CategoryId> category;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// solve(c) iff enough distinct players, c is the unique weight argmax and
/// holds at least the agreement fraction of the total weight; give_up once
/// the contribution cap is hit without a solve.
inline Decision stopping_rule(std::span<const double> tally, std::size_t distinct_players,
                              std::size_t contributions_used, const InferenceConfig& config) {
  double total = 0.0;
  std::size_t top = 0;
  bool unique = true;
  for (std::size_t c = 0; c < tally.size(); ++c) {
    total += tally[c];
    if (c == 0) continue;
    if (tally[c] > tally[top]) {
      top = c;
      unique = true;
    } else if (tally[c] == tally[top]) {
      unique = false;
    }
  }
  if (distinct_players >= config.min_contributions && unique && total > 0.0 &&
      tally[top] >= config.agreement_fraction * total * (1.0 - 1e-12)) {
    return {Decision::Kind::solve, CategoryId{static_cast<std::uint16_t>(top)}};
  }
  if (contributions_used >= config.max_contributions) return {Decision::Kind::give_up, std::nullopt};
  return {};
}

// ---------------------------------------------------------------------------
// Task resolutions

enum class TaskStatus { pending, solved, unresolved };

inline std::string_view to_string(TaskStatus s) noexcept {
  switch (s) {
    case TaskStatus::pending: return "pending";
    case TaskStatus::solved: return "solved";
    case TaskStatus::unresolved: return "unresolved";
  }
  return "pending";
}

struct TaskResolution {
  TaskIndex task = 0;
  bool is_control = false;
  TaskStatus status = TaskStatus::pending;
  std::optional<CategoryId> final_category;
  std::size_t contributions_used = 0;
  std::size_t distinct_players = 0;
  std::optional<Timestamp> solved_at;
  std::optional<std::size_t> difficulty;  // regular tasks only, = contributions_used at solve
  std::optional<Timestamp> closed_at;     // solve or give-up instant
  std::size_t late_contributions = 0;     // received after the task closed

  bool solved() const noexcept { return status == TaskStatus::solved; }
};

/// Incremental truth inference. Feed events in log order; each call may
/// close a regular task (solve or give up).
class InferenceEngine {
 public:
  explicit InferenceEngine(std::size_t category_count, InferenceConfig config = {})
      : categories_(category_count), config_(config) {
    config_.validate();
  }

  const InferenceConfig& config() const noexcept { return config_; }

  /// Weight the engine would give `player` in `round` right now.
  double weight(PlayerIndex player, RoundIndex round) const {
    auto it = reliability_.find(key(player, round));
    if (it == reliability_.end() || it->second.seen == 0) return config_.prior_reliability;
    return smoothed_reliability(it->second.correct, it->second.seen, config_.alpha);
  }

  std::optional<TaskResolution> ingest(const Event& e) {
    auto& t = task(e.task);
    t.resolution.task = e.task;
    if (e.is_control) {
      auto& counts = reliability_[key(e.player, e.round)];
      ++counts.seen;
      if (e.answer == *e.control_truth) ++counts.correct;
      auto& r = t.resolution;
      r.is_control = true;
      r.status = TaskStatus::solved;
      r.final_category = e.control_truth;
      ++r.contributions_used;
      if (std::ranges::find(t.players, e.player) == t.players.end()) t.players.push_back(e.player);
      r.distinct_players = t.players.size();
      return std::nullopt;
    }

    auto& r = t.resolution;
    if (r.status != TaskStatus::pending) {
      ++r.late_contributions;
      return std::nullopt;
    }
    if (t.tally.empty()) t.tally.assign(categories_, 0.0);
    t.tally[e.answer.value] += weight(e.player, e.round);
    ++r.contributions_used;
    if (std::ranges::find(t.players, e.player) == t.players.end()) t.players.push_back(e.player);
    r.distinct_players = t.players.size();

    const auto decision = stopping_rule(t.tally, r.distinct_players, r.contributions_used, config_);
    switch (decision.kind) {
      case Decision::Kind::solve:
        r.status = TaskStatus::solved;
        r.final_category = decision.category;
        r.solved_at = e.timestamp;
        r.closed_at = e.timestamp;
        r.difficulty = r.contributions_used;
        t.tally = {};
        t.players = {};
        return r;
      case Decision::Kind::give_up:
        r.status = TaskStatus::unresolved;
        r.closed_at = e.timestamp;
        t.tally = {};
        t.players = {};
        return r;
      case Decision::Kind::keep_going:
        break;
    }
    return std::nullopt;
  }

  const TaskResolution* find(TaskIndex task) const {
    return task < tasks_.size() ? &tasks_[task].resolution : nullptr;
  }

  /// Resolutions for tasks 0..count-1.
  std::vector<TaskResolution> resolutions(std::size_t count) const {
    std::vector<TaskResolution> out(count);
    for (TaskIndex i = 0; i < count; ++i) {
      if (i < tasks_.size()) out[i] = tasks_[i].resolution;
      out[i].task = i;
    }
    return out;
  }

 private:
  struct Counts {
    std::size_t seen = 0;
    std::size_t correct = 0;
  };
  struct TaskState {
    TaskResolution resolution;
    std::vector<double> tally;
    std::vector<PlayerIndex> players;
  };

  std::uint64_t key(PlayerIndex player, RoundIndex round) const noexcept {
    const std::uint64_t r = config_.cumulative_reliability ? 0xffffffffu : round;
    return (static_cast<std::uint64_t>(player) << 32) | r;
  }

  TaskState& task(TaskIndex index) {
    if (index >= tasks_.size()) tasks_.resize(static_cast<std::size_t>(index) + 1);
    return tasks_[index];
  }

  std::size_t categories_;
  InferenceConfig config_;
  std::unordered_map<std::uint64_t, Counts> reliability_;
  std::vector<TaskState> tasks_;
};

/// Replays the whole log. Result is indexed by TaskIndex.
inline std::vector<TaskResolution> resolve_all(const EventLog& log, const InferenceConfig& config = {}) {
  InferenceEngine engine(log.categories().size(), config);
  for (const auto& e : log.events()) engine.ingest(e);
  return engine.resolutions(log.task_count());
}

// ---------------------------------------------------------------------------
// Player accuracy

struct AccuracyTally {
  std::size_t correct = 0;
  std::size_t counted = 0;

  std::optional<double> ratio() const {
    if (counted == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(counted);
  }
};

/// Per-player correct/counted answers against final solutions. Controls use
/// their known truth; tasks without a final solution are skipped. An optional
/// filter restricts which events count (by event index).
inline std::vector<AccuracyTally> accuracy_tallies(const EventLog& log, std::span<const TaskResolution> resolutions,
                                                   const std::function<bool(std::size_t)>& include = {}) {
  std::vector<AccuracyTally> tallies(log.player_count());
  const auto events = log.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    std::optional<CategoryId> truth = e.is_control ? e.control_truth : resolutions[e.task].final_category;
    if (!truth) continue;
    if (include && !include(i)) continue;
    auto& t = tallies[e.player];
    ++t.counted;
    if (e.answer == *truth) ++t.correct;
  }
  return tallies;
}

/// Accuracy per player (indexed by PlayerIndex); nullopt when the player has
/// no task with a final solution.
inline std::vector<std::optional<double>> player_accuracy(const EventLog& log,
                                                          std::span<const TaskResolution> resolutions) {
  std::vector<std::optional<double>> out;
  for (const auto& t : accuracy_tallies(log, resolutions)) out.push_back(t.ratio());
  return out;
}

inline void write_resolutions_csv(const EventLog& log, std::span<const TaskResolution> resolutions,
                                  std::ostream& out) {
  out << "task_id,status,final_category,contributions_used,distinct_players,difficulty,solved_at\n";
  for (const auto& r : resolutions) {
    out << log.task_ids().at(r.task) << ',' << to_string(r.status) << ',';
    if (r.final_category) out << log.categories().name(*r.final_category);
    out << ',' << r.contributions_used << ',' << r.distinct_players << ',';
    if (r.difficulty) out << *r.difficulty;
    out << ',';
    if (r.solved_at) out << *r.solved_at;
    out << '\n';
  }
}

}  // namespace gwap
