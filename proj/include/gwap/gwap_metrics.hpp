#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gwap/error.hpp"
#include "gwap/stats/descriptive.hpp"
#include "gwap/truth_inference.hpp"
#include "gwap/types.hpp"

namespace gwap {

/// Selects one period (by index into log.periods()) or the whole log.
using PeriodFilter = std::optional<std::uint16_t>;

namespace detail {

inline bool in_scope(const EventLog& log, Timestamp t, PeriodFilter period) {
  if (!period) return true;
  return log.period_index_of(t) == period;
}

}  // namespace detail

/// Human play time in hours: every (player, round) participation counts one
/// full round duration. Rounds are attributed by start time.
inline double play_time_hours(const EventLog& log, std::span<const RoundRecord> rounds, PeriodFilter period = {}) {
  double seconds = 0.0;
  for (const auto& r : rounds) {
    if (detail::in_scope(log, r.start_time, period)) {
      seconds += static_cast<double>(r.players.size()) * static_cast<double>(r.duration);
    }
  }
  return seconds / 3600.0;
}

/// Regular tasks solved inside the scope (by solve instant).
inline std::size_t solved_tasks(const EventLog& log, std::span<const TaskResolution> resolutions,
                                PeriodFilter period = {}) {
  std::size_t n = 0;
  for (const auto& r : resolutions) {
    if (r.solved() && !r.is_control && r.solved_at && detail::in_scope(log, *r.solved_at, period)) ++n;
  }
  return n;
}

inline std::size_t active_users(const EventLog& log, PeriodFilter period = {}) {
  std::vector<char> seen(log.player_count(), 0);
  const auto events = log.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!period || log.period_of(i) == *period) seen[events[i].player] = 1;
  }
  return static_cast<std::size_t>(std::ranges::count(seen, 1));
}

inline double throughput(std::size_t solved, double play_hours) {
  if (play_hours <= 0.0) throw Error(ErrorCode::ZeroPlayTime, "throughput needs positive play time");
  return static_cast<double>(solved) / play_hours;
}

/// Average life play in minutes per user.
inline double alp(double play_hours, std::size_t users) {
  if (users == 0) throw Error(ErrorCode::NoUsers, "ALP needs at least one user");
  return play_hours * 60.0 / static_cast<double>(users);
}

/// Expected contribution: solved tasks per user.
inline double ec(std::size_t solved, std::size_t users) {
  if (users == 0) throw Error(ErrorCode::NoUsers, "EC needs at least one user");
  return static_cast<double>(solved) / static_cast<double>(users);
}

struct PeriodMetrics {
  std::string period;  // "global" for the whole log
  std::optional<Motivation> motivation;
  std::size_t classified_images = 0;
  std::size_t contributions = 0;          // every answer, controls included
  std::size_t regular_contributions = 0;  // controls excluded
  std::size_t users = 0;
  double total_play_time_hours = 0.0;
  std::optional<double> throughput;  // tasks / hour
  std::optional<double> alp;         // minutes / user
  std::optional<double> ec;          // tasks / user
};

inline PeriodMetrics period_metrics(const EventLog& log, std::span<const RoundRecord> rounds,
                                    std::span<const TaskResolution> resolutions, PeriodFilter period) {
  PeriodMetrics m;
  m.period = period ? log.periods().at(*period).name : "global";
  if (period) m.motivation = log.periods()[*period].motivation;
  m.classified_images = solved_tasks(log, resolutions, period);
  const auto events = log.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (period && log.period_of(i) != *period) continue;
    ++m.contributions;
    if (!events[i].is_control) ++m.regular_contributions;
  }
  m.users = active_users(log, period);
  m.total_play_time_hours = play_time_hours(log, rounds, period);
  if (m.total_play_time_hours > 0.0) m.throughput = throughput(m.classified_images, m.total_play_time_hours);
  if (m.users > 0) {
    m.alp = alp(m.total_play_time_hours, m.users);
    m.ec = ec(m.classified_images, m.users);
  }
  return m;
}

/// One entry per configured period (chronological) followed by "global".
inline std::vector<PeriodMetrics> gwap_metrics_table(const EventLog& log, std::span<const RoundRecord> rounds,
                                                     std::span<const TaskResolution> resolutions) {
  std::vector<PeriodMetrics> table;
  for (std::uint16_t p = 0; p < log.periods().size(); ++p) table.push_back(period_metrics(log, rounds, resolutions, p));
  table.push_back(period_metrics(log, rounds, resolutions, std::nullopt));
  return table;
}

// ---------------------------------------------------------------------------
// Contribution speed

struct SpeedHistogram {
  std::map<std::size_t, std::size_t> counts;  // images per round -> rounds
  std::size_t rounds = 0;                     // (player, round) participations
  double median = 0.0;
  double mean = 0.0;
};

/// Images answered per (player, round), for rounds accepted by `keep`.
inline SpeedHistogram contribution_speed(const EventLog& log, std::span<const RoundRecord> rounds,
                                         const std::function<bool(const RoundRecord&)>& keep = {}) {
  std::vector<char> kept(log.round_count(), 0);
  for (const auto& r : rounds) kept.at(r.round) = !keep || keep(r);
  std::unordered_map<std::uint64_t, std::size_t> per_participation;
  for (const auto& e : log.events()) {
    if (!kept[e.round]) continue;
    ++per_participation[(static_cast<std::uint64_t>(e.round) << 32) | e.player];
  }
  SpeedHistogram h;
  std::vector<double> values;
  values.reserve(per_participation.size());
  for (const auto& [key, n] : per_participation) {
    ++h.counts[n];
    values.push_back(static_cast<double>(n));
  }
  h.rounds = values.size();
  if (!values.empty()) {
    h.mean = stats::mean(values);
    h.median = stats::median(std::move(values));
  }
  return h;
}

inline SpeedHistogram contribution_speed(const EventLog& log, std::span<const RoundRecord> rounds, PeriodFilter period) {
  return contribution_speed(log, rounds, [&](const RoundRecord& r) { return detail::in_scope(log, r.start_time, period); });
}

inline SpeedHistogram contribution_speed(const EventLog& log, std::span<const RoundRecord> rounds, Motivation regime) {
  return contribution_speed(log, rounds, [&](const RoundRecord& r) {
    auto p = log.period_index_of(r.start_time);
    return p && log.periods()[*p].motivation == regime;
  });
}

// ---------------------------------------------------------------------------
// Daily series

struct DailyCount {
  Timestamp day_start = 0;  // UTC midnight
  std::size_t solved = 0;
};

inline Timestamp utc_day(Timestamp t) {
  return (t >= 0 ? t : t - (kSecondsPerDay - 1)) / kSecondsPerDay;
}

/// Regular tasks solved per UTC day, from the first to the last event day.
inline std::vector<DailyCount> daily_solved_series(const EventLog& log, std::span<const TaskResolution> resolutions) {
  if (log.empty()) return {};
  const Timestamp first = utc_day(log.events().front().timestamp);
  const Timestamp last = utc_day(log.events().back().timestamp);
  std::vector<DailyCount> series;
  series.reserve(static_cast<std::size_t>(last - first + 1));
  for (Timestamp d = first; d <= last; ++d) series.push_back({d * kSecondsPerDay, 0});
  for (const auto& r : resolutions) {
    if (!r.solved() || r.is_control || !r.solved_at) continue;
    ++series.at(static_cast<std::size_t>(utc_day(*r.solved_at) - first)).solved;
  }
  return series;
}

}  // namespace gwap
