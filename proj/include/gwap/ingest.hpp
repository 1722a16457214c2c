#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwap/error.hpp"
#include "gwap/types.hpp"

namespace gwap {

inline constexpr std::string_view kLogHeader =
    "timestamp,player_id,round_id,task_id,answer,is_control,control_truth";

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline Timestamp parse_epoch_seconds(std::string_view field, std::size_t line_no) {
  Timestamp value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::MalformedRow,
                "line " + std::to_string(line_no) + ": timestamp '" + std::string(field) +
                    "' is not an integer number of seconds");
  }
  return value;
}

}  // namespace detail

/// Reads the contribution CSV. Rows may come in any order; the result is
/// sorted and validated.
inline EventLog parse_log(std::istream& in, const CategorySet& categories = CategorySet()) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = detail::strip_cr(line);
    if (view.empty()) continue;
    if (view != kLogHeader) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected header '" +
                                               std::string(kLogHeader) + "'");
    }
    have_header = true;
    break;
  }
  if (!have_header) throw Error(ErrorCode::MalformedRow, "missing header row");

  std::vector<ContributionEvent> raw;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = detail::strip_cr(line);
    if (view.empty()) continue;
    auto fields = detail::split_csv_line(view);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 7) {
      throw Error(ErrorCode::MalformedRow,
                  where + "expected 7 columns, found " + std::to_string(fields.size()));
    }
    ContributionEvent e;
    e.timestamp = detail::parse_epoch_seconds(fields[0], line_no);
    if (fields[1].empty() || fields[2].empty() || fields[3].empty()) {
      throw Error(ErrorCode::MalformedRow, where + "empty id field");
    }
    e.player_id = fields[1];
    e.round_id = fields[2];
    e.task_id = fields[3];
    e.answer = categories.at(fields[4]);
    if (fields[5] == "1") {
      e.is_control = true;
    } else if (fields[5] != "0") {
      throw Error(ErrorCode::MalformedRow, where + "is_control must be 0 or 1");
    }
    if (e.is_control) {
      if (fields[6].empty()) {
        throw Error(ErrorCode::ControlWithoutTruth, where + "control task " + e.task_id + " has no truth");
      }
      e.control_truth = categories.at(fields[6]);
    } else if (!fields[6].empty()) {
      throw Error(ErrorCode::MalformedRow, where + "control_truth given for a non-control row");
    }
    raw.push_back(std::move(e));
  }
  return EventLog::build(std::move(raw), categories);
}

inline EventLog parse_log(std::string_view text, const CategorySet& categories = CategorySet()) {
  std::istringstream in{std::string(text)};
  return parse_log(in, categories);
}

inline void serialize_log(const EventLog& log, std::ostream& out) {
  const auto& cats = log.categories();
  out << kLogHeader << '\n';
  for (const auto& e : log.events()) {
    out << e.timestamp << ',' << log.player_ids()[e.player] << ',' << log.round_ids()[e.round] << ','
        << log.task_ids()[e.task] << ',' << cats.name(e.answer) << ',' << (e.is_control ? '1' : '0')
        << ',';
    if (e.control_truth) out << cats.name(*e.control_truth);
    out << '\n';
  }
}

inline std::string serialize_log(const EventLog& log) {
  std::ostringstream out;
  serialize_log(log, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Configuration files (JSON)

inline CategorySet parse_categories(const nlohmann::json& doc) {
  const auto& list = doc.is_array() ? doc : doc.at("categories");
  return CategorySet(list.get<std::vector<std::string>>());
}

inline Motivation parse_motivation(const std::string& s) {
  if (s == "intrinsic") return Motivation::intrinsic;
  if (s == "extrinsic") return Motivation::extrinsic;
  throw Error(ErrorCode::InvalidConfig, "motivation must be intrinsic or extrinsic, got '" + s + "'");
}

inline std::vector<IncentivePeriod> parse_periods(const nlohmann::json& doc) {
  const auto& list = doc.is_array() ? doc : doc.at("periods");
  std::vector<IncentivePeriod> periods;
  for (const auto& item : list) {
    periods.push_back({item.at("name").get<std::string>(), item.at("start").get<Timestamp>(),
                       item.at("end").get<Timestamp>(),
                       parse_motivation(item.value("motivation", std::string("intrinsic")))});
  }
  return periods;
}

inline nlohmann::json periods_to_json(const std::vector<IncentivePeriod>& periods) {
  auto list = nlohmann::json::array();
  for (const auto& p : periods) {
    list.push_back({{"name", p.name},
                    {"start", p.start},
                    {"end", p.end},
                    {"motivation", std::string(to_string(p.motivation))}});
  }
  return {{"periods", list}};
}

inline nlohmann::json categories_to_json(const CategorySet& categories) {
  return {{"categories", categories.names()}};
}

// ---------------------------------------------------------------------------
// Periods

/// Checks start < end and pairwise disjointness; returns the periods in
/// chronological order.
inline std::vector<IncentivePeriod> validate_periods(std::vector<IncentivePeriod> periods) {
  for (const auto& p : periods) {
    if (!(p.start < p.end)) {
      throw Error(ErrorCode::InvalidConfig, "period '" + p.name + "' must have start < end");
    }
  }
  std::ranges::stable_sort(periods, {}, &IncentivePeriod::start);
  for (std::size_t i = 1; i < periods.size(); ++i) {
    if (periods[i].start < periods[i - 1].end) {
      throw Error(ErrorCode::OverlappingPeriods,
                  "periods '" + periods[i - 1].name + "' and '" + periods[i].name + "' overlap");
    }
  }
  for (std::size_t i = 0; i < periods.size(); ++i) {
    for (std::size_t j = i + 1; j < periods.size(); ++j) {
      if (periods[i].name == periods[j].name) {
        throw Error(ErrorCode::InvalidConfig, "duplicate period name '" + periods[i].name + "'");
      }
    }
  }
  if (periods.size() >= kNoPeriod) throw Error(ErrorCode::InvalidConfig, "too many periods");
  return periods;
}

/// Labels every event with the period containing its timestamp.
inline EventLog assign_periods(const EventLog& log, std::vector<IncentivePeriod> periods) {
  periods = validate_periods(std::move(periods));
  std::vector<std::uint16_t> labels;
  labels.reserve(log.size());
  std::size_t cursor = 0;  // events are time-ordered, so walk periods forward
  for (const auto& e : log.events()) {
    while (cursor < periods.size() && e.timestamp >= periods[cursor].end) ++cursor;
    if (cursor == periods.size() || !periods[cursor].contains(e.timestamp)) {
      throw Error(ErrorCode::UncoveredTimestamp,
                  "timestamp " + std::to_string(e.timestamp) + " is not inside any period");
    }
    labels.push_back(static_cast<std::uint16_t>(cursor));
  }
  return log.with_periods(std::move(periods), std::move(labels));
}

// ---------------------------------------------------------------------------
// Rounds

struct RoundOptions {
  Timestamp duration = 60;
  Timestamp tolerance = 5;
};

/// Reconstructs one record per round id: start is the earliest contribution,
/// duration the configured round length. Sorted by (start_time, round_id).
inline std::vector<RoundRecord> build_rounds(const EventLog& log, RoundOptions options = {}) {
  if (options.duration <= 0) throw Error(ErrorCode::InvalidConfig, "round duration must be positive");
  struct Span {
    Timestamp first = 0, last = 0;
    std::vector<PlayerIndex> players;
    std::size_t events = 0;
  };
  std::vector<Span> spans(log.round_count());
  for (const auto& e : log.events()) {
    auto& s = spans[e.round];
    if (s.events == 0) {
      s.first = s.last = e.timestamp;
    } else {
      s.first = std::min(s.first, e.timestamp);
      s.last = std::max(s.last, e.timestamp);
    }
    ++s.events;
    if (std::ranges::find(s.players, e.player) == s.players.end()) s.players.push_back(e.player);
  }
  std::vector<RoundRecord> rounds;
  rounds.reserve(spans.size());
  for (RoundIndex r = 0; r < spans.size(); ++r) {
    auto& s = spans[r];
    if (s.last - s.first > options.duration + options.tolerance) {
      throw Error(ErrorCode::RoundSpanExceeded, "round " + log.round_ids()[r] + " spans " +
                                                    std::to_string(s.last - s.first) + " s");
    }
    if (s.players.size() > 2) {
      throw Error(ErrorCode::InvalidRound, "round " + log.round_ids()[r] + " has more than two players");
    }
    std::ranges::sort(s.players);
    rounds.push_back({log.round_ids()[r], r, std::move(s.players), s.first, options.duration, s.events});
  }
  std::ranges::sort(rounds, [](const RoundRecord& a, const RoundRecord& b) {
    return std::tie(a.start_time, a.round) < std::tie(b.start_time, b.round);
  });
  return rounds;
}

/// Round records addressed by RoundIndex.
inline std::vector<const RoundRecord*> index_rounds(const std::vector<RoundRecord>& rounds, std::size_t round_count) {
  std::vector<const RoundRecord*> table(round_count, nullptr);
  for (const auto& r : rounds) table.at(r.round) = &r;
  return table;
}

struct ValidationReport {
  std::size_t events = 0;
  std::size_t players = 0;
  std::size_t rounds = 0;
  std::size_t tasks = 0;
  std::size_t control_events = 0;
  std::vector<std::string> warnings;
};

/// Full schema + invariant check. Overlapping rounds for one player are only
/// reported as warnings.
inline ValidationReport validate_log(const EventLog& log, RoundOptions options = {}) {
  ValidationReport report;
  report.events = log.size();
  report.players = log.player_count();
  report.rounds = log.round_count();
  report.tasks = log.task_count();
  for (const auto& e : log.events()) report.control_events += e.is_control ? 1 : 0;

  auto rounds = build_rounds(log, options);
  std::vector<std::vector<const RoundRecord*>> by_player(log.player_count());
  for (const auto& r : rounds) {
    for (auto p : r.players) by_player[p].push_back(&r);
  }
  for (PlayerIndex p = 0; p < by_player.size(); ++p) {
    const auto& list = by_player[p];  // sorted by start_time
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i]->start_time < list[i - 1]->start_time + list[i - 1]->duration) {
        report.warnings.push_back("player " + log.player_ids()[p] + " has overlapping rounds " +
                                  list[i - 1]->round_id + " and " + list[i]->round_id);
      }
    }
  }
  return report;
}

}  // namespace gwap
