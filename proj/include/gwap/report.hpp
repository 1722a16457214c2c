#pragma once

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwap/comparisons.hpp"
#include "gwap/engagement.hpp"
#include "gwap/error.hpp"
#include "gwap/gwap_metrics.hpp"
#include "gwap/ingest.hpp"
#include "gwap/profiles.hpp"
#include "gwap/truth_inference.hpp"
#include "gwap/types.hpp"

namespace gwap {

inline constexpr std::string_view kToolVersion = "0.4.0";

/// FNV-1a, 64 bit, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Provenance {
  std::string tool_version{kToolVersion};
  std::string log_hash;
  std::string periods_hash;
  std::string categories_hash;
  std::string inference_hash;
  std::optional<std::uint64_t> rng_seed;
};

struct LogSummary {
  std::size_t events = 0;
  std::size_t control_events = 0;
  std::size_t players = 0;
  std::size_t rounds = 0;
  std::size_t regular_tasks = 0;
  std::size_t control_tasks = 0;
  std::size_t solved = 0;
  std::size_t unresolved = 0;
  std::size_t pending = 0;
  std::size_t late_contributions = 0;
  std::optional<double> solved_at_minimum_fraction;  // share of solved tasks needing only min_contributions
};

struct PopulationEngagement {
  std::string population;  // "global" or a period name
  EngagementSummary summary;
};

struct EngagementSection {
  std::vector<PopulationEngagement> summaries;
  std::optional<EngagementClustering> clustering;
  std::optional<std::string> clustering_error;
  ActiveTimeSummary active_time;
};

struct ProfilesSection {
  ThresholdMode mode = ThresholdMode::global;
  Thresholds thresholds;
  std::size_t excluded_players = 0;
  std::vector<PopulationProfiles> populations;
  std::vector<ProfileAssignment> players;
  std::array<double, 4> contribution_shares{};
};

struct SpeedSection {
  SpeedHistogram extrinsic;
  SpeedHistogram intrinsic;
  SpeedHistogram all;
};

struct AnalysisOptions {
  bool partial = false;
  ThresholdMode thresholds = ThresholdMode::global;
  RoundOptions rounds;
  std::optional<std::uint64_t> rng_seed;  // echoed into provenance when the log is simulated
};

/// Every section is optional so that a partial report can carry the sections
/// that succeeded; `errors` maps a failed section to its message.
struct AnalysisReport {
  Provenance provenance;
  InferenceConfig inference;
  LogSummary summary;
  std::optional<std::vector<PeriodMetrics>> gwap_metrics;
  std::optional<EngagementSection> engagement;
  std::optional<ProfilesSection> profiles;
  std::optional<std::vector<ComparisonReport>> comparisons;
  std::optional<DifficultyHistogram> difficulty_by_category;
  std::optional<std::vector<DailyCount>> daily_solved;
  std::optional<SpeedSection> contribution_speed;
  std::map<std::string, std::string> errors;
};

inline constexpr std::array<std::string_view, 7> kReportSections{
    "gwap_metrics", "engagement", "profiles", "comparisons", "difficulty_by_category", "daily_solved", "contribution_speed"};

// ---------------------------------------------------------------------------
// Analysis

namespace detail {

inline LogSummary summarize_log(const EventLog& log, std::span<const TaskResolution> resolutions,
                                const InferenceConfig& config, std::size_t rounds) {
  LogSummary s;
  s.events = log.size();
  for (const auto& e : log.events()) s.control_events += e.is_control;
  s.players = log.player_count();
  s.rounds = rounds;
  std::size_t at_minimum = 0;
  for (const auto& r : resolutions) {
    s.late_contributions += r.late_contributions;
    if (r.is_control) {
      ++s.control_tasks;
      continue;
    }
    ++s.regular_tasks;
    switch (r.status) {
      case TaskStatus::solved:
        ++s.solved;
        if (r.difficulty && *r.difficulty <= config.min_contributions) ++at_minimum;
        break;
      case TaskStatus::unresolved: ++s.unresolved; break;
      case TaskStatus::pending: ++s.pending; break;
    }
  }
  if (s.solved > 0) s.solved_at_minimum_fraction = static_cast<double>(at_minimum) / static_cast<double>(s.solved);
  return s;
}

inline Provenance provenance_of(const EventLog& log, const InferenceConfig& config, std::optional<std::uint64_t> seed) {
  Provenance p;
  p.log_hash = fnv1a_hex(serialize_log(log));
  p.periods_hash = fnv1a_hex(periods_to_json(log.periods()).dump());
  p.categories_hash = fnv1a_hex(categories_to_json(log.categories()).dump());
  p.inference_hash = fnv1a_hex(to_json(config).dump());
  p.rng_seed = seed;
  return p;
}

}  // namespace detail

/// Runs truth inference and every downstream analysis. `log` must already
/// carry its period labels. Without `partial`, the first failing section
/// aborts with its name prefixed to the message.
inline AnalysisReport run_analysis(const EventLog& log, const InferenceConfig& config = {},
                                   const AnalysisOptions& options = {}) {
  if (log.empty()) throw Error(ErrorCode::EmptyLog, "the log has no events");
  config.validate();

  AnalysisReport report;
  report.inference = config;
  report.provenance = detail::provenance_of(log, config, options.rng_seed);
  const auto resolutions = resolve_all(log, config);
  const auto rounds = build_rounds(log, options.rounds);
  report.summary = detail::summarize_log(log, resolutions, config, rounds.size());

  auto section = [&](std::string_view name, auto&& compute) {
    try {
      compute();
    } catch (const Error& e) {
      if (!options.partial) throw Error(e.code(), std::string(name) + ": " + e.what());
      report.errors[std::string(name)] = e.what();
    }
  };

  section("gwap_metrics", [&] { report.gwap_metrics = gwap_metrics_table(log, rounds, resolutions); });

  section("engagement", [&] {
    EngagementSection s;
    EngagementOptions opts;
    if (!log.periods().empty()) opts.project_end = log.periods().back().end;
    const auto global = engagement_table(log, rounds, opts);
    s.summaries.push_back({"global", summarize(global)});
    for (std::uint16_t p = 0; p < log.periods().size(); ++p) {
      auto scoped = opts;
      scoped.period = p;
      s.summaries.push_back({log.periods()[p].name, summarize(engagement_table(log, rounds, scoped))});
    }
    try {
      s.clustering = cluster_engagement(global);
    } catch (const Error& e) {
      s.clustering_error = e.what();
    }
    s.active_time = active_time_summary(log);
    report.engagement = std::move(s);
  });

  std::optional<AxesTable> axes;
  section("profiles", [&] {
    axes = compute_axes(log, player_accuracy(log, resolutions));
    ProfilesSection s;
    s.mode = options.thresholds;
    s.excluded_players = axes->excluded;
    s.thresholds = median_thresholds(axes->players);
    s.populations = period_profile_distributions(log, axes->players, options.thresholds);
    s.players = assign_profiles(axes->players, s.thresholds);
    s.contribution_shares = contribution_share(s.players);
    report.profiles = std::move(s);
  });

  section("comparisons", [&] {
    if (!axes) throw Error(ErrorCode::EmptyPopulation, "profiles section failed");
    std::vector<ComparisonReport> out;
    for (auto g : {Grouping::incentive, Grouping::difficulty, Grouping::category}) {
      out.push_back(compare_groups(log, resolutions, axes->players, g, config));
    }
    report.comparisons = std::move(out);
  });

  section("difficulty_by_category", [&] { report.difficulty_by_category = difficulty_by_category(log, resolutions); });
  section("daily_solved", [&] { report.daily_solved = daily_solved_series(log, resolutions); });
  section("contribution_speed", [&] {
    SpeedSection s;
    s.extrinsic = contribution_speed(log, rounds, Motivation::extrinsic);
    s.intrinsic = contribution_speed(log, rounds, Motivation::intrinsic);
    s.all = contribution_speed(log, rounds);
    report.contribution_speed = s;
  });
  return report;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using nlohmann::json;

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json to_json(const stats::Summary& s) { return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}}; }

inline json to_json(const stats::TestResult& t) {
  json j{{"test", t.test_name}, {"statistic", t.statistic}, {"p_value", t.p_value}, {"exact", t.exact},
         {"degrees_of_freedom", opt(t.degrees_of_freedom)}, {"rank_sum", opt(t.rank_sum)}};
  for (double level : stats::kSignificanceLevels) {
    char key[32];
    std::snprintf(key, sizeof key, "significant_%g", level);
    j[key] = t.significant(level);
  }
  return j;
}

inline json to_json(const GroupSample& s) { return {{"n", s.n}, {"mean", opt(s.mean)}, {"sd", opt(s.sd)}}; }

inline json to_json(const SpeedHistogram& h) {
  json counts = json::object();
  for (const auto& [images, n] : h.counts) counts[std::to_string(images)] = n;
  return {{"rounds", h.rounds}, {"median", h.median}, {"mean", h.mean}, {"counts", counts}};
}

inline json to_json(const Thresholds& t) { return {{"participation", t.participation}, {"accuracy", t.accuracy}}; }

inline json profile_map(const auto& values) {
  json j = json::object();
  for (auto p : kProfiles) j[std::string(to_string(p))] = values[static_cast<std::size_t>(p)];
  return j;
}

inline std::string iso_day(Timestamp day_start) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day_start / kSecondsPerDay}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace detail

inline nlohmann::json to_json(const AnalysisReport& r) {
  using detail::json;
  using detail::opt;
  json j;
  j["provenance"] = {{"tool", "gwap-lens"},
                     {"version", r.provenance.tool_version},
                     {"log_hash", r.provenance.log_hash},
                     {"periods_hash", r.provenance.periods_hash},
                     {"categories_hash", r.provenance.categories_hash},
                     {"inference_hash", r.provenance.inference_hash},
                     {"rng_seed", opt(r.provenance.rng_seed)}};
  j["inference"] = to_json(r.inference);
  const auto& s = r.summary;
  j["summary"] = {{"events", s.events},
                  {"control_events", s.control_events},
                  {"players", s.players},
                  {"rounds", s.rounds},
                  {"regular_tasks", s.regular_tasks},
                  {"control_tasks", s.control_tasks},
                  {"solved", s.solved},
                  {"unresolved", s.unresolved},
                  {"pending", s.pending},
                  {"late_contributions", s.late_contributions},
                  {"solved_at_minimum_fraction", opt(s.solved_at_minimum_fraction)}};
  j["errors"] = r.errors;

  if (r.gwap_metrics) {
    json rows = json::array();
    for (const auto& m : *r.gwap_metrics) {
      rows.push_back({{"period", m.period},
                      {"motivation", m.motivation ? json(std::string(to_string(*m.motivation))) : json(nullptr)},
                      {"classified_images", m.classified_images},
                      {"contributions", m.contributions},
                      {"regular_contributions", m.regular_contributions},
                      {"users", m.users},
                      {"total_play_time_hours", m.total_play_time_hours},
                      {"throughput", opt(m.throughput)},
                      {"alp_minutes", opt(m.alp)},
                      {"ec", opt(m.ec)}});
    }
    j["gwap_metrics"] = rows;
  } else {
    j["gwap_metrics"] = nullptr;
  }

  if (r.engagement) {
    const auto& e = *r.engagement;
    json summaries = json::array();
    for (const auto& p : e.summaries) {
      summaries.push_back({{"population", p.population},
                           {"players", p.summary.players},
                           {"activity_ratio", detail::to_json(p.summary.activity_ratio)},
                           {"daily_devoted_time_hours", detail::to_json(p.summary.daily_devoted_time)},
                           {"relative_active_duration", p.summary.relative_active_duration
                                                            ? detail::to_json(*p.summary.relative_active_duration)
                                                            : json(nullptr)},
                           {"variation_in_periodicity_days", detail::to_json(p.summary.variation_in_periodicity)}});
    }
    json clustering = nullptr;
    if (e.clustering) {
      const auto& c = *e.clustering;
      json diags = json::array();
      for (const auto& d : c.diagnostics) {
        diags.push_back({{"k", d.k},
                         {"wss", d.wss},
                         {"kmeans_silhouette", d.kmeans_silhouette},
                         {"ward_silhouette", d.ward_silhouette},
                         {"agreement_ari", d.agreement_ari}});
      }
      json clusters = json::array();
      for (const auto& cl : c.clusters) {
        clusters.push_back({{"id", cl.id}, {"size", cl.members.size()}, {"profile", cl.profile}, {"centroid", cl.centroid}});
      }
      clustering = {{"features", c.features},
                    {"dropped_features", c.dropped_features},
                    {"chosen_k", c.chosen_k},
                    {"diagnostics", diags},
                    {"clusters", clusters},
                    {"warnings", c.warnings}};
    }
    const auto& a = e.active_time;
    j["engagement"] = {{"summaries", summaries},
                       {"clustering", clustering},
                       {"clustering_error", opt(e.clustering_error)},
                       {"active_time_seconds",
                        {{"players", a.players},
                         {"p25", a.p25},
                         {"p50", a.p50},
                         {"p75", a.p75},
                         {"p90", a.p90},
                         {"fraction_under_5_minutes", a.fraction_under_5_minutes},
                         {"fraction_over_1_day", a.fraction_over_1_day}}}};
  } else {
    j["engagement"] = nullptr;
  }

  if (r.profiles) {
    const auto& p = *r.profiles;
    json pops = json::array();
    for (const auto& pop : p.populations) {
      pops.push_back({{"population", pop.population},
                      {"thresholds", detail::to_json(pop.thresholds)},
                      {"players", pop.distribution.players},
                      {"counts", detail::profile_map(pop.distribution.counts)},
                      {"fractions", detail::profile_map(pop.distribution.fractions)}});
    }
    json players = json::array();
    for (const auto& a : p.players) {
      players.push_back({{"player_id", a.player_id},
                         {"participation", a.participation},
                         {"accuracy", a.accuracy},
                         {"profile", std::string(to_string(a.profile))}});
    }
    j["profiles"] = {{"threshold_mode", p.mode == ThresholdMode::global ? "global" : "per_period"},
                     {"thresholds", detail::to_json(p.thresholds)},
                     {"excluded_players", p.excluded_players},
                     {"populations", pops},
                     {"players", players},
                     {"contribution_shares", detail::profile_map(p.contribution_shares)}};
  } else {
    j["profiles"] = nullptr;
  }

  if (r.comparisons) {
    json groupings = json::object();
    for (const auto& c : *r.comparisons) {
      json rows = json::array();
      for (const auto& g : c.comparisons) {
        rows.push_back({{"group", g.group},
                        {"casual", detail::to_json(g.casual)},
                        {"frequent", detail::to_json(g.frequent)},
                        {"welch", g.welch ? detail::to_json(*g.welch) : json(nullptr)},
                        {"wilcoxon", g.wilcoxon ? detail::to_json(*g.wilcoxon) : json(nullptr)},
                        {"errors", g.errors}});
      }
      groupings[std::string(to_string(c.grouping))] = {{"median_participation", c.median_participation},
                                                       {"groups", rows}};
    }
    j["comparisons"] = groupings;
  } else {
    j["comparisons"] = nullptr;
  }

  if (r.difficulty_by_category) {
    const auto& h = *r.difficulty_by_category;
    json rows = json::array();
    for (std::size_t c = 0; c < h.categories.size(); ++c) {
      json counts = json::object();
      std::size_t easy = 0, difficult = 0;
      for (const auto& [d, n] : h.counts[c]) {
        counts[std::to_string(d)] = n;
        (d <= r.inference.min_contributions ? easy : difficult) += n;
      }
      rows.push_back({{"category", h.categories[c]}, {"easy", easy}, {"difficult", difficult}, {"by_difficulty", counts}});
    }
    j["difficulty_by_category"] = rows;
  } else {
    j["difficulty_by_category"] = nullptr;
  }

  if (r.daily_solved) {
    json rows = json::array();
    for (const auto& d : *r.daily_solved) {
      rows.push_back({{"day", detail::iso_day(d.day_start)}, {"day_start", d.day_start}, {"solved", d.solved}});
    }
    j["daily_solved"] = rows;
  } else {
    j["daily_solved"] = nullptr;
  }

  if (r.contribution_speed) {
    j["contribution_speed"] = {{"extrinsic", detail::to_json(r.contribution_speed->extrinsic)},
                               {"intrinsic", detail::to_json(r.contribution_speed->intrinsic)},
                               {"all", detail::to_json(r.contribution_speed->all)}};
  } else {
    j["contribution_speed"] = nullptr;
  }
  return j;
}

/// Canonical text: keys sorted, two-space indent, trailing newline.
inline std::string report_json_text(const AnalysisReport& r) { return to_json(r).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV bundle

namespace detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::string header) { text_ = std::move(header) + "\n"; }
  template <class... Fields>
  void row(const Fields&... fields) {
    std::size_t i = 0;
    ((text_ += (i++ ? "," : "") + cell(fields)), ...);
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  static std::string cell(const std::string& s) { return csv_field(s); }
  static std::string cell(std::string_view s) { return csv_field(s); }
  static std::string cell(const char* s) { return csv_field(s); }
  static std::string cell(double x) { return num(x); }
  static std::string cell(const std::optional<double>& x) { return num(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(Timestamp x) { return std::to_string(x); }
  std::string text_;
};

inline std::optional<double> p_of(const std::optional<stats::TestResult>& t) {
  return t ? std::optional<double>(t->p_value) : std::nullopt;
}

}  // namespace detail

/// File name to CSV text. Sections missing from a partial report produce no
/// file.
inline std::map<std::string, std::string> csv_bundle(const AnalysisReport& r) {
  using detail::CsvWriter;
  std::map<std::string, std::string> files;

  if (r.gwap_metrics) {
    CsvWriter w("period,motivation,classified_images,contributions,regular_contributions,users,play_time_hours,"
                "throughput_tasks_per_hour,alp_minutes,ec");
    for (const auto& m : *r.gwap_metrics) {
      w.row(m.period, m.motivation ? std::string(to_string(*m.motivation)) : std::string(), m.classified_images,
            m.contributions, m.regular_contributions, m.users, m.total_play_time_hours, m.throughput, m.alp, m.ec);
    }
    files["table1.csv"] = w.text();
  }

  if (r.engagement) {
    CsvWriter t2("population,players,metric,n,mean,sd");
    for (const auto& p : r.engagement->summaries) {
      auto put = [&](std::string_view metric, const stats::Summary& s) {
        t2.row(p.population, p.summary.players, metric, s.n, s.mean, s.sd);
      };
      put("activity_ratio", p.summary.activity_ratio);
      put("daily_devoted_time_hours", p.summary.daily_devoted_time);
      if (p.summary.relative_active_duration) put("relative_active_duration", *p.summary.relative_active_duration);
      put("variation_in_periodicity_days", p.summary.variation_in_periodicity);
    }
    files["table2.csv"] = t2.text();

    CsvWriter t3("cluster,profile,size,feature,centroid_z");
    if (const auto& c = r.engagement->clustering) {
      for (const auto& cl : c->clusters) {
        for (std::size_t f = 0; f < c->features.size(); ++f) {
          t3.row(cl.id, cl.profile, cl.members.size(), c->features[f], cl.centroid[f]);
        }
      }
    }
    files["table3.csv"] = t3.text();
  }

  if (r.profiles) {
    const auto& p = *r.profiles;
    CsvWriter t4("profile,contribution_share");
    for (auto pr : kProfiles) t4.row(to_string(pr), p.contribution_shares[static_cast<std::size_t>(pr)]);
    files["table4.csv"] = t4.text();

    CsvWriter f4("player_id,participation,accuracy,profile");
    for (const auto& a : p.players) f4.row(a.player_id, a.participation, a.accuracy, to_string(a.profile));
    files["fig4.csv"] = f4.text();

    CsvWriter f5("profile,participation_side,accuracy_side,participation_threshold,accuracy_threshold,players");
    const auto& total = p.populations.front().distribution;
    for (auto pr : kProfiles) {
      const bool frequent = pr == Profile::champion || pr == Profile::troll;
      const bool accurate = pr == Profile::champion || pr == Profile::sniper;
      f5.row(to_string(pr), frequent ? "high" : "low", accurate ? "high" : "low", p.thresholds.participation,
             p.thresholds.accuracy, total.counts[static_cast<std::size_t>(pr)]);
    }
    files["fig5.csv"] = f5.text();

    CsvWriter f6("population,profile,players,fraction");
    for (const auto& pop : p.populations) {
      for (auto pr : kProfiles) {
        const auto i = static_cast<std::size_t>(pr);
        f6.row(pop.population, to_string(pr), pop.distribution.counts[i], pop.distribution.fractions[i]);
      }
    }
    files["fig6.csv"] = f6.text();
  }

  if (r.comparisons) {
    CsvWriter f7("grouping,group,casual_n,casual_mean,casual_sd,frequent_n,frequent_mean,frequent_sd,welch_t,welch_df,"
                 "welch_p,wilcoxon_p");
    CsvWriter t5("category,casual_n,casual_mean,frequent_n,frequent_mean,welch_p,wilcoxon_p");
    for (const auto& c : *r.comparisons) {
      for (const auto& g : c.comparisons) {
        const auto t = g.welch ? std::optional<double>(g.welch->statistic) : std::nullopt;
        const auto df = g.welch ? g.welch->degrees_of_freedom : std::nullopt;
        if (c.grouping == Grouping::category) {
          t5.row(g.group, g.casual.n, g.casual.mean, g.frequent.n, g.frequent.mean, detail::p_of(g.welch),
                 detail::p_of(g.wilcoxon));
        } else {
          f7.row(to_string(c.grouping), g.group, g.casual.n, g.casual.mean, g.casual.sd, g.frequent.n, g.frequent.mean,
                 g.frequent.sd, t, df, detail::p_of(g.welch), detail::p_of(g.wilcoxon));
        }
      }
    }
    files["fig7.csv"] = f7.text();
    files["table5.csv"] = t5.text();
  }

  if (r.difficulty_by_category) {
    CsvWriter w("category,difficulty,tasks");
    const auto& h = *r.difficulty_by_category;
    for (std::size_t c = 0; c < h.categories.size(); ++c) {
      for (const auto& [d, n] : h.counts[c]) w.row(h.categories[c], d, n);
    }
    files["fig8.csv"] = w.text();
  }

  if (r.daily_solved) {
    CsvWriter w("day,solved");
    for (const auto& d : *r.daily_solved) w.row(detail::iso_day(d.day_start), d.solved);
    files["fig2.csv"] = w.text();
  }

  if (r.contribution_speed) {
    CsvWriter w("regime,images_per_round,rounds");
    auto put = [&](std::string_view regime, const SpeedHistogram& h) {
      for (const auto& [images, n] : h.counts) w.row(regime, images, n);
    };
    put("extrinsic", r.contribution_speed->extrinsic);
    put("intrinsic", r.contribution_speed->intrinsic);
    files["fig3.csv"] = w.text();
  }
  return files;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

enum class ReportFormat { json, csv_bundle };

/// Writes report.json, or one CSV per table and figure, into `dir`.
inline std::vector<std::filesystem::path> emit(const AnalysisReport& r, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::json) {
    written.push_back(dir / "report.json");
    write_text_file(written.back(), report_json_text(r));
    return written;
  }
  for (const auto& [name, text] : csv_bundle(r)) {
    written.push_back(dir / name);
    write_text_file(written.back(), text);
  }
  return written;
}

}  // namespace gwap
