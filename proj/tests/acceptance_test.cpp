// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance_test [--gwap-lens <path>] [--work <dir>] [--known-failures 4,6]
//
// The exit status is 0 when the set of failing criteria equals the
// --known-failures list, so a criterion that starts failing, or one that
// starts passing, is reported as a change.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "fixtures.hpp"
#include "gwap/engagement.hpp"
#include "gwap/gwap_metrics.hpp"
#include "gwap/report.hpp"
#include "gwap/simulator.hpp"
#include "gwap/stats/tests.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gwap;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string note) {
    if (!ok) pass = false;
    notes.push_back((ok ? "ok " : "MISS ") + std::move(note));
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Competition preset simulated once and analysed once, shared by several criteria.
struct PresetRun {
  SimulationConfig config = competition_preset();
  SimulationResult sim;
  std::vector<TaskResolution> resolutions;
  AnalysisReport report;
  double seconds = 0.0;
};

const PresetRun& preset_run() {
  static const PresetRun run = [] {
    PresetRun r;
    const auto t0 = std::chrono::steady_clock::now();
    r.sim = generate(r.config);
    r.resolutions = resolve_all(r.sim.log, r.config.inference);
    r.report = run_analysis(r.sim.log, r.config.inference);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

// ---------------------------------------------------------------------------

Outcome metric_identity() {
  Outcome o;
  std::vector<EventLog> logs;
  logs.push_back(preset_run().sim.log);
  logs.push_back(generate(planted_totals_preset()).log);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) logs.push_back(fixtures::random_small_log(rng));

  double worst = 0.0;
  std::size_t rows = 0;
  for (const auto& log : logs) {
    const auto rounds = build_rounds(log);
    for (const auto& m : gwap_metrics_table(log, rounds, resolve_all(log))) {
      if (!m.ec || !m.throughput || !m.alp) continue;
      const double product = *m.throughput * *m.alp / 60.0;
      const double err = *m.ec == 0.0 ? std::abs(product) : std::abs(product - *m.ec) / std::abs(*m.ec);
      worst = std::max(worst, err);
      ++rows;
    }
  }
  o.check(rows > 0 && worst < 1e-9, fmt("max relative error %.3g over %zu period rows from %zu logs", worst, rows, logs.size()));
  return o;
}

Outcome table1_arithmetic() {
  Outcome o;
  const auto cfg = planted_totals_preset();
  const auto sim = generate(cfg);
  const auto metrics = gwap_metrics_table(sim.log, build_rounds(sim.log), resolve_all(sim.log, cfg.inference));
  struct Target {
    std::string period;
    std::size_t users, solved;
    double derived, rounded_target, precision;
  };
  const Target targets[] = {{"before", 285, 1'830, 6.42, 6.4, 0.1},
                            {"during", 174, 24'600, 141.38, 141.0, 1.0},
                            {"after", 174, 1'300, 7.47, 7.5, 0.1}};
  for (const auto& t : targets) {
    const auto it = std::ranges::find(metrics, t.period, &PeriodMetrics::period);
    if (it == metrics.end() || !it->ec) {
      o.check(false, t.period + ": no EC");
      continue;
    }
    const double ec = *it->ec;
    const double rounded = std::round(ec / t.precision) * t.precision;
    o.check(it->users == t.users && it->classified_images == t.solved,
            fmt("%s users %zu solved %zu", t.period.c_str(), it->users, it->classified_images));
    o.check(std::abs(ec - t.derived) <= 0.1 && std::abs(rounded - t.rounded_target) < 1e-9,
            fmt("%s EC %.4f (derived %.2f, rounds to %g)", t.period.c_str(), ec, t.derived, t.rounded_target));
  }
  return o;
}

Outcome inference_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0, tasks = 0, solved = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto log = fixtures::random_small_log(rng);
    const auto expected = oracles::replay_stopping_rule(log, {});
    const auto got = resolve_all(log);
    for (TaskIndex t = 0; t < log.task_count(); ++t) {
      if (got[t].is_control) continue;
      ++tasks;
      const auto& want = expected[t];
      bool same = false;
      switch (want.status) {
        case oracles::ReplayOutcome::Status::solved:
          ++solved;
          same = got[t].status == TaskStatus::solved && got[t].final_category &&
                 got[t].final_category->value == want.category && got[t].difficulty == want.difficulty;
          break;
        case oracles::ReplayOutcome::Status::unresolved: same = got[t].status == TaskStatus::unresolved; break;
        case oracles::ReplayOutcome::Status::pending: same = got[t].status == TaskStatus::pending; break;
      }
      mismatches += !same;
    }
  }
  const double secs = seconds_since(t0);
  o.check(mismatches == 0, fmt("%zu mismatches over %zu tasks (%zu solved) in 500 logs", mismatches, tasks, solved));
  o.check(secs < 5.0, fmt("%.2f s", secs));
  return o;
}

Outcome label_recovery() {
  Outcome o;
  const auto& run = preset_run();
  const auto rec = planted_label_recovery(run.sim.log, run.resolutions, run.sim.truth);
  std::size_t d4 = 0;
  for (const auto& r : run.resolutions) d4 += !r.is_control && r.solved() && r.difficulty == 4;
  const double d4_fraction = static_cast<double>(d4) / static_cast<double>(rec.solved);
  o.check(run.sim.log.size() >= 20'000, fmt("%zu events", run.sim.log.size()));
  o.check(rec.fraction() >= 0.95, fmt("recovered %.4f of %zu solved labels", rec.fraction(), rec.solved));
  o.check(std::abs(d4_fraction - 0.58) <= 0.05, fmt("difficulty-4 fraction %.3f (target 0.58 +/- 0.05)", d4_fraction));
  o.check(run.seconds < 30.0, fmt("simulate + analyze %.2f s", run.seconds));
  return o;
}

Outcome profile_pipeline() {
  Outcome o;
  const auto& p = *preset_run().report.profiles;
  auto find = [&](std::string_view name) -> const ProfileDistribution& {
    return std::ranges::find(p.populations, name, &PopulationProfiles::population)->distribution;
  };
  const auto& total = find("total");
  const auto& intrinsic = find("intrinsic");
  const auto& extrinsic = find("extrinsic");
  const double ext_c = extrinsic.share(Profile::champion), tot_c = total.share(Profile::champion),
               int_c = intrinsic.share(Profile::champion), int_b = intrinsic.share(Profile::beginner);
  o.check(ext_c > tot_c && tot_c > int_c, fmt("Champion share extrinsic %.3f > total %.3f > intrinsic %.3f", ext_c, tot_c, int_c));
  bool beginners_lead = true;
  for (auto pr : kProfiles) beginners_lead &= pr == Profile::beginner || intrinsic.share(pr) < int_b;
  o.check(beginners_lead, fmt("Beginners lead the intrinsic population at %.3f", int_b));
  const std::pair<double, double> targets[] = {{ext_c, 0.53}, {tot_c, 0.32}, {int_c, 0.25}, {int_b, 0.37}};
  for (const auto& [got, want] : targets) o.check(std::abs(got - want) <= 0.08, fmt("share %.3f vs target %.2f +/- 0.08", got, want));
  double sum = 0.0;
  for (double s : p.contribution_shares) sum += s;
  o.check(std::abs(sum - 1.0) <= 1e-12, fmt("contribution shares sum to 1%+.1e", sum - 1.0));
  const double champion = p.contribution_shares[static_cast<std::size_t>(Profile::champion)];
  o.check(champion > 0.9, fmt("Champion contribution share %.3f", champion));
  return o;
}

Outcome statistics_kernel() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::size_t pairs = 0, wilcoxon_mismatch = 0;
  for (std::size_t n = 1; n <= 11; ++n) {
    for (std::size_t m = 1; n + m <= 12; ++m) {
      ++pairs;
      for (int trial = 0; trial < 4; ++trial) {
        const int spread = trial % 2 == 0 ? 1000 : 4;
        std::vector<double> a(n), b(m);
        for (auto& x : a) x = static_cast<double>(rng() % spread);
        for (auto& x : b) x = static_cast<double>(rng() % spread);
        const auto r = stats::wilcoxon_rank_sum(a, b);
        wilcoxon_mismatch += !r.exact || r.p_value != oracles::rank_sum_p_by_enumeration(a, b);
      }
    }
  }
  o.check(wilcoxon_mismatch == 0, fmt("exact Wilcoxon: %zu mismatches over %zu size pairs", wilcoxon_mismatch, pairs));

  double worst = 0.0;
  for (double df : {1.0, 2.0, 5.0, 10.0, 30.0}) {
    for (double t = -6.0; t <= 6.0 + 1e-9; t += 0.25) {
      worst = std::max(worst, std::abs(stats::student_t_cdf(t, df) - oracles::student_t_cdf_by_quadrature(t, df)));
    }
  }
  o.check(worst < 1e-8, fmt("Student-t CDF max deviation %.2e", worst));

  const auto& comparisons = *preset_run().report.comparisons;
  const auto& difficulty = *std::ranges::find(comparisons, Grouping::difficulty, &ComparisonReport::grouping);
  for (const auto& g : difficulty.comparisons) {
    if (!g.welch) {
      o.check(false, g.group + ": no Welch result");
      continue;
    }
    const bool significant = g.welch->significant(0.05);
    const bool want = g.group == "difficult";
    o.check(significant == want, fmt("%s tasks: casual %.3f vs frequent %.3f, Welch p %.4f (%s expected)", g.group.c_str(),
                                     g.casual.mean.value_or(NAN), g.frequent.mean.value_or(NAN), g.welch->p_value,
                                     want ? "significant" : "non-significant"));
  }
  return o;
}

Outcome engagement_metrics_check() {
  Outcome o;
  constexpr Timestamp day0 = 1'514'764'800;
  auto single = [&](const std::vector<int>& days) {
    std::vector<std::string> rows;
    for (int d : days) {
      rows.push_back(fixtures::row(day0 + d * kSecondsPerDay + 3600, "x", "r" + std::to_string(d), "t" + std::to_string(d), 1));
    }
    const auto log = fixtures::log_of(rows);
    return engagement_metrics(log, build_rounds(log), "x");
  };
  const auto daily = single({0, 1, 2, 3, 4, 5, 6});
  o.check(daily.activity_ratio == 1.0, fmt("daily player activity ratio %.17g", daily.activity_ratio));
  const auto even = single({0, 3, 6, 9, 12});
  o.check(even.variation_in_periodicity == 0.0, fmt("evenly spaced variation %.17g", even.variation_in_periodicity));
  const auto odd = single({1, 3, 7});
  o.check(std::abs(odd.activity_ratio - 3.0 / 7.0) < 1e-15 && std::abs(odd.variation_in_periodicity - 1.0) < 1e-15,
          fmt("{1,3,7}: ratio %.6f variation %.6f", odd.activity_ratio, odd.variation_in_periodicity));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> jitter(0.0, 0.02);
  const double centres[3][3] = {{0.9, 0.2, 0.3}, {0.9, 1.5, 0.3}, {0.15, 0.1, 4.0}};
  std::vector<EngagementMetrics> blobs;
  for (int i = 0; i < 60; ++i) {
    EngagementMetrics m;
    m.player_id = "p" + std::to_string(100 + i);
    m.activity_ratio = centres[i % 3][0] + jitter(rng);
    m.daily_devoted_time = centres[i % 3][1] + jitter(rng);
    m.variation_in_periodicity = centres[i % 3][2] + 5.0 * jitter(rng);
    blobs.push_back(m);
  }
  const auto c = cluster_engagement(blobs);
  const auto d3 = std::ranges::find(c.diagnostics, std::size_t{3}, &ClusterDiagnostics::k);
  o.check(c.chosen_k == 3, fmt("chosen k = %zu", c.chosen_k));
  o.check(d3 != c.diagnostics.end() && d3->kmeans_silhouette > 0.5 && d3->agreement_ari == 1.0,
          fmt("k=3 silhouette %.3f, k-means/Ward ARI %.3f", d3->kmeans_silhouette, d3->agreement_ari));
  return o;
}

/// Competition preset scaled up until the log passes `events` contributions.
SimulationConfig scaled_preset(std::size_t events) {
  auto cfg = competition_preset();
  const double factor = static_cast<double>(events) / static_cast<double>(preset_run().sim.log.size()) * 1.05;
  for (auto& a : cfg.archetypes) a.count = static_cast<std::size_t>(std::ceil(static_cast<double>(a.count) * factor));
  cfg.n_tasks = static_cast<std::size_t>(static_cast<double>(cfg.n_tasks) * factor);
  return cfg;
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return status == -1 ? -1 : WEXITSTATUS(status);
}

Outcome performance(const fs::path& cli, const fs::path& work) {
  Outcome o;
  const auto dir = work / "performance";
  fs::create_directories(dir);
  const auto sim = generate(scaled_preset(200'000));
  write_text_file(dir / "log.csv", serialize_log(sim.log));
  write_text_file(dir / "periods.json", periods_to_json(sim.log.periods()).dump(2));
  write_text_file(dir / "categories.json", categories_to_json(sim.log.categories()).dump(2));
  o.check(sim.log.size() >= 200'000, fmt("%zu events", sim.log.size()));

  const auto t0 = std::chrono::steady_clock::now();
  const int rc = run_command(cli.string() + " analyze --log " + (dir / "log.csv").string() + " --periods " +
                             (dir / "periods.json").string() + " --categories " + (dir / "categories.json").string() +
                             " --out " + (dir / "out").string() + " > /dev/null");
  const double secs = seconds_since(t0);
  o.check(rc == 0 && fs::exists(dir / "out" / "report.json"), fmt("gwap-lens analyze exit %d", rc));
  o.check(secs < 30.0, fmt("analyze wall time %.2f s", secs));
  return o;
}

Outcome determinism(const fs::path& cli, const fs::path& work) {
  Outcome o;
  const auto dir = work / "determinism";
  fs::create_directories(dir);
  write_text_file(dir / "config.json", R"({"preset": "competition"})");
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    const auto sim = dir / ("sim" + std::to_string(run));
    const auto out = dir / ("report" + std::to_string(run));
    const int rc_sim = run_command(cli.string() + " simulate --config " + (dir / "config.json").string() +
                                   " --seed 20180101 --out " + sim.string() + " > /dev/null");
    const int rc_an = run_command(cli.string() + " analyze --log " + (sim / "log.csv").string() + " --periods " +
                                  (sim / "periods.json").string() + " --categories " + (sim / "categories.json").string() +
                                  " --out " + out.string() + " > /dev/null");
    o.check(rc_sim == 0 && rc_an == 0, fmt("run %d: simulate exit %d, analyze exit %d", run + 1, rc_sim, rc_an));
    reports.push_back(read_file(out / "report.json"));
  }
  o.check(!reports[0].empty() && reports[0] == reports[1],
          fmt("report.json %zu and %zu bytes, %s", reports[0].size(), reports[1].size(),
              reports[0] == reports[1] ? "identical" : "different"));
  o.check(read_file(dir / "sim0" / "log.csv") == read_file(dir / "sim1" / "log.csv"), "simulated logs identical");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path cli = "gwap-lens";
  fs::path work = fs::temp_directory_path() / "gwap_acceptance";
  std::set<int> known_failures;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--gwap-lens") {
      cli = argv[i + 1];
    } else if (flag == "--work") {
      work = argv[i + 1];
    } else if (flag == "--known-failures") {
      std::stringstream list(argv[i + 1]);
      for (std::string item; std::getline(list, item, ',');) {
        if (!item.empty()) known_failures.insert(std::stoi(item));
      }
    } else {
      std::cerr << "unknown flag " << flag << '\n';
      return 2;
    }
  }
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric identity EC = throughput x ALP / 60", metric_identity},
      {"planted-totals EC reproduction", table1_arithmetic},
      {"truth inference matches brute-force replay", inference_oracle},
      {"planted label recovery on the preset", label_recovery},
      {"profile shares on the preset cohort", profile_pipeline},
      {"statistics kernel and preset difficulty comparison", statistics_kernel},
      {"engagement closed forms and clustering", engagement_metrics_check},
      {"analyze performance at 200k events", [&] { return performance(cli, work); }},
      {"simulate + analyze determinism", [&] { return determinism(cli, work); }},
  };

  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) failed.insert(id);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << '\n';
    for (const auto& n : o.notes) std::cout << "        " << n << '\n';
  }
  std::cout << criteria.size() - failed.size() << "/" << criteria.size() << " criteria pass\n";
  fs::remove_all(work);

  if (failed != known_failures) {
    std::cout << "failing set differs from the expected known failures\n";
    return 1;
  }
  return 0;
}
