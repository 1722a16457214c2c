#pragma once

#include <random>
#include <string>
#include <vector>

#include "gwap/ingest.hpp"
#include "gwap/truth_inference.hpp"
#include "gwap/types.hpp"
#include "oracles.hpp"

namespace fixtures {

/// Parses CSV rows (no header) in the canonical log layout.
inline gwap::EventLog log_of(const std::vector<std::string>& rows) {
  std::string text(gwap::kLogHeader);
  text += '\n';
  for (const auto& r : rows) text += r + '\n';
  return gwap::parse_log(text);
}

inline std::string row(gwap::Timestamp t, const std::string& player, const std::string& round, const std::string& task,
                       std::size_t answer) {
  return std::to_string(t) + "," + player + "," + round + "," + task + "," + std::string(gwap::CategorySet{}.names().at(answer)) + ",0,";
}

/// Small random log: up to `max_events` events from up to 5 players over a
/// few rounds, mixing regular and control tasks, answers concentrated on a
/// couple of labels so that agreements actually happen.
inline gwap::EventLog random_small_log(std::mt19937_64& rng, std::size_t max_events = 20) {
  const gwap::CategorySet cats;
  const int players = 2 + static_cast<int>(rng() % 4);
  const int regular_tasks = 1 + static_cast<int>(rng() % 4);
  const int control_tasks = static_cast<int>(rng() % 3);
  const std::size_t target = 4 + rng() % (max_events - 3);

  std::vector<gwap::ContributionEvent> raw;
  std::vector<std::vector<bool>> used(players, std::vector<bool>(regular_tasks + control_tasks, false));
  for (int attempt = 0; attempt < 400 && raw.size() < target; ++attempt) {
    const int p = static_cast<int>(rng() % players);
    const int t = static_cast<int>(rng() % (regular_tasks + control_tasks));
    if (used[p][t]) continue;
    used[p][t] = true;
    const int round = static_cast<int>(rng() % 2);
    gwap::ContributionEvent e;
    e.player_id = "p" + std::to_string(p);
    e.round_id = "r" + std::to_string(p) + "_" + std::to_string(round);
    e.timestamp = 1000 + round * 100 + static_cast<gwap::Timestamp>(rng() % 20);
    const bool control = t >= regular_tasks;
    e.task_id = (control ? "c" : "t") + std::to_string(t);
    const auto favourite = static_cast<std::uint16_t>(t % 2);
    e.answer = gwap::CategoryId{rng() % 3 == 0 ? static_cast<std::uint16_t>(rng() % 3) : favourite};
    if (control) {
      e.is_control = true;
      e.control_truth = gwap::CategoryId{favourite};
    }
    raw.push_back(e);
  }
  return gwap::EventLog::build(raw, cats);
}

struct RandomRules {
  gwap::InferenceConfig config;
  oracles::InferenceRules rules;
};

inline RandomRules random_rules(std::mt19937_64& rng) {
  static const oracles::Rational thetas[] = {{3, 4}, {2, 3}, {1, 1}, {51, 100}, {3, 5}};
  static const oracles::Rational priors[] = {{1, 2}, {1, 3}, {3, 4}};
  RandomRules r;
  r.rules.alpha = 1 + static_cast<std::int64_t>(rng() % 2);
  r.rules.prior = priors[rng() % 3];
  r.rules.min_players = 2 + rng() % 3;
  r.rules.max_contributions = r.rules.min_players + rng() % 4;
  r.rules.theta = thetas[rng() % 5];
  r.rules.cumulative = rng() % 4 == 0;
  r.config.alpha = static_cast<double>(r.rules.alpha);
  r.config.prior_reliability = static_cast<double>(r.rules.prior.num) / static_cast<double>(r.rules.prior.den);
  r.config.min_contributions = r.rules.min_players;
  r.config.max_contributions = r.rules.max_contributions;
  r.config.agreement_fraction = static_cast<double>(r.rules.theta.num) / static_cast<double>(r.rules.theta.den);
  r.config.cumulative_reliability = r.rules.cumulative;
  return r;
}

}  // namespace fixtures
