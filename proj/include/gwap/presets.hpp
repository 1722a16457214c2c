#pragma once

#include "gwap/simulator.hpp"

namespace gwap {

/// Calibrated cohort: four player archetypes per incentive regime, plus
/// champions who play across the competition boundary. Shares, medians and
/// difficulty mix are calibration targets, not planted facts.
inline SimulationConfig competition_preset() {
  SimulationConfig cfg;
  cfg.rng_seed = 20'180'101;
  cfg.periods = competition_periods();
  cfg.n_tasks = 150'000;
  cfg.n_control_tasks = 3'000;
  cfg.control_injection_rate = 0.1;
  cfg.open_tasks = 40;
  cfg.answer_model = AnswerModel::stratified;
  // Black, City, Stars, Aurora, ISS, None
  // wrong answers mostly land on one look-alike category
  auto confused_with = [](std::size_t c) {
    std::vector<double> row(6, 0.04);
    row[c] = 0.8;
    return row;
  };
  cfg.category_mix = {{1.0, 0.55, confused_with(2)}, {2.0, 0.50, confused_with(3)}, {1.5, 0.60, confused_with(0)},
                      {1.0, 0.65, confused_with(1)}, {0.8, 0.45, confused_with(1)}, {1.2, 0.35, confused_with(0)}};

  using Kind = DayPattern::Kind;
  auto archetype = [](std::string name, std::size_t count, double easy, double hard, CountDistribution rounds,
                      SpreadDistribution images, DayPattern days, std::map<std::string, double> periods) {
    return ArchetypeSpec{std::move(name), count, easy, hard, rounds, images, days, std::move(periods)};
  };
  const std::map<std::string, double> before{{"before", 1.0}}, during{{"during", 1.0}}, after{{"after", 1.0}};

  cfg.archetypes = {
      archetype("champion_competition", 62, 0.97, 0.90, {13.0, 0.3}, {16.0, 3.0}, {Kind::daily, 1, 1, 0.3}, during),
      archetype("troll_competition", 26, 0.87, 0.40, {4.0, 0.5}, {12.0, 3.0}, {Kind::daily, 1, 1, 0.5}, during),
      archetype("sniper_competition", 26, 0.99, 0.80, {1.0, 0.0}, {8.0, 2.0}, {Kind::burst_then_quit, 1, 1, 0.0}, during),
      archetype("beginner_competition", 30, 0.97, 0.35, {1.0, 0.0}, {8.0, 2.0}, {Kind::burst_then_quit, 1, 1, 0.0}, during),
      archetype("champion_bridge_in", 13, 0.97, 0.90, {6.0, 0.3}, {9.0, 3.0}, {Kind::every_n_days, 3, 1, 0.2},
                {{"before", 0.3}, {"during", 1.0}}),
      archetype("champion_bridge_out", 17, 0.97, 0.90, {6.0, 0.3}, {9.0, 3.0}, {Kind::every_n_days, 3, 1, 0.2},
                {{"during", 1.0}, {"after", 0.3}}),
      archetype("champion_before", 50, 0.97, 0.90, {2.0, 0.3}, {8.0, 3.0}, {Kind::burst_then_quit, 1, 3, 0.0}, before),
      archetype("troll_before", 67, 0.87, 0.40, {2.0, 0.3}, {7.0, 2.0}, {Kind::burst_then_quit, 1, 2, 0.0}, before),
      archetype("sniper_before", 55, 0.99, 0.80, {1.0, 0.0}, {8.0, 2.0}, {Kind::burst_then_quit, 1, 1, 0.0}, before),
      archetype("beginner_before", 100, 0.97, 0.35, {1.0, 0.0}, {8.0, 2.0}, {Kind::burst_then_quit, 1, 1, 0.0}, before),
      archetype("champion_after", 35, 0.97, 0.90, {2.0, 0.3}, {8.0, 3.0}, {Kind::burst_then_quit, 1, 3, 0.0}, after),
      archetype("troll_after", 17, 0.87, 0.40, {2.0, 0.3}, {7.0, 2.0}, {Kind::burst_then_quit, 1, 2, 0.0}, after),
      archetype("sniper_after", 35, 0.99, 0.80, {1.0, 0.0}, {8.0, 2.0}, {Kind::burst_then_quit, 1, 1, 0.0}, after),
      archetype("beginner_after", 70, 0.97, 0.35, {1.0, 0.0}, {8.0, 2.0}, {Kind::burst_then_quit, 1, 1, 0.0}, after),
  };
  return cfg;
}

}  // namespace gwap
