#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwap/error.hpp"
#include "gwap/ingest.hpp"
#include "gwap/profiles.hpp"
#include "gwap/truth_inference.hpp"
#include "gwap/types.hpp"

namespace gwap {

// ---------------------------------------------------------------------------
// Random stream

/// std::mt19937_64 is fully specified by the standard, so the raw stream is
/// identical everywhere. The standard distributions are not, hence the
/// transforms below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Box-Muller, one variate per call.
  double normal(double mean = 0.0, double sd = 1.0) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Marsaglia-Tsang.
  double gamma(double shape, double scale) {
    if (shape < 1.0) return gamma(shape + 1.0, scale) * std::pow(1.0 - uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = 1.0 - uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
    }
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 30.0) return static_cast<std::uint64_t>(std::max(0.0, std::round(normal(mean, std::sqrt(mean)))));
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

  /// Index drawn proportionally to non-negative weights.
  std::size_t weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double x = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (x < weights[i]) return i;
      x -= weights[i];
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Configuration

struct CountDistribution {
  double mean = 1.0;
  double dispersion = 0.0;  // 0: constant round(mean); else gamma-Poisson, var = mu + dispersion * mu^2
};

struct SpreadDistribution {
  double mean = 10.0;
  double sd = 0.0;  // normal, rounded and truncated to [1, 30]
};

struct DayPattern {
  enum class Kind { daily, every_n_days, burst_then_quit };
  Kind kind = Kind::burst_then_quit;
  int n = 1;     // spacing for every_n_days
  int days = 1;  // length of the burst
  double skip_probability = 0.0;  // chance an otherwise active day is skipped
};

enum class AnswerModel { random, stratified };

struct ArchetypeSpec {
  std::string name;
  std::size_t count = 0;
  double answer_accuracy = 0.9;
  std::optional<double> hard_accuracy;  // accuracy on hard tasks, defaults to answer_accuracy
  CountDistribution rounds_per_active_day;
  SpreadDistribution images_per_round;
  DayPattern active_days;
  std::map<std::string, double> period_multiplier;  // empty: every period at 1
};

struct CategoryMix {
  double prevalence = 1.0;     // relative frequency among planted truths
  double hard_fraction = 0.0;  // share of the category's tasks that are hard
  std::vector<double> confusion;  // weights of wrong answers by category; empty means uniform
};

/// Exact per-period users and unanimously solved tasks.
struct PlantedTotals {
  std::map<std::string, std::size_t> users;
  std::map<std::string, std::size_t> solved;
};

struct SimulationConfig {
  std::uint64_t rng_seed = 1;
  CategorySet categories;
  std::vector<CategoryMix> category_mix;  // one per category; empty means uniform, all easy
  std::size_t n_tasks = 1000;
  std::size_t n_control_tasks = 200;
  double control_injection_rate = 0.1;
  std::size_t open_tasks = 40;      // regular tasks served concurrently
  Timestamp pairing_window = 20;    // seconds
  Timestamp round_duration = 60;
  AnswerModel answer_model = AnswerModel::random;
  std::vector<IncentivePeriod> periods;
  InferenceConfig inference;
  std::vector<ArchetypeSpec> archetypes;
  std::optional<PlantedTotals> planted_totals;

  void validate() const;
};

inline void SimulationConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (n_tasks < 1) bad("n_tasks must be >= 1");
  if (!(control_injection_rate >= 0.0 && control_injection_rate < 1.0)) bad("control_injection_rate must be in [0, 1)");
  if (control_injection_rate > 0.0 && n_control_tasks == 0) bad("control injection needs control tasks");
  if (open_tasks < 1) bad("open_tasks must be >= 1");
  if (round_duration < 1) bad("round_duration must be positive");
  if (!category_mix.empty() && category_mix.size() != categories.size()) bad("category_mix needs one entry per category");
  for (const auto& m : category_mix) {
    if (m.prevalence < 0.0 || m.hard_fraction < 0.0 || m.hard_fraction > 1.0) bad("invalid category mix");
    if (!m.confusion.empty() && m.confusion.size() != categories.size()) bad("confusion row needs one weight per category");
    if (std::ranges::any_of(m.confusion, [](double w) { return w < 0.0; })) bad("negative confusion weight");
  }
  if (periods.empty()) bad("at least one period is required");
  validate_periods(periods);
  inference.validate();
  for (const auto& a : archetypes) {
    if (a.name.empty()) bad("archetype without a name");
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(a.answer_accuracy) || (a.hard_accuracy && !prob(*a.hard_accuracy))) bad("archetype accuracy outside [0, 1]");
    if (a.rounds_per_active_day.mean < 1.0 || a.rounds_per_active_day.dispersion < 0.0) bad("rounds_per_active_day mean must be >= 1");
    if (a.images_per_round.mean < 1.0 || a.images_per_round.sd < 0.0) bad("images_per_round mean must be >= 1");
    if (a.active_days.n < 1 || a.active_days.days < 1 || !prob(a.active_days.skip_probability)) bad("invalid active-day pattern");
    for (const auto& [name, m] : a.period_multiplier) {
      if (m < 0.0) bad("negative period multiplier");
      if (std::ranges::none_of(periods, [&](const auto& p) { return p.name == name; })) {
        bad("period multiplier for unknown period '" + name + "'");
      }
    }
  }
  if (planted_totals) {
    for (const auto& [name, n] : planted_totals->users) {
      if (std::ranges::none_of(periods, [&](const auto& p) { return p.name == name; })) bad("planted users for unknown period");
      const auto solved = planted_totals->solved.contains(name) ? planted_totals->solved.at(name) : 0;
      if (solved > 0 && n < inference.min_contributions) bad("planted period needs at least min_contributions users");
    }
  }
}

struct GroundTruth {
  std::map<std::string, CategoryId> task_truth;  // regular and control tasks
  std::map<std::string, bool> task_hard;
  std::map<std::string, std::string> player_archetype;
  std::vector<std::string> archetype_order;  // configuration order
};

struct SimulationResult {
  EventLog log;
  GroundTruth truth;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Generation

namespace detail {

inline std::string padded(char prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
  return buf;
}

inline std::size_t draw_count(Rng& rng, const CountDistribution& d, double scale) {
  const double mu = d.mean * scale;
  if (d.dispersion <= 0.0) return static_cast<std::size_t>(std::max(1.0, std::round(mu)));
  // one round is guaranteed on an active day; the remainder is gamma-Poisson
  const double extra = std::max(0.0, mu - 1.0);
  if (extra == 0.0) return 1;
  const double shape = 1.0 / d.dispersion;
  return 1 + static_cast<std::size_t>(rng.poisson(rng.gamma(shape, extra / shape)));
}

inline std::size_t draw_images(Rng& rng, const SpreadDistribution& d) {
  const double x = d.sd > 0.0 ? rng.normal(d.mean, d.sd) : d.mean;
  return static_cast<std::size_t>(std::clamp(std::round(x), 1.0, 30.0));
}

struct RoundSlot {
  Timestamp start = 0;
  std::size_t player = 0;
  std::size_t images = 0;
  std::size_t round = 0;  // assigned after pairing
};

struct AnswerSlot {
  Timestamp time = 0;
  std::size_t round = 0;
  std::size_t player = 0;
  auto operator<=>(const AnswerSlot&) const = default;
};

struct SimPlayer {
  std::string id;
  std::size_t archetype = 0;
  double phase[2] = {0.0, 0.0};  // stratified model, easy and hard
  std::uint64_t draws[2] = {0, 0};
  std::unordered_set<std::uint32_t> seen;
};

inline std::vector<RoundSlot> schedule_player(Rng& rng, const SimulationConfig& cfg, const ArchetypeSpec& a,
                                              std::size_t player) {
  std::vector<RoundSlot> slots;
  const Timestamp gap_min = cfg.pairing_window + 5, gap_span = 40;
  for (const auto& period : cfg.periods) {
    double scale = a.period_multiplier.empty() ? 1.0 : 0.0;
    if (auto it = a.period_multiplier.find(period.name); it != a.period_multiplier.end()) scale = it->second;
    if (scale <= 0.0) continue;
    const auto days = static_cast<std::size_t>((period.end - period.start + kSecondsPerDay - 1) / kSecondsPerDay);
    const auto& pat = a.active_days;
    std::size_t first = 0;
    if (pat.kind == DayPattern::Kind::burst_then_quit) {
      const auto burst = std::min<std::size_t>(static_cast<std::size_t>(pat.days), days);
      first = static_cast<std::size_t>(rng.below(days - burst + 1));
    } else {
      first = static_cast<std::size_t>(rng.below(days));
    }
    std::vector<std::size_t> active;
    switch (pat.kind) {
      case DayPattern::Kind::daily:
        for (auto d = first; d < days; ++d) active.push_back(d);
        break;
      case DayPattern::Kind::every_n_days:
        for (auto d = first; d < days; d += static_cast<std::size_t>(pat.n)) active.push_back(d);
        break;
      case DayPattern::Kind::burst_then_quit:
        for (auto d = first; d < days && d < first + static_cast<std::size_t>(pat.days); ++d) active.push_back(d);
        break;
    }
    for (auto d : active) {
      if (pat.skip_probability > 0.0 && rng.bernoulli(pat.skip_probability)) continue;
      const auto rounds = draw_count(rng, a.rounds_per_active_day, scale);
      std::vector<std::size_t> images(rounds);
      for (auto& n : images) n = draw_images(rng, a.images_per_round);
      const Timestamp day_start = period.start + static_cast<Timestamp>(d) * kSecondsPerDay;
      const Timestamp day_end = std::min(period.end, day_start + kSecondsPerDay);
      const Timestamp session = static_cast<Timestamp>(rounds) * (cfg.round_duration + gap_min + gap_span);
      const Timestamp latest = day_end - session;
      Timestamp t = day_start;
      if (latest > day_start) t += static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(latest - day_start)));
      for (std::size_t r = 0; r < rounds; ++r) {
        if (t + cfg.round_duration > day_end) break;
        slots.push_back({t, player, images[r], 0});
        t += cfg.round_duration + gap_min + static_cast<Timestamp>(rng.below(gap_span));
      }
    }
  }
  return slots;
}

/// Greedy pairing: walking rounds by start time, each unpaired round takes the
/// first later unpaired round of another player starting within the window.
inline std::size_t pair_rounds(std::vector<RoundSlot>& slots, Timestamp window) {
  std::ranges::sort(slots, [](const RoundSlot& a, const RoundSlot& b) {
    return std::tie(a.start, a.player) < std::tie(b.start, b.player);
  });
  std::vector<char> paired(slots.size(), 0);
  std::vector<std::size_t> partner(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) partner[i] = i;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (paired[i]) continue;
    for (std::size_t j = i + 1; j < slots.size() && slots[j].start - slots[i].start <= window; ++j) {
      if (paired[j] || slots[j].player == slots[i].player) continue;
      paired[i] = paired[j] = 1;
      partner[j] = i;
      slots[j].start = slots[i].start;
      ++pairs;
      break;
    }
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (partner[i] == i) slots[i].round = next++;
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (partner[i] != i) slots[i].round = slots[partner[i]].round;
  }
  return pairs;
}

/// Open-task pool with O(1) removal.
class TaskPool {
 public:
  void add(std::uint32_t task) {
    if (task >= where_.size()) where_.resize(task + 1, kAbsent);
    where_[task] = open_.size();
    open_.push_back(task);
  }
  void remove(std::uint32_t task) {
    const auto i = where_.at(task);
    if (i == kAbsent) return;
    where_[open_.back()] = i;
    open_[i] = open_.back();
    open_.pop_back();
    where_[task] = kAbsent;
  }
  std::size_t size() const { return open_.size(); }
  /// First task not yet seen by the player, probing from a random position.
  std::optional<std::uint32_t> pick(Rng& rng, const std::unordered_set<std::uint32_t>& seen) const {
    if (open_.empty()) return std::nullopt;
    const auto start = rng.below(open_.size());
    for (std::size_t k = 0; k < open_.size(); ++k) {
      const auto t = open_[(start + k) % open_.size()];
      if (!seen.contains(t)) return t;
    }
    return std::nullopt;
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::uint32_t> open_;
  std::vector<std::size_t> where_;
};

/// Distribution of wrong answers for one true category.
class ConfusionRow {
 public:
  ConfusionRow(const std::vector<double>& weights, std::size_t truth, std::size_t categories)
      : truth_(static_cast<std::uint16_t>(truth)), categories_(categories) {
    if (weights.empty()) return;
    weights_ = weights;
    weights_[truth] = 0.0;
    if (std::ranges::all_of(weights_, [](double w) { return w == 0.0; })) weights_.clear();
  }

  CategoryId draw(Rng& rng) const {
    if (!weights_.empty()) return CategoryId{static_cast<std::uint16_t>(rng.weighted(weights_))};
    const auto r = static_cast<std::uint16_t>(rng.below(categories_ - 1));
    return CategoryId{static_cast<std::uint16_t>(r < truth_ ? r : r + 1)};
  }

 private:
  std::uint16_t truth_;
  std::size_t categories_;
  std::vector<double> weights_;
};

inline CategoryId draw_category(Rng& rng, std::span<const double> prevalence) {
  return CategoryId{static_cast<std::uint16_t>(rng.weighted(prevalence))};
}

inline SimulationResult generate_planted(const SimulationConfig& cfg);

}  // namespace detail

/// Generates a log from the archetype configuration. Random draws happen in
/// this order: regular task truths and hardness, control truths, player
/// phases, player schedules (player by player, period by period), then one or
/// two draws per answer slot in serving order.
inline SimulationResult generate(const SimulationConfig& cfg) {
  cfg.validate();
  if (cfg.planted_totals) return detail::generate_planted(cfg);
  Rng rng(cfg.rng_seed);
  SimulationResult out;
  const auto ncat = cfg.categories.size();

  std::vector<double> prevalence(ncat, 1.0), hard_fraction(ncat, 0.0);
  for (std::size_t c = 0; c < cfg.category_mix.size(); ++c) {
    prevalence[c] = cfg.category_mix[c].prevalence;
    hard_fraction[c] = cfg.category_mix[c].hard_fraction;
  }

  std::vector<detail::ConfusionRow> confusion;
  for (std::size_t c = 0; c < ncat; ++c) {
    const std::vector<double> none;
    confusion.emplace_back(c < cfg.category_mix.size() ? cfg.category_mix[c].confusion : none, c, ncat);
  }

  std::vector<CategoryId> truth(cfg.n_tasks + cfg.n_control_tasks);
  std::vector<char> hard(cfg.n_tasks, 0);
  std::vector<std::string> task_ids(truth.size());
  for (std::size_t t = 0; t < cfg.n_tasks; ++t) {
    truth[t] = detail::draw_category(rng, prevalence);
    hard[t] = rng.bernoulli(hard_fraction[truth[t].value]);
    task_ids[t] = detail::padded('t', t + 1, 7);
  }
  for (std::size_t c = 0; c < cfg.n_control_tasks; ++c) {
    truth[cfg.n_tasks + c] = detail::draw_category(rng, prevalence);
    task_ids[cfg.n_tasks + c] = detail::padded('c', c + 1, 6);
  }

  std::vector<detail::SimPlayer> players;
  for (std::size_t a = 0; a < cfg.archetypes.size(); ++a) {
    out.truth.archetype_order.push_back(cfg.archetypes[a].name);
    if (cfg.archetypes[a].images_per_round.mean > 20.0) {
      out.warnings.push_back("archetype " + cfg.archetypes[a].name + " averages more than 20 images per round");
    }
    for (std::size_t i = 0; i < cfg.archetypes[a].count; ++i) {
      detail::SimPlayer p;
      p.id = detail::padded('p', players.size() + 1, 6);
      p.archetype = a;
      players.push_back(std::move(p));
    }
  }
  for (auto& p : players) {
    p.phase[0] = rng.uniform();
    p.phase[1] = rng.uniform();
  }

  std::vector<detail::RoundSlot> rounds;
  for (std::size_t p = 0; p < players.size(); ++p) {
    auto slots = detail::schedule_player(rng, cfg, cfg.archetypes[players[p].archetype], p);
    std::size_t demanded = 0;
    for (const auto& s : slots) demanded += s.images;
    if (demanded > cfg.n_tasks) {
      throw Error(ErrorCode::InfeasibleConfig, "player " + players[p].id + " would need " + std::to_string(demanded) +
                                                   " images but only " + std::to_string(cfg.n_tasks) + " tasks exist");
    }
    rounds.insert(rounds.end(), slots.begin(), slots.end());
  }
  detail::pair_rounds(rounds, cfg.pairing_window);

  std::vector<detail::AnswerSlot> answers;
  for (const auto& r : rounds) {
    for (std::size_t i = 0; i < r.images; ++i) {
      const auto offset = static_cast<Timestamp>(i) * cfg.round_duration / static_cast<Timestamp>(r.images);
      answers.push_back({r.start + offset, r.round, r.player});
    }
  }
  std::ranges::sort(answers);
  std::size_t round_count = 0;
  for (const auto& r : rounds) round_count = std::max(round_count, r.round + 1);
  const int round_width = std::max(7, static_cast<int>(std::to_string(round_count).size()));

  InferenceEngine engine(ncat, cfg.inference);
  detail::TaskPool pool, controls;
  std::uint32_t released = 0;
  auto release = [&] {
    if (released >= cfg.n_tasks) return false;
    pool.add(released++);
    return true;
  };
  while (pool.size() < cfg.open_tasks && release()) {
  }
  for (std::size_t c = 0; c < cfg.n_control_tasks; ++c) controls.add(static_cast<std::uint32_t>(cfg.n_tasks + c));

  std::vector<ContributionEvent> events;
  events.reserve(answers.size());
  for (const auto& slot : answers) {
    auto& player = players[slot.player];
    const auto& arch = cfg.archetypes[player.archetype];
    std::optional<std::uint32_t> task;
    bool control = false;
    if (cfg.control_injection_rate > 0.0 && rng.bernoulli(cfg.control_injection_rate)) {
      task = controls.pick(rng, player.seen);
      control = task.has_value();
    }
    if (!task) {
      task = pool.pick(rng, player.seen);
      while (!task) {
        if (!release()) throw Error(ErrorCode::InfeasibleConfig, "regular task supply exhausted");
        task = pool.pick(rng, player.seen);
      }
    }
    player.seen.insert(*task);

    const bool is_hard = !control && hard[*task];
    const double accuracy = is_hard ? arch.hard_accuracy.value_or(arch.answer_accuracy) : arch.answer_accuracy;
    bool correct;
    if (cfg.answer_model == AnswerModel::stratified) {
      const int cls = is_hard ? 1 : 0;
      const double k = static_cast<double>(player.draws[cls]++);
      correct = std::floor(accuracy * (k + 1.0) + player.phase[cls]) > std::floor(accuracy * k + player.phase[cls]);
    } else {
      correct = rng.bernoulli(accuracy);
    }
    CategoryId answer = truth[*task];
    if (!correct) answer = confusion[truth[*task].value].draw(rng);

    Event e;
    e.timestamp = slot.time;
    e.player = static_cast<PlayerIndex>(slot.player);
    e.round = static_cast<RoundIndex>(slot.round);
    e.task = *task;
    e.answer = answer;
    e.is_control = control;
    if (control) e.control_truth = truth[*task];
    if (auto closed = engine.ingest(e)) {
      pool.remove(*task);
      while (pool.size() < cfg.open_tasks && release()) {
      }
    }
    events.push_back({slot.time, player.id, detail::padded('r', slot.round + 1, round_width), task_ids[*task], answer,
                      control, e.control_truth});
  }

  for (std::size_t t = 0; t < released; ++t) {
    out.truth.task_truth[task_ids[t]] = truth[t];
    out.truth.task_hard[task_ids[t]] = hard[t] != 0;
  }
  for (std::size_t c = 0; c < cfg.n_control_tasks; ++c) {
    out.truth.task_truth[task_ids[cfg.n_tasks + c]] = truth[cfg.n_tasks + c];
  }
  for (const auto& p : players) out.truth.player_archetype[p.id] = cfg.archetypes[p.archetype].name;
  out.log = assign_periods(EventLog::build(events, cfg.categories), cfg.periods);
  return out;
}

namespace detail {

/// Users and solved tasks planted exactly per period: every task is answered
/// unanimously by min_contributions distinct users of its period, each answer
/// in its own single-player round, and every user takes part at least once.
inline SimulationResult generate_planted(const SimulationConfig& cfg) {
  Rng rng(cfg.rng_seed);
  SimulationResult out;
  const auto& totals = *cfg.planted_totals;
  const auto quorum = cfg.inference.min_contributions;
  std::vector<ContributionEvent> events;
  std::size_t player_no = 0, task_no = 0, round_no = 0;
  out.truth.archetype_order.push_back("planted");
  for (const auto& period : cfg.periods) {
    const auto users = totals.users.contains(period.name) ? totals.users.at(period.name) : 0;
    const auto solved = totals.solved.contains(period.name) ? totals.solved.at(period.name) : 0;
    if (users == 0) continue;
    std::vector<std::string> ids;
    for (std::size_t u = 0; u < users; ++u) {
      ids.push_back(padded('p', ++player_no, 6));
      out.truth.player_archetype[ids.back()] = "planted";
    }
    // enough tasks to touch every user; tasks beyond `solved` stay one short of the quorum
    const auto answers_needed = std::max(solved * quorum, users);
    const auto tasks = solved + (answers_needed - solved * quorum + quorum - 2) / (quorum - 1);
    const auto span = period.end - period.start;
    const auto step = std::max<Timestamp>(1, span / static_cast<Timestamp>(tasks + 1) / static_cast<Timestamp>(quorum + 1));
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < tasks; ++k) {
      const auto task_id = padded('t', ++task_no, 7);
      const auto category = CategoryId{static_cast<std::uint16_t>(rng.below(cfg.categories.size()))};
      out.truth.task_truth[task_id] = category;
      const std::size_t voters = k < solved ? quorum : quorum - 1;
      const Timestamp base = period.start + static_cast<Timestamp>(k) * step * static_cast<Timestamp>(quorum + 1);
      for (std::size_t v = 0; v < voters; ++v) {
        events.push_back({base + static_cast<Timestamp>(v) * step, ids[cursor % users], padded('r', ++round_no, 8),
                          task_id, category, false, std::nullopt});
        ++cursor;
      }
    }
  }
  if (events.empty()) throw Error(ErrorCode::InfeasibleConfig, "planted totals produce no events");
  out.log = assign_periods(EventLog::build(events, cfg.categories), cfg.periods);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ground-truth checks

/// Row-stochastic confusion matrix archetype x assigned profile. Rows follow
/// the archetype order of the ground truth; archetypes with no profiled player
/// are omitted.
struct ProfileConfusion {
  std::vector<std::string> archetypes;
  std::vector<std::array<double, 4>> rows;
  std::vector<std::size_t> players;
};

inline ProfileConfusion planted_profile_recovery(const GroundTruth& truth, std::span<const ProfileAssignment> assignments) {
  std::map<std::string, std::array<std::size_t, 4>> counts;
  for (const auto& a : assignments) {
    auto it = truth.player_archetype.find(a.player_id);
    if (it == truth.player_archetype.end()) continue;
    ++counts[it->second][static_cast<std::size_t>(a.profile)];
  }
  ProfileConfusion m;
  for (const auto& name : truth.archetype_order) {
    auto it = counts.find(name);
    if (it == counts.end()) continue;
    std::size_t n = 0;
    for (auto c : it->second) n += c;
    std::array<double, 4> row{};
    for (std::size_t i = 0; i < 4; ++i) row[i] = static_cast<double>(it->second[i]) / static_cast<double>(n);
    m.archetypes.push_back(name);
    m.rows.push_back(row);
    m.players.push_back(n);
  }
  return m;
}

struct LabelRecovery {
  std::size_t solved = 0;
  std::size_t matching = 0;
  double fraction() const { return solved ? static_cast<double>(matching) / static_cast<double>(solved) : 0.0; }
};

inline LabelRecovery planted_label_recovery(const EventLog& log, std::span<const TaskResolution> resolutions,
                                            const GroundTruth& truth) {
  LabelRecovery r;
  for (const auto& res : resolutions) {
    if (res.is_control || !res.solved() || !res.final_category) continue;
    auto it = truth.task_truth.find(log.task_ids()[res.task]);
    if (it == truth.task_truth.end()) continue;
    ++r.solved;
    if (it->second == *res.final_category) ++r.matching;
  }
  return r;
}

inline void write_task_truth_csv(const GroundTruth& truth, const CategorySet& categories, std::ostream& out) {
  out << "task_id,true_category\n";
  for (const auto& [task, category] : truth.task_truth) out << task << ',' << categories.name(category) << '\n';
}

inline void write_player_archetype_csv(const GroundTruth& truth, std::ostream& out) {
  out << "player_id,archetype\n";
  for (const auto& [player, archetype] : truth.player_archetype) out << player << ',' << archetype << '\n';
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const SimulationConfig& cfg) {
  using nlohmann::json;
  json archetypes = json::array();
  for (const auto& a : cfg.archetypes) {
    json j{{"name", a.name},
           {"count", a.count},
           {"answer_accuracy", a.answer_accuracy},
           {"rounds_per_active_day", {{"mean", a.rounds_per_active_day.mean}, {"dispersion", a.rounds_per_active_day.dispersion}}},
           {"images_per_round", {{"mean", a.images_per_round.mean}, {"sd", a.images_per_round.sd}}},
           {"period_multiplier", a.period_multiplier}};
    if (a.hard_accuracy) j["hard_accuracy"] = *a.hard_accuracy;
    json pattern{{"skip_probability", a.active_days.skip_probability}};
    switch (a.active_days.kind) {
      case DayPattern::Kind::daily: pattern["kind"] = "daily"; break;
      case DayPattern::Kind::every_n_days:
        pattern["kind"] = "every_n_days";
        pattern["n"] = a.active_days.n;
        break;
      case DayPattern::Kind::burst_then_quit:
        pattern["kind"] = "burst_then_quit";
        pattern["days"] = a.active_days.days;
        break;
    }
    j["active_day_pattern"] = pattern;
    archetypes.push_back(j);
  }
  json mix = json::array();
  for (std::size_t c = 0; c < cfg.category_mix.size(); ++c) {
    mix.push_back({{"category", cfg.categories.names()[c]},
                   {"prevalence", cfg.category_mix[c].prevalence},
                   {"hard_fraction", cfg.category_mix[c].hard_fraction},
                   {"confusion", cfg.category_mix[c].confusion}});
  }
  json j{{"rng_seed", cfg.rng_seed},
         {"categories", cfg.categories.names()},
         {"category_mix", mix},
         {"n_tasks", cfg.n_tasks},
         {"n_control_tasks", cfg.n_control_tasks},
         {"control_injection_rate", cfg.control_injection_rate},
         {"open_tasks", cfg.open_tasks},
         {"pairing_window", cfg.pairing_window},
         {"round_duration", cfg.round_duration},
         {"answer_model", cfg.answer_model == AnswerModel::stratified ? "stratified" : "random"},
         {"periods", periods_to_json(cfg.periods)},
         {"inference", to_json(cfg.inference)},
         {"archetypes", archetypes}};
  if (cfg.planted_totals) j["planted_totals"] = {{"users", cfg.planted_totals->users}, {"solved", cfg.planted_totals->solved}};
  return j;
}

inline SimulationConfig competition_preset();
inline SimulationConfig planted_totals_preset();

/// Reads a simulation config. A "preset" key ("competition" or "planted_totals")
/// starts from the built-in configuration; other keys then override it.
inline SimulationConfig parse_simulation_config(const nlohmann::json& doc) {
  try {
    SimulationConfig cfg;
    if (doc.contains("preset")) {
      const auto name = doc.at("preset").get<std::string>();
      if (name == "competition") {
        cfg = competition_preset();
      } else if (name == "planted_totals") {
        cfg = planted_totals_preset();
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
      }
    }
    if (doc.contains("rng_seed")) cfg.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
    if (doc.contains("categories")) cfg.categories = CategorySet(doc.at("categories").get<std::vector<std::string>>());
    if (doc.contains("category_mix") && !doc.at("category_mix").empty()) {
      cfg.category_mix.assign(cfg.categories.size(), CategoryMix{});
      for (const auto& m : doc.at("category_mix")) {
        auto& slot = cfg.category_mix.at(cfg.categories.at(m.at("category").get<std::string>()).value);
        slot.prevalence = m.value("prevalence", 1.0);
        slot.hard_fraction = m.value("hard_fraction", 0.0);
        slot.confusion = m.value("confusion", std::vector<double>{});
      }
    }
    if (doc.contains("n_tasks")) cfg.n_tasks = doc.at("n_tasks").get<std::size_t>();
    if (doc.contains("n_control_tasks")) cfg.n_control_tasks = doc.at("n_control_tasks").get<std::size_t>();
    if (doc.contains("control_injection_rate")) cfg.control_injection_rate = doc.at("control_injection_rate").get<double>();
    if (doc.contains("open_tasks")) cfg.open_tasks = doc.at("open_tasks").get<std::size_t>();
    if (doc.contains("pairing_window")) cfg.pairing_window = doc.at("pairing_window").get<Timestamp>();
    if (doc.contains("round_duration")) cfg.round_duration = doc.at("round_duration").get<Timestamp>();
    if (doc.contains("answer_model")) {
      const auto m = doc.at("answer_model").get<std::string>();
      if (m != "random" && m != "stratified") throw Error(ErrorCode::InvalidConfig, "unknown answer_model '" + m + "'");
      cfg.answer_model = m == "stratified" ? AnswerModel::stratified : AnswerModel::random;
    }
    if (doc.contains("periods")) cfg.periods = parse_periods(doc.at("periods"));
    if (doc.contains("inference")) cfg.inference = parse_inference_config(doc.at("inference"));
    if (doc.contains("archetypes")) {
      cfg.archetypes.clear();
      for (const auto& j : doc.at("archetypes")) {
        ArchetypeSpec a;
        a.name = j.at("name").get<std::string>();
        a.count = j.at("count").get<std::size_t>();
        a.answer_accuracy = j.at("answer_accuracy").get<double>();
        if (j.contains("hard_accuracy")) a.hard_accuracy = j.at("hard_accuracy").get<double>();
        if (j.contains("rounds_per_active_day")) {
          a.rounds_per_active_day.mean = j["rounds_per_active_day"].value("mean", 1.0);
          a.rounds_per_active_day.dispersion = j["rounds_per_active_day"].value("dispersion", 0.0);
        }
        if (j.contains("images_per_round")) {
          a.images_per_round.mean = j["images_per_round"].value("mean", 10.0);
          a.images_per_round.sd = j["images_per_round"].value("sd", 0.0);
        }
        if (j.contains("active_day_pattern")) {
          const auto& p = j["active_day_pattern"];
          const auto kind = p.value("kind", std::string("burst_then_quit"));
          if (kind == "daily") {
            a.active_days.kind = DayPattern::Kind::daily;
          } else if (kind == "every_n_days") {
            a.active_days.kind = DayPattern::Kind::every_n_days;
          } else if (kind == "burst_then_quit") {
            a.active_days.kind = DayPattern::Kind::burst_then_quit;
          } else {
            throw Error(ErrorCode::InvalidConfig, "unknown active_day_pattern '" + kind + "'");
          }
          a.active_days.n = p.value("n", 1);
          a.active_days.days = p.value("days", 1);
          a.active_days.skip_probability = p.value("skip_probability", 0.0);
        }
        if (j.contains("period_multiplier")) a.period_multiplier = j["period_multiplier"].get<std::map<std::string, double>>();
        cfg.archetypes.push_back(std::move(a));
      }
    }
    if (doc.contains("planted_totals")) {
      PlantedTotals t;
      t.users = doc["planted_totals"].value("users", std::map<std::string, std::size_t>{});
      t.solved = doc["planted_totals"].value("solved", std::map<std::string, std::size_t>{});
      cfg.planted_totals = t;
    }
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("simulation config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Presets

/// Four months before, one month during and four months after a competition,
/// starting 2018-01-01 UTC.
inline std::vector<IncentivePeriod> competition_periods() {
  constexpr Timestamp start = 1'514'764'800;
  constexpr Timestamp day = kSecondsPerDay;
  return {{"before", start, start + 120 * day, Motivation::intrinsic},
          {"during", start + 120 * day, start + 150 * day, Motivation::extrinsic},
          {"after", start + 150 * day, start + 270 * day, Motivation::intrinsic}};
}

inline SimulationConfig planted_totals_preset() {
  SimulationConfig cfg;
  cfg.periods = competition_periods();
  cfg.control_injection_rate = 0.0;
  cfg.n_control_tasks = 0;
  cfg.planted_totals = PlantedTotals{{{"before", 285}, {"during", 174}, {"after", 174}},
                                     {{"before", 1'830}, {"during", 24'600}, {"after", 1'300}}};
  return cfg;
}

}  // namespace gwap

#include "gwap/presets.hpp"
