#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gwap/error.hpp"
#include "gwap/ingest.hpp"
#include "gwap/report.hpp"
#include "gwap/simulator.hpp"
#include "gwap/truth_inference.hpp"

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw gwap::Error(gwap::ErrorCode::IoFailure, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw gwap::Error(gwap::ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

gwap::CategorySet load_categories(const std::optional<fs::path>& path) {
  if (!path) return {};
  try {
    return gwap::parse_categories(read_json(*path));
  } catch (const nlohmann::json::exception& e) {
    throw gwap::Error(gwap::ErrorCode::InvalidConfig, path->string() + ": " + e.what());
  }
}

gwap::InferenceConfig load_inference(const std::optional<fs::path>& path) {
  if (!path) return {};
  return gwap::parse_inference_config(read_json(*path));
}

gwap::EventLog load_log(const fs::path& path, const gwap::CategorySet& categories) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gwap::Error(gwap::ErrorCode::IoFailure, "cannot open " + path.string());
  return gwap::parse_log(in, categories);
}

template <class Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  gwap::write_text_file(path, out.str());
}

struct AnalyzeArgs {
  fs::path log, periods, categories, out = ".";
  std::optional<fs::path> inference;
  std::string format = "json";
  bool partial = false;
  bool per_period_thresholds = false;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto categories = load_categories(a.categories);
  const auto config = load_inference(a.inference);
  std::vector<gwap::IncentivePeriod> periods;
  try {
    periods = gwap::parse_periods(read_json(a.periods));
  } catch (const nlohmann::json::exception& e) {
    throw gwap::Error(gwap::ErrorCode::InvalidConfig, a.periods.string() + ": " + e.what());
  }
  const auto log = gwap::assign_periods(load_log(a.log, categories), std::move(periods));

  gwap::AnalysisOptions options;
  options.partial = a.partial;
  if (a.per_period_thresholds) options.thresholds = gwap::ThresholdMode::per_period;
  const auto report = gwap::run_analysis(log, config, options);
  const auto format = a.format == "json" ? gwap::ReportFormat::json : gwap::ReportFormat::csv_bundle;
  for (const auto& path : gwap::emit(report, format, a.out)) std::cout << path.string() << '\n';
  for (const auto& [section, message] : report.errors) std::cerr << "section " << section << " failed: " << message << '\n';
  return 0;
}

struct SimulateArgs {
  fs::path config, out;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a) {
  auto cfg = gwap::parse_simulation_config(read_json(a.config));
  cfg.rng_seed = a.seed;
  const auto sim = gwap::generate(cfg);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw gwap::Error(gwap::ErrorCode::IoFailure, "cannot create " + a.out.string() + ": " + ec.message());
  gwap::write_text_file(a.out / "log.csv", gwap::serialize_log(sim.log));
  gwap::write_text_file(a.out / "periods.json", gwap::periods_to_json(sim.log.periods()).dump(2) + "\n");
  gwap::write_text_file(a.out / "categories.json", gwap::categories_to_json(sim.log.categories()).dump(2) + "\n");
  gwap::write_text_file(a.out / "config.json", gwap::to_json(cfg).dump(2) + "\n");
  write_with(a.out / "task_truth.csv", [&](std::ostream& o) { gwap::write_task_truth_csv(sim.truth, cfg.categories, o); });
  write_with(a.out / "player_archetype.csv", [&](std::ostream& o) { gwap::write_player_archetype_csv(sim.truth, o); });
  for (const auto& w : sim.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << sim.log.size() << " events, " << sim.log.player_count() << " players written to " << a.out.string()
            << '\n';
  return 0;
}

struct InferArgs {
  fs::path log, out;
  std::optional<fs::path> inference, categories;
};

int run_infer(const InferArgs& a) {
  const auto log = load_log(a.log, load_categories(a.categories));
  const auto resolutions = gwap::resolve_all(log, load_inference(a.inference));
  write_with(a.out, [&](std::ostream& o) { gwap::write_resolutions_csv(log, resolutions, o); });
  return 0;
}

struct ValidateArgs {
  fs::path log;
  std::optional<fs::path> categories;
};

int run_validate(const ValidateArgs& a) {
  try {
    const auto report = gwap::validate_log(load_log(a.log, load_categories(a.categories)));
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "ok: " << report.events << " events, " << report.players << " players, " << report.rounds
              << " rounds, " << report.tasks << " tasks, " << report.control_events << " control answers\n";
    return 0;
  } catch (const gwap::Error& e) {
    std::cout << "invalid: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analyze and simulate game-with-a-purpose contribution logs", "gwap-lens"};
  app.set_version_flag("--version", std::string(gwap::kToolVersion));
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Run truth inference and every analysis over a log");
  an->add_option("--log", analyze.log, "Contribution log CSV")->required()->check(CLI::ExistingFile);
  an->add_option("--periods", analyze.periods, "Incentive periods JSON")->required()->check(CLI::ExistingFile);
  an->add_option("--categories", analyze.categories, "Category set JSON")->required()->check(CLI::ExistingFile);
  an->add_option("--inference", analyze.inference, "Truth-inference config JSON")->check(CLI::ExistingFile);
  an->add_option("--out", analyze.out, "Output directory")->capture_default_str();
  an->add_option("--format", analyze.format, "json or csv-bundle")
      ->check(CLI::IsMember({"json", "csv-bundle"}))
      ->capture_default_str();
  an->add_flag("--partial", analyze.partial, "Keep going when a section fails and mark it null");
  an->add_flag("--per-period-thresholds", analyze.per_period_thresholds,
               "Profile each period against its own medians instead of the global ones");

  SimulateArgs simulate;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic log with planted ground truth");
  sim->add_option("--config", simulate.config, "Simulation config JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", simulate.seed, "RNG seed")->required();
  sim->add_option("--out", simulate.out, "Output directory")->required();

  InferArgs infer;
  auto* inf = app.add_subcommand("infer", "Resolve task labels and write one row per task");
  inf->add_option("--log", infer.log, "Contribution log CSV")->required()->check(CLI::ExistingFile);
  inf->add_option("--inference", infer.inference, "Truth-inference config JSON")->check(CLI::ExistingFile);
  inf->add_option("--categories", infer.categories, "Category set JSON")->check(CLI::ExistingFile);
  inf->add_option("--out", infer.out, "Output CSV")->required();

  ValidateArgs validate;
  auto* val = app.add_subcommand("validate", "Check a log against the schema and its invariants");
  val->add_option("--log", validate.log, "Contribution log CSV")->required()->check(CLI::ExistingFile);
  val->add_option("--categories", validate.categories, "Category set JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*an) return run_analyze(analyze);
    if (*sim) return run_simulate(simulate);
    if (*inf) return run_infer(infer);
    if (*val) return run_validate(validate);
  } catch (const gwap::Error& e) {
    std::cerr << "gwap-lens: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gwap-lens: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
