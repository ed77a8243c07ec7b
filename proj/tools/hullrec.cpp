#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hullrec/config.hpp"
#include "hullrec/error.hpp"
#include "hullrec/pipeline.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("hullrec");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("HULLREC_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("HULLREC_LOG={} is not a log level, keeping info", env);
    else
      spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"hullrec: unexpectedness-aware recommendation over a heterogeneous information network"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::uint32_t> top_n;
  std::optional<std::uint32_t> fold;
  std::string output_dir;
  bool rating_only = false;

  app.add_option("--config", config_path, "configuration file (defaults apply when omitted)");
  app.add_option("--seed", seed, "seed for every stage");
  app.add_option("--alpha", alpha, "weight of unexpectedness in the utility, in [0, 1]");
  app.add_option("--top-n", top_n, "recommendation list length");
  app.add_option("--fold", fold, "cross-validation fold used by build-graph");
  app.add_option("--output-dir", output_dir, "directory holding all stage artifacts");
  app.require_subcommand(1, 1);
  app.fallthrough();

  const char* stages[][2] = {
      {"synth", "generate the planted-cluster dataset"},
      {"ingest", "read Yelp or TripAdvisor records and filter sparse users and items"},
      {"build-graph", "split interactions and build the HIN from the train part"},
      {"walk", "generate the random-walk corpus"},
      {"train", "train node embeddings and rating models"},
      {"recommend", "write Top-N lists"},
      {"evaluate", "compute metrics and print the table"},
      {"iterate", "run the iterative max-hull coverage experiment"},
  };
  for (const auto& [name, help] : stages) {
    auto* sub = app.add_subcommand(name, help);
    if (std::string(name) == "recommend")
      sub->add_flag("--rating-only", rating_only, "rank by predicted rating alone");
  }

  // CLI11 reports a stray word as a missing subcommand; name it instead.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("-", 0) == 0) {
      if (arg.find('=') == std::string::npos && arg != "--rating-only" && arg != "--help" && arg != "-h") ++i;
      continue;
    }
    bool known = false;
    for (const auto& stage : stages) known = known || arg == stage[0];
    if (!known) {
      spdlog::error("unknown subcommand '{}'", arg);
      return hullrec::exit_code(hullrec::ErrorKind::Config);
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hullrec::exit_code(hullrec::ErrorKind::Config);
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    hullrec::PipelineConfig cfg = config_path.empty() ? hullrec::PipelineConfig{} : hullrec::load_config(config_path);
    if (seed) cfg.set_seed(*seed);
    if (alpha) cfg.recommender.alpha = *alpha;
    if (top_n) cfg.recommender.top_n = *top_n;
    if (fold) cfg.split.fold = *fold;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    cfg.validate();

    hullrec::StageLog log;
    log.info = [](const std::string& m) { spdlog::info("{}", m); };
    log.warn = [](const std::string& m) { spdlog::warn("{}", m); };

    if (stage == "synth") hullrec::run_synth(cfg, log);
    else if (stage == "ingest") hullrec::run_ingest(cfg, log);
    else if (stage == "build-graph") hullrec::run_build_graph(cfg, log);
    else if (stage == "walk") hullrec::run_walk(cfg, log);
    else if (stage == "train") hullrec::run_train(cfg, log);
    else if (stage == "recommend") hullrec::run_recommend(cfg, rating_only, log);
    else if (stage == "evaluate") std::cout << hullrec::format_metrics_table(hullrec::run_evaluate(cfg, log));
    else if (stage == "iterate") hullrec::run_iterate(cfg, log);
    return 0;
  } catch (const hullrec::Error& e) {
    spdlog::error("{}: {}", stage, e.what());
    return hullrec::exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", stage, e.what());
    return 1;
  }
}
