// causalmine: command-line front end over a run directory.
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "causalmine/error.h"
#include "causalmine/pipeline.h"
#include "causalmine/server.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace causalmine;

namespace {

std::vector<std::string> split_models(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::kPreconditionFailed: return 3;
    case ErrorCode::kConflict: return 4;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedInput: return 5;
    default: return 1;
  }
}

int fail(const std::string& stage, ErrorCode code, const std::string& message) {
  json j = {{"error", {{"stage", stage}, {"code", error_code_name(code)}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
  return exit_code(code);
}

ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal quad mining: train, classify, review, evolve"};
  app.require_subcommand(1);

  std::string config_path, run_dir, dataset, stage = "4", models_arg, verdicts_path;
  std::string runs_root, host = "127.0.0.1", token;
  int port = 8080;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--run-dir", run_dir, "run directory")->required();
    sub->add_option("--models", models_arg, "comma-separated model ids (default: all)");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "build training quads and vector stores");
  add_common(train_cmd);
  dataset = "train";
  train_cmd->add_option("--dataset", dataset, "training dataset name")->capture_default_str();

  std::string ds_other = "test";
  CLI::App* extract_cmd = app.add_subcommand("extract", "extract candidate triples");
  add_common(extract_cmd);
  extract_cmd->add_option("--dataset", ds_other, "dataset name")->capture_default_str();

  CLI::App* classify_cmd = app.add_subcommand("classify", "classify candidates with the ensemble");
  add_common(classify_cmd);
  classify_cmd->add_option("--dataset", ds_other, "dataset name")->capture_default_str();

  CLI::App* enrich_cmd = app.add_subcommand("enrich", "attach concept annotations to predictions");
  add_common(enrich_cmd);

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score a stage on a labeled dataset");
  add_common(eval_cmd);
  eval_cmd->add_option("--dataset", ds_other, "dataset name")->capture_default_str();
  eval_cmd->add_option("--stage", stage, "1|2|3|4|feedback")
      ->check(CLI::IsMember({"1", "2", "3", "4", "feedback"}))
      ->capture_default_str();

  CLI::App* fb_cmd = app.add_subcommand("feedback-apply", "import verdicts and evolve the stores");
  add_common(fb_cmd);
  fb_cmd->add_option("--verdicts", verdicts_path, "JSONL of verdicts to append first")
      ->check(CLI::ExistingFile);

  CLI::App* serve_cmd = app.add_subcommand("serve", "serve the review API");
  serve_cmd->add_option("--config", config_path, "config (for api_token)")->check(CLI::ExistingFile);
  serve_cmd->add_option("--runs-root", runs_root, "directory holding run directories");
  serve_cmd->add_option("--run-dir", run_dir, "serve the runs next to this run");
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--token", token, "static bearer token (or CAUSALMINE_API_TOKEN)");

  CLI11_PARSE(app, argc, argv);
  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();

  try {
    if (cmd == serve_cmd) {
      if (runs_root.empty() && !run_dir.empty())
        runs_root = fs::absolute(run_dir).lexically_normal().parent_path().string();
      if (runs_root.empty()) return fail(name, ErrorCode::kInvalidArgument, "--runs-root or --run-dir is required");
      if (token.empty())
        if (const char* t = std::getenv("CAUSALMINE_API_TOKEN")) token = t;
      if (token.empty() && !config_path.empty()) token = load_config(config_path).api_token;
      ApiServer server(runs_root, token);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ":" << port << std::endl;
      if (!server.listen(host, port))
        return fail(name, ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }

    const PipelineConfig config = load_config(config_path);
    const std::vector<std::string> requested = split_models(models_arg);
    Run run = Run::open_or_create(run_dir, config, requested);
    if (!requested.empty() && requested != run.record().models)
      return fail(name, ErrorCode::kInvalidArgument, "--models differs from the run's panel");
    const Resources resources = build_resources(config, run.record().models);

    json out;
    if (cmd == train_cmd) {
      const TrainSummary s = train(run, config, resources, dataset);
      out = {{"seeds", s.seeds}, {"training_quads", s.quads}, {"stores", s.models}};
    } else if (cmd == extract_cmd) {
      out = {{"candidates", extract(run, config, resources, ds_other)}};
    } else if (cmd == classify_cmd) {
      const ClassifySummary s = classify(run, config, resources, ds_other);
      out = {{"candidates", s.candidates}, {"predicted", s.predicted}, {"blocklisted", s.blocklisted}};
    } else if (cmd == enrich_cmd) {
      out = {{"enriched", enrich(run, resources)}};
    } else if (cmd == eval_cmd) {
      const EvaluationReport r = evaluate(run, config, resources, parse_stage(stage), ds_other);
      std::cout << report_csv_header() << report_csv_row(r);
      return 0;
    } else if (cmd == fb_cmd) {
      if (!verdicts_path.empty()) {
        VerdictLog log(run.path("verdicts.jsonl"));
        const auto known = known_quad_ids(run);
        std::ifstream in(verdicts_path);
        std::string line;
        while (std::getline(in, line))
          if (!line.empty()) submit_verdict(verdict_from_json(json::parse(line)), known, log);
      }
      const EvolveOutcome o = evolve(run, resources);
      out = {{"iteration", o.iteration}, {"evolution", to_json(o.report)}};
      if (o.metrics) out["metrics"] = to_json(*o.metrics);
    }
    out["run_id"] = run.record().run_id;
    std::cout << out.dump() << std::endl;
    return 0;
  } catch (const Error& e) {
    return fail(name, e.code(), e.what());
  } catch (const json::exception& e) {
    return fail(name, ErrorCode::kMalformedInput, e.what());
  } catch (const std::exception& e) {
    return fail(name, ErrorCode::kIo, e.what());
  }
}
