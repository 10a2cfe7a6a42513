// psmplace: base placement pipeline for two RCM-constrained surgical arms.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "psmplace/io.hpp"
#include "psmplace/optimizer.hpp"
#include "psmplace/proxy.hpp"
#include "psmplace/score_maps.hpp"
#include "psmplace/scoring.hpp"
#include "psmplace/trajectory.hpp"

namespace fs = std::filesystem;
using namespace psmplace;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::uint64_t seed = 0;
};

WorldLayout resolve_layout(const Common& c) {
  WorldLayout layout = c.config.empty() ? WorldLayout::defaults() : load_config(c.config);
  layout.validate();
  return layout;
}

nlohmann::json metadata(const std::string& command, const Common& c, const WorldLayout& layout) {
  return {{"command", command},
          {"tool_version", kToolVersion},
          {"seed", c.seed},
          {"config_digest", config_digest(layout)},
          {"config_path", c.config}};
}

// CSV outputs keep their header on line one, so provenance goes next to them.
void write_manifest(const fs::path& artifact, nlohmann::json meta, const nlohmann::json& params) {
  meta["output"] = artifact.filename().string();
  meta["params"] = params;
  write_json(artifact.string() + ".manifest.json", meta);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
}

Arm parse_arm(int a) {
  if (a != 1 && a != 2) throw UsageError("--arm must be 1 or 2");
  return a == 1 ? Arm::kOne : Arm::kTwo;
}

// ---- sample ---------------------------------------------------------------

struct SampleArgs {
  int setups = 700;
  int joint_samples = kDefaultJointSamples;
  std::string backend = "geometric";
  std::string models_dir = "models";
  std::string out = "dataset.csv";
};

int run_sample(const Common& c, const SampleArgs& a) {
  if (a.setups < 1) throw UsageError("--setups must be >= 1");
  if (a.joint_samples < 1) throw UsageError("--joint-samples must be >= 1");
  const WorldLayout layout = resolve_layout(c);
  std::unique_ptr<CollisionBackend> backend;
  if (a.backend == "geometric") {
    backend = std::make_unique<GeometricBackend>(layout);
  } else {
    backend = std::make_unique<FastronBackend>(layout, load_proxy_models(a.models_dir));
  }
  DatasetOptions opt;
  opt.joint_samples = a.joint_samples;
  const ScoreDataset ds = generate_dataset(layout, a.setups, *backend, c.seed, opt);
  write_dataset_csv(ds, a.out);
  write_manifest(a.out, metadata("sample", c, layout),
                 {{"setups", a.setups}, {"joint_samples", a.joint_samples}, {"backend", a.backend}});
  std::printf("wrote %d rows to %s (backend %s)\n", a.setups, a.out.c_str(), a.backend.c_str());
  return 0;
}

// ---- train-fastron --------------------------------------------------------

struct TrainArgs {
  ProxyTrainingSettings settings;
  std::string out_dir = "models";
};

int run_train(const Common& c, const TrainArgs& a) {
  const WorldLayout layout = resolve_layout(c);
  ensure_dir(a.out_dir);
  const ProxyTrainingResult r = train_proxy_models(layout, a.settings, c.seed);
  const nlohmann::json meta = metadata("train-fastron", c, layout);
  save_proxy_models(r.models, a.out_dir, meta);

  nlohmann::json report = {{"metadata", meta}};
  std::printf("%-6s %9s %8s %8s %8s %8s %11s\n", "model", "supports", "updates", "accuracy", "tpr",
              "tnr", "query_us");
  const std::array<const FastronModel*, 3> ms{&r.models.env1, &r.models.env2, &r.models.self};
  for (std::size_t k = 0; k < 3; ++k) {
    const FastronEvaluation& e = r.holdout[k];
    std::printf("%-6s %9zu %8zu %8.4f %8.4f %8.4f %11.3f\n", kProxyNames[k], ms[k]->size(),
                r.info[k].updates, e.accuracy, e.tpr, e.tnr, e.mean_query_seconds * 1e6);
    report["models"][kProxyNames[k]] = {{"supports", ms[k]->size()},
                                        {"updates", r.info[k].updates},
                                        {"converged", r.info[k].converged},
                                        {"accuracy", e.accuracy},
                                        {"tpr", e.tpr},
                                        {"tnr", e.tnr}};
  }
  write_json(fs::path(a.out_dir) / "fastron_report.json", report);
  return 0;
}

// ---- fit-svr --------------------------------------------------------------

struct FitArgs {
  std::string data = "dataset.csv";
  std::string out_dir = "models";
  ScoreMapParams params;
  double gamma_reach = 5.0;
  double gamma_env = 5.0;
  double gamma_self = 1.0;
};

int run_fit(const Common& c, FitArgs a) {
  const WorldLayout layout = resolve_layout(c);
  const ScoreDataset ds = read_dataset_csv(a.data);
  a.params.svr[0].gamma = a.params.svr[1].gamma = a.gamma_reach;
  a.params.svr[2].gamma = a.params.svr[3].gamma = a.gamma_env;
  a.params.svr[4].gamma = a.gamma_self;
  a.params.split_seed = c.seed;
  ensure_dir(a.out_dir);
  const FittedScoreMaps fit = fit_score_maps(ds, layout, a.params);
  nlohmann::json meta = metadata("fit-svr", c, layout);
  meta["dataset"] = fs::path(a.data).filename().string();
  save_score_models(fit.models, a.out_dir, meta);

  nlohmann::json report = {{"metadata", meta},
                           {"train_rows", fit.train_rows},
                           {"holdout_rows", fit.holdout_rows}};
  const std::array<const SvrModel*, 5> ms{&fit.models.reach1, &fit.models.reach2, &fit.models.env1,
                                          &fit.models.env2, &fit.models.self};
  std::printf("%-10s %9s %12s\n", "score", "supports", "holdout_rmse");
  for (std::size_t k = 0; k < 5; ++k) {
    std::printf("%-10s %9zu %12.4f\n", kScoreNames[k], ms[k]->size(), fit.holdout_rmse[k]);
    report["holdout_rmse"][kScoreNames[k]] = fit.holdout_rmse[k];
  }
  write_json(fs::path(a.out_dir) / "svr_report.json", report);
  return 0;
}

// ---- optimize -------------------------------------------------------------

struct OptArgs {
  std::string models_dir = "models";
  Weights weights;
  int starts = 100;
  std::string out = "solution.json";
};

int run_optimize(const Common& c, const OptArgs& a) {
  if (a.starts < 1) throw UsageError("--starts must be >= 1");
  const WorldLayout layout = resolve_layout(c);
  ScoreModels models = load_score_models(a.models_dir);
  std::unique_ptr<ObjectiveSpec> spec;
  try {
    spec = std::make_unique<ObjectiveSpec>(a.weights, std::move(models));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Solution sol = multi_start_optimize(*spec, layout, a.starts, c.seed);
  nlohmann::json doc = solution_to_json(sol, a.weights, c.seed);
  doc["metadata"] = metadata("optimize", c, layout);
  write_json(a.out, doc);
  std::printf("f* = %.6f (bound %.1f)\n", sol.f, spec->max_value());
  std::printf("arm1: x %.4f  y %.4f  theta %.4f\n", sol.setup.arm1.x, sol.setup.arm1.y,
              sol.setup.arm1.theta);
  std::printf("arm2: x %.4f  y %.4f  theta %.4f\n", sol.setup.arm2.x, sol.setup.arm2.y,
              sol.setup.arm2.theta);
  return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvalArgs {
  std::string solution;
  std::vector<double> setup;
  std::string out;
};

int run_evaluate(const Common& c, const EvalArgs& a) {
  if (a.solution.empty() == a.setup.empty()) {
    throw UsageError("give exactly one of --solution or --setup");
  }
  const WorldLayout layout = resolve_layout(c);
  SetupPose setup;
  if (!a.solution.empty()) {
    setup = setup_from_json(read_json(a.solution));
  } else {
    if (a.setup.size() != 6) throw UsageError("--setup takes x1 y1 th1 x2 y2 th2");
    setup = {{a.setup[0], a.setup[1], a.setup[2]}, {a.setup[3], a.setup[4], a.setup[5]}};
  }
  const TrajectoryReport rep = evaluate_setup(setup, layout);
  std::fputs(report_table(rep).c_str(), stdout);
  if (!a.out.empty()) {
    nlohmann::json doc = report_to_json(rep);
    doc["setup"] = {{"arm1", {setup.arm1.x, setup.arm1.y, setup.arm1.theta}},
                    {"arm2", {setup.arm2.x, setup.arm2.y, setup.arm2.theta}}};
    doc["metadata"] = metadata("evaluate", c, layout);
    write_json(a.out, doc);
  }
  return 0;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string models_dir = "models";
  std::size_t queries = 100000;
};

int run_bench(const Common& c, const BenchArgs& a) {
  if (a.queries < 1) throw UsageError("--queries must be >= 1");
  const WorldLayout layout = resolve_layout(c);
  const FastronModels models = load_proxy_models(a.models_dir);
  const BenchResult b = bench_collision(layout, models, a.queries, c.seed);
  std::printf("%-10s %10s %14s\n", "checker", "queries", "mean_us");
  std::printf("%-10s %10zu %14.3f\n", "geometric", b.queries, b.geometric_seconds * 1e6);
  std::printf("%-10s %10zu %14.3f\n", "proxy", b.queries, b.proxy_seconds * 1e6);
  std::printf("proxy/geometric time ratio: %.3f\n", b.ratio());
  return 0;
}

// ---- heatmap --------------------------------------------------------------

struct HeatArgs {
  std::string models_dir = "models";
  int arm = 0;
  int res = 50;
  Weights weights;
  std::string out_prefix = "heatmap";
};

int run_heatmap(const Common& c, const HeatArgs& a) {
  if (a.res < 2) throw UsageError("--res must be >= 2");
  if (a.weights.reach < 0.0 || a.weights.env < 0.0) throw UsageError("weights must be non-negative");
  const WorldLayout layout = resolve_layout(c);
  const ScoreModels models = load_score_models(a.models_dir);
  std::vector<Arm> arms;
  if (a.arm == 0) arms = {Arm::kOne, Arm::kTwo};
  else arms = {parse_arm(a.arm)};
  for (Arm arm : arms) {
    const auto cells = arm_heatmap(models, layout, arm, a.res, a.weights);
    std::string text = "x,y,score\n";
    for (const HeatmapCell& cell : cells) {
      text += format_double(cell.x, 9) + ',' + format_double(cell.y, 9) + ',' +
              format_double(cell.score, 9) + '\n';
    }
    const fs::path out = a.out_prefix + "_arm" + std::to_string(arm_index(arm) + 1) + ".csv";
    write_text_atomic(out, text);
    write_manifest(out, metadata("heatmap", c, layout),
                   {{"arm", arm_index(arm) + 1},
                    {"res", a.res},
                    {"theta_samples", kHeatmapThetaSamples},
                    {"w_reach", a.weights.reach},
                    {"w_env", a.weights.env}});
    std::printf("wrote %s (%dx%d)\n", out.string().c_str(), a.res, a.res);
  }
  return 0;
}

void add_weights(CLI::App* cmd, Weights& w, bool with_self) {
  cmd->add_option("--w-reach", w.reach, "reachability weight")->capture_default_str();
  if (with_self) cmd->add_option("--w-self", w.self, "self-collision weight")->capture_default_str();
  cmd->add_option("--w-env", w.env, "environment-collision weight")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Base placement for two RCM-constrained surgical arms"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config, "world layout JSON (defaults if omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "generate a scored setup dataset (CSV)");
  c_sample->add_option("--setups", sample.setups, "number of base setups")->capture_default_str();
  c_sample->add_option("--joint-samples", sample.joint_samples, "joint samples per setup")
      ->capture_default_str();
  c_sample->add_option("--backend", sample.backend, "collision backend")
      ->check(CLI::IsMember({"geometric", "fastron"}))
      ->capture_default_str();
  c_sample->add_option("--models-dir", sample.models_dir, "proxy model directory (fastron backend)")
      ->capture_default_str();
  c_sample->add_option("--out", sample.out, "output CSV")->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train-fastron", "train the proxy collision classifiers");
  c_train->add_option("--env-samples", train.settings.env_samples)->capture_default_str();
  c_train->add_option("--self-samples", train.settings.self_samples)->capture_default_str();
  c_train->add_option("--holdout-samples", train.settings.holdout_samples)->capture_default_str();
  c_train->add_option("--env-updates", train.settings.env.max_updates)->capture_default_str();
  c_train->add_option("--self-updates", train.settings.self.max_updates)->capture_default_str();
  c_train->add_option("--env-gamma", train.settings.env.gamma)->capture_default_str();
  c_train->add_option("--self-gamma", train.settings.self.gamma)->capture_default_str();
  c_train->add_option("--beta", train.settings.env.beta, "conditional bias (both models)")
      ->capture_default_str();
  c_train->add_option("--max-supports", train.settings.env.max_supports, "support cap (both models)")
      ->capture_default_str();
  c_train->add_option("--out-dir", train.out_dir)->capture_default_str();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit-svr", "fit the five score maps");
  c_fit->add_option("--data", fit.data, "dataset CSV")->capture_default_str();
  c_fit->add_option("--out-dir", fit.out_dir)->capture_default_str();
  c_fit->add_option("--gamma-reach", fit.gamma_reach)->capture_default_str();
  c_fit->add_option("--gamma-env", fit.gamma_env)->capture_default_str();
  c_fit->add_option("--gamma-self", fit.gamma_self)->capture_default_str();
  c_fit->add_option("--holdout", fit.params.holdout_fraction, "held-out fraction")
      ->check(CLI::Range(0.0, 0.9))
      ->capture_default_str();

  OptArgs opt;
  auto* c_opt = app.add_subcommand("optimize", "maximize the weighted score over both bases");
  c_opt->add_option("--models-dir", opt.models_dir)->capture_default_str();
  add_weights(c_opt, opt.weights, true);
  c_opt->add_option("--starts", opt.starts, "multi-start count")->capture_default_str();
  c_opt->add_option("--out", opt.out)->capture_default_str();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "trajectory evaluation of a setup");
  c_eval->add_option("--solution", ev.solution, "solution JSON from optimize");
  c_eval->add_option("--setup", ev.setup, "x1 y1 th1 x2 y2 th2")->expected(6);
  c_eval->add_option("--out", ev.out, "report JSON");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "time geometric checker vs proxy");
  c_bench->add_option("--models-dir", bench.models_dir)->capture_default_str();
  c_bench->add_option("--queries", bench.queries)->capture_default_str();

  HeatArgs heat;
  auto* c_heat = app.add_subcommand("heatmap", "per-arm score grid, max over theta (CSV)");
  c_heat->add_option("--models-dir", heat.models_dir)->capture_default_str();
  c_heat->add_option("--arm", heat.arm, "1 or 2 (both if omitted)");
  c_heat->add_option("--res", heat.res, "grid points per axis")->capture_default_str();
  add_weights(c_heat, heat.weights, false);
  c_heat->add_option("--out-prefix", heat.out_prefix)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  // Shared by both models unless set per model above.
  train.settings.self.beta = train.settings.env.beta;
  train.settings.self.max_supports = train.settings.env.max_supports;

  try {
    if (c_sample->parsed()) return run_sample(common, sample);
    if (c_train->parsed()) return run_train(common, train);
    if (c_fit->parsed()) return run_fit(common, fit);
    if (c_opt->parsed()) return run_optimize(common, opt);
    if (c_eval->parsed()) return run_evaluate(common, ev);
    if (c_bench->parsed()) return run_bench(common, bench);
    if (c_heat->parsed()) return run_heatmap(common, heat);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
