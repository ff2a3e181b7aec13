#include "slr/run/runner.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>

#include "slr/tensor/checkpoint.h"

namespace slr {

namespace fs = std::filesystem;

namespace {

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string UtcNow() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool MetricsFinite(const IterationMetrics& m) {
  for (double v : {m.mean_reward, m.surrogate, m.value_loss, m.triplet_loss, m.kl,
                   m.lr, m.entropy, m.estimator_loss, m.grad_norm}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

fs::path SaveAgent(const Agent<float>& agent, const RunConfig& config, int iterations,
                   const fs::path& path) {
  Checkpoint c = AgentToCheckpoint(agent);
  c.step_count = iterations;
  c.config_hash = SharedConfigHash(config);
  c.metadata["seed"] = config.trainer.seed;
  SaveCheckpoint(c, path);
  return path;
}

std::string CheckpointName(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%06d.json", iteration);
  return buf;
}

double FinalWindowMean(const std::vector<IterationMetrics>& metrics, int window) {
  if (metrics.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(metrics.size(), window);
  double s = 0.0;
  for (std::size_t i = metrics.size() - n; i < metrics.size(); ++i) {
    s += metrics[i].mean_reward;
  }
  return s / static_cast<double>(n);
}

std::string Format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

RunPaths RunPathsFor(const fs::path& output_dir, const std::string& name,
                     std::uint64_t seed) {
  RunPaths p;
  p.root = output_dir / (name + "-" + std::to_string(seed));
  p.config = p.root / "config.toml";
  p.manifest = p.root / "manifest.json";
  p.metrics = p.root / "metrics.csv";
  p.checkpoints = p.root / "checkpoints";
  p.traces = p.root / "traces";
  return p;
}

std::string MetricsRow(const IterationMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d",
                m.iter, m.mean_reward, m.mean_ep_len, m.surrogate, m.value_loss,
                m.triplet_loss, m.kl, m.lr, m.terrain_level);
  return buf;
}

TrainResult TrainRun(const RunConfig& config, const TrainHooks& hooks,
                     std::ostream* log) {
  TrainResult result;
  result.paths = RunPathsFor(config.output_dir, config.name, config.trainer.seed);
  try {
    config.Validate();
  } catch (const ConfigError& e) {
    result.status = ExitCode::kConfigError;
    result.error = e.what();
    return result;
  }

  const RunPaths& paths = result.paths;
  fs::create_directories(paths.checkpoints);
  fs::create_directories(paths.traces);
  WriteText(paths.config, ConfigText(config));

  const auto start = std::chrono::steady_clock::now();
  Json manifest = Json::object();
  manifest["name"] = config.name;
  manifest["seed"] = config.trainer.seed;
  manifest["variant"] = std::string(VariantName(config.trainer.variant));
  manifest["config_hash"] = SharedConfigHash(config);
  manifest["started_at"] = UtcNow();
  manifest["checkpoints"] = Json::array();

  auto write_manifest = [&](const std::string& status) {
    manifest["status"] = status;
    manifest["iterations_completed"] = result.metrics.size();
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    WriteText(paths.manifest, manifest.dump(2) + "\n");
  };

  std::ofstream metrics(paths.metrics, std::ios::binary | std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write " + paths.metrics.string());
  metrics << kMetricsHeader << "\n";

  std::optional<Trainer> trainer;
  std::optional<Agent<float>> last_good;
  auto add_checkpoint = [&](const Agent<float>& agent, const std::string& file) {
    result.last_checkpoint =
        SaveAgent(agent, config, static_cast<int>(result.metrics.size()),
                  paths.checkpoints / file);
    manifest["checkpoints"].push_back("checkpoints/" + file);
  };

  try {
    trainer.emplace(config.trainer);
    Json networks = Json::array();
    for (const auto& [name, net] : trainer->agent().Networks()) networks.push_back(name);
    manifest["networks"] = networks;
    write_manifest("running");

    const int iterations = config.trainer.iterations;
    for (int i = 0; i < iterations; ++i) {
      last_good = trainer->agent();
      const IterationMetrics m = trainer->Iterate();
      if (!MetricsFinite(m) || !trainer->agent().AllFinite()) {
        throw NumericError("non-finite metrics or parameters at iteration " +
                           std::to_string(i));
      }
      if (hooks.after_iteration) hooks.after_iteration(config, m);
      result.metrics.push_back(m);
      metrics << MetricsRow(m) << "\n";
      metrics.flush();
      if (log) {
        *log << config.name << "-" << config.trainer.seed << " iter " << m.iter
             << " reward " << Format(m.mean_reward) << " kl " << Format(m.kl)
             << "\n";
      }
      const int done = i + 1;
      if (done % config.checkpoint_every == 0 && done < iterations) {
        add_checkpoint(trainer->agent(), CheckpointName(done));
      }
      write_manifest("running");
    }
    add_checkpoint(trainer->agent(), "final.json");
    result.final_reward = FinalWindowMean(result.metrics, config.final_window);
    manifest["final_reward"] = result.final_reward;
    write_manifest("ok");
  } catch (const NumericError& e) {
    result.status = ExitCode::kNumericAbort;
    result.error = e.what();
    if (last_good) add_checkpoint(*last_good, "last_good.json");
    manifest["error"] = result.error;
    write_manifest("numeric_abort");
  } catch (const ConfigError& e) {
    result.status = ExitCode::kConfigError;
    result.error = e.what();
    manifest["error"] = result.error;
    write_manifest("config_error");
  } catch (const std::exception& e) {
    result.status = ExitCode::kFailure;
    result.error = e.what();
    manifest["error"] = result.error;
    write_manifest("failed");
  }
  result.final_reward = FinalWindowMean(result.metrics, config.final_window);
  return result;
}

Agent<float> LoadAgentFor(const fs::path& checkpoint, const RunConfig& config) {
  Agent<float> agent = AgentFromCheckpoint(LoadCheckpoint(checkpoint));
  std::vector<std::string> issues;
  const AgentDims& a = agent.dims;
  const AgentDims& c = config.trainer.dims;
  auto compare = [&](const char* field, int got, int want) {
    if (got != want) {
      issues.push_back(std::string(field) + ": checkpoint has " +
                       std::to_string(got) + ", config has " + std::to_string(want));
    }
  };
  compare("dims.obs_dim", a.obs_dim, c.obs_dim);
  compare("dims.action_dim", a.action_dim, c.action_dim);
  compare("dims.privileged_dim", a.privileged_dim, c.privileged_dim);
  compare("slr.history_len", a.history_len, c.history_len);
  compare("slr.latent_dim", a.latent_dim, c.latent_dim);
  compare("networks.teacher_latent_dim", a.teacher_latent_dim, c.teacher_latent_dim);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return agent;
}

EvalReport EvalRun(const Agent<float>& agent, const RunConfig& config) {
  EvalConfig eval = config.eval;
  eval.seed = config.trainer.seed;
  return EvaluateTracking(agent, config.trainer.env, eval);
}

AnalyzeResult AnalyzeRun(const Agent<float>& agent, const RunConfig& config,
                         const fs::path& traces_dir) {
  AnalyzeResult r;
  CourseConfig course = config.course;
  course.seed = config.trainer.seed;
  r.trace = RecordLatents(agent, config.trainer.env, course);
  r.summary.silhouette = SeparabilityScore(r.trace);
  std::mt19937_64 rng(config.trainer.seed);
  const std::vector<double> null = ShuffledSeparability(r.trace, config.shuffles, rng);
  double s = 0.0;
  for (double v : null) s += v;
  r.summary.null_mean = s / static_cast<double>(null.size());
  r.summary.tails = TailStatistics(r.trace);
  r.summary.tracking = EvalRun(agent, config).aggregate;

  fs::create_directories(traces_dir);
  ExportTrace(r.trace, traces_dir / "latents.csv");
  WriteText(traces_dir / "analysis.json", SummaryJson(r.summary).dump(2) + "\n");
  return r;
}

AblationResult AblateRun(const RunConfig& config, const TrainHooks& hooks,
                         std::ostream* log) {
  config.Validate();
  AblationResult result;
  for (VariantKind kind : config.ablate.variants) {
    AblationRow row;
    row.variant = kind;
    std::vector<double> finals;
    for (std::uint64_t seed : config.ablate.seeds) {
      RunConfig run = config;
      run.name = config.name + "-" + std::string(VariantName(kind));
      run.trainer.variant = kind;
      run.trainer.seed = seed;
      AblationRun record;
      record.variant = kind;
      record.seed = seed;
      try {
        const TrainResult t = TrainRun(run, hooks, log);
        record.status = t.status;
        record.error = t.error;
        record.dir = t.paths.root;
        record.final_reward = t.final_reward;
      } catch (const std::exception& e) {
        record.status = ExitCode::kFailure;
        record.error = e.what();
      }
      ++row.runs;
      if (record.status == ExitCode::kOk) {
        finals.push_back(record.final_reward);
      } else {
        ++row.failed;
        if (log) *log << run.name << "-" << seed << " failed: " << record.error << "\n";
      }
      result.runs.push_back(record);
    }
    if (!finals.empty()) {
      double sum = 0.0;
      for (double f : finals) sum += f;
      row.mean = sum / finals.size();
      if (finals.size() > 1) {
        double ss = 0.0;
        for (double f : finals) ss += (f - row.mean) * (f - row.mean);
        row.std = std::sqrt(ss / (finals.size() - 1));
      }
    } else {
      row.mean = std::nan("");
      row.std = std::nan("");
    }
    result.rows.push_back(row);
  }

  fs::create_directories(config.output_dir);
  result.summary = fs::path(config.output_dir) / (config.name + "-ablation.csv");
  std::string csv = "variant,runs,failed,mean_final_reward,std_final_reward,finals\n";
  for (const AblationRow& row : result.rows) {
    std::string finals;
    for (const AblationRun& r : result.runs) {
      if (r.variant != row.variant) continue;
      if (!finals.empty()) finals += ";";
      finals += r.status == ExitCode::kOk ? Format(r.final_reward) : "failed";
    }
    csv += std::string(VariantName(row.variant)) + "," + std::to_string(row.runs) +
           "," + std::to_string(row.failed) + "," + Format(row.mean) + "," +
           Format(row.std) + "," + finals + "\n";
  }
  WriteText(result.summary, csv);
  return result;
}

}  // namespace slr
