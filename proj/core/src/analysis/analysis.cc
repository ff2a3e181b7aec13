#include "slr/analysis/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "slr/model/history.h"

namespace slr {

namespace {

MatF RowOf(std::span<const float> v) {
  MatF m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
  return m;
}

void CheckAgentDims(const Agent<float>& agent) {
  if (agent.dims.obs_dim != kObservationDim ||
      agent.dims.action_dim != kActionDim ||
      agent.dims.privileged_dim != kPrivilegedDim) {
    throw std::invalid_argument(
        "analysis: agent dims (obs " + std::to_string(agent.dims.obs_dim) +
        ", action " + std::to_string(agent.dims.action_dim) + ", privileged " +
        std::to_string(agent.dims.privileged_dim) +
        ") do not match the environment");
  }
}

// distances between the non-boundary rows, plus their labels as ints
void Interior(const LatentTrace& trace, MatD& distances, std::vector<int>& labels) {
  std::vector<int> rows;
  for (int i = 0; i < trace.rows(); ++i) {
    if (!trace.boundary[i]) rows.push_back(i);
  }
  const int n = static_cast<int>(rows.size());
  distances.resize(n, n);
  labels.resize(n);
  for (int a = 0; a < n; ++a) {
    labels[a] = static_cast<int>(trace.terrain[rows[a]]);
    distances(a, a) = 0.0;
    for (int b = a + 1; b < n; ++b) {
      const double d =
          (trace.latents.row(rows[a]) - trace.latents.row(rows[b])).norm();
      distances(a, b) = d;
      distances(b, a) = d;
    }
  }
}

}  // namespace

std::vector<std::uint8_t> BoundaryFlags(std::span<const TerrainMode> labels,
                                        int k) {
  const int n = static_cast<int>(labels.size());
  std::vector<std::uint8_t> flags(n, 0);
  for (int c = 1; c < n; ++c) {
    if (labels[c] == labels[c - 1]) continue;
    for (int i = std::max(0, c - k); i < std::min(n, c + k); ++i) flags[i] = 1;
  }
  return flags;
}

LatentTrace RecordLatents(const Agent<float>& agent, const EnvConfig& env,
                          const CourseConfig& course) {
  CheckAgentDims(agent);
  if (!agent.wiring.has_encoder) {
    throw std::invalid_argument("analysis: variant '" +
                                std::string(VariantName(agent.wiring.kind)) +
                                "' has no encoder to record");
  }
  if (course.sequence.empty() || course.steps_per_terrain < 1) {
    throw std::invalid_argument("analysis: empty terrain course");
  }
  const int total =
      static_cast<int>(course.sequence.size()) * course.steps_per_terrain;
  EnvConfig cfg = env;
  cfg.episode_length = total + 1;
  RoverEnv rover(cfg, course.seed);
  rover.OverrideCommand(std::array<double, 2>{course.command_vx, 0.0});
  rover.OverrideTerrain(
      Terrain(course.sequence[0], course.terrain_scale, cfg.step_shape));
  Observation obs = rover.Reset();
  HistoryBuffer history(1, agent.dims.history_len, agent.dims.obs_dim);
  history.Push(0, obs);

  LatentTrace trace;
  trace.latents.resize(total, agent.wiring.latent_dim);
  int episode = 0;
  for (int t = 0; t < total; ++t) {
    const TerrainMode mode = course.sequence[t / course.steps_per_terrain];
    if (t > 0 && t % course.steps_per_terrain == 0) {
      rover.ExtendTerrain(mode, course.terrain_scale);
    }
    const Privileged priv = rover.PrivilegedInfo();
    const PolicyOutput<float> out =
        Evaluate(agent, RowOf(obs), history.flat(), RowOf(priv));
    for (int j = 0; j < agent.wiring.latent_dim; ++j) {
      trace.latents(t, j) = out.encoded(0, j);
    }
    trace.episode.push_back(episode);
    trace.step.push_back(t);
    trace.terrain.push_back(mode);

    const StepResult r = rover.Step({out.mean(0, 0), out.mean(0, 1)});
    obs = r.observation;
    if (r.done) {
      // restart on the terrain the course is currently on
      ++episode;
      rover.OverrideTerrain(Terrain(mode, course.terrain_scale, cfg.step_shape));
      obs = rover.Reset();
      history.Clear(0);
    }
    history.Push(0, obs);
  }
  trace.boundary = BoundaryFlags(trace.terrain, course.boundary_window);
  return trace;
}

double Silhouette(const MatD& d, std::span<const int> labels) {
  const int n = static_cast<int>(labels.size());
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) {
    throw std::invalid_argument("silhouette: need at least 2 labels");
  }
  std::map<int, int> index;
  for (const auto& [label, count] : sizes) {
    const int next = static_cast<int>(index.size());
    index[label] = next;
  }
  std::vector<int> cls(n);
  std::vector<int> count(index.size());
  for (int i = 0; i < n; ++i) {
    cls[i] = index[labels[i]];
    ++count[cls[i]];
  }
  std::vector<double> sums(index.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (int j = 0; j < n; ++j) sums[cls[j]] += d(i, j);
    if (count[cls[i]] < 2) continue;
    const double a = sums[cls[i]] / (count[cls[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (static_cast<int>(c) != cls[i]) b = std::min(b, sums[c] / count[c]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / n;
}

double SeparabilityScore(const LatentTrace& trace) {
  MatD d;
  std::vector<int> labels;
  Interior(trace, d, labels);
  return Silhouette(d, labels);
}

std::vector<double> ShuffledSeparability(const LatentTrace& trace,
                                         int shuffles, std::mt19937_64& rng) {
  MatD d;
  std::vector<int> labels;
  Interior(trace, d, labels);
  std::vector<double> out;
  for (int s = 0; s < shuffles; ++s) {
    std::shuffle(labels.begin(), labels.end(), rng);
    out.push_back(Silhouette(d, labels));
  }
  return out;
}

std::vector<TailStat> TailStatistics(const LatentTrace& trace) {
  const int n = trace.rows();
  std::vector<TailStat> out;
  for (int c = 1; c < n; ++c) {
    if (trace.terrain[c] == trace.terrain[c - 1]) continue;
    TailStat s;
    s.from = trace.terrain[c - 1];
    s.to = trace.terrain[c];
    // interior centroid of the next terrain
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(trace.latents.cols());
    int members = 0;
    for (int i = 0; i < n; ++i) {
      if (trace.terrain[i] == s.to && !trace.boundary[i]) {
        centroid += trace.latents.row(i);
        ++members;
      }
    }
    if (members == 0) continue;
    centroid /= members;
    for (int i = 0; i < n; ++i) {
      if (trace.terrain[i] == s.to && !trace.boundary[i]) {
        s.cluster_spread += (trace.latents.row(i) - centroid).norm();
      }
    }
    s.cluster_spread /= members;
    // the contiguous flagged run around this change
    int lo = c, hi = c;
    while (lo > 0 && trace.boundary[lo - 1]) --lo;
    while (hi < n && trace.boundary[hi]) ++hi;
    for (int i = lo; i < hi; ++i) {
      s.tail_distance += (trace.latents.row(i) - centroid).norm();
      ++s.rows;
    }
    if (s.rows > 0) s.tail_distance /= s.rows;
    out.push_back(s);
  }
  return out;
}

TrackingError ComputeTrackingError(const TrackingRecord& r) {
  const std::size_t n = r.v.size();
  if (n == 0) throw std::invalid_argument("tracking error: empty record");
  if (r.v_cmd.size() != n || r.w.size() != n || r.w_cmd.size() != n) {
    throw std::invalid_argument("tracking error: column lengths differ");
  }
  TrackingError e;
  for (std::size_t i = 0; i < n; ++i) {
    e.lvte += (r.v_cmd[i] - r.v[i]) * (r.v_cmd[i] - r.v[i]);
    e.avte += (r.w_cmd[i] - r.w[i]) * (r.w_cmd[i] - r.w[i]);
  }
  e.lvte /= static_cast<double>(n);
  e.avte /= static_cast<double>(n);
  return e;
}

EvalReport EvaluateTracking(const Agent<float>& agent, const EnvConfig& env,
                            const EvalConfig& eval) {
  CheckAgentDims(agent);
  if (eval.grid_points < 1 || eval.episodes < 1 || eval.steps < 1 ||
      eval.command_lo > eval.command_hi) {
    throw std::invalid_argument("eval: bad command grid or episode counts");
  }
  EvalReport report;
  TrackingRecord all;
  double reward_total = 0.0;
  for (int g = 0; g < eval.grid_points; ++g) {
    const double cmd =
        eval.grid_points == 1
            ? 0.5 * (eval.command_lo + eval.command_hi)
            : eval.command_lo + (eval.command_hi - eval.command_lo) * g /
                                    (eval.grid_points - 1);
    TrackingRecord rec;
    double reward = 0.0;
    for (int e = 0; e < eval.episodes; ++e) {
      // same env seeds for every command
      RoverEnv rover(env, eval.seed * 7919 + static_cast<std::uint64_t>(e));
      rover.OverrideCommand(std::array<double, 2>{cmd, 0.0});
      Observation obs = rover.Reset();
      HistoryBuffer history(1, agent.dims.history_len, agent.dims.obs_dim);
      history.Push(0, obs);
      for (int t = 0; t < eval.steps; ++t) {
        const PolicyOutput<float> out = Evaluate(
            agent, RowOf(obs), history.flat(), RowOf(rover.PrivilegedInfo()));
        const StepResult r = rover.Step({out.mean(0, 0), out.mean(0, 1)});
        const EnvState& s = rover.state();
        rec.v.push_back(s.vx);
        rec.v_cmd.push_back(s.command[0]);
        rec.w.push_back(s.pitch_rate);
        rec.w_cmd.push_back(s.command[1]);
        reward += r.reward.total;
        obs = r.observation;
        if (r.done) {
          obs = rover.Reset();
          history.Clear(0);
        }
        history.Push(0, obs);
      }
    }
    EvalRow row;
    row.command = cmd;
    row.error = ComputeTrackingError(rec);
    row.mean_reward = reward / static_cast<double>(rec.v.size());
    report.rows.push_back(row);
    reward_total += reward;
    for (std::size_t i = 0; i < rec.v.size(); ++i) {
      all.v.push_back(rec.v[i]);
      all.v_cmd.push_back(rec.v_cmd[i]);
      all.w.push_back(rec.w[i]);
      all.w_cmd.push_back(rec.w_cmd[i]);
    }
  }
  report.aggregate = ComputeTrackingError(all);
  report.mean_reward = reward_total / static_cast<double>(all.v.size());
  return report;
}

nlohmann::json EvalReportJson(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const EvalRow& r : report.rows) {
    rows.push_back({{"command", r.command},
                    {"lvte", r.error.lvte},
                    {"avte", r.error.avte},
                    {"mean_reward", r.mean_reward}});
  }
  return {{"per_command", rows},
          {"lvte", report.aggregate.lvte},
          {"avte", report.aggregate.avte},
          {"mean_reward", report.mean_reward}};
}

void ExportTrace(const LatentTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "episode,step,terrain,boundary";
  for (Eigen::Index j = 0; j < trace.latents.cols(); ++j) out << ",z" << j;
  out << "\n";
  char buf[32];
  for (int i = 0; i < trace.rows(); ++i) {
    out << trace.episode[i] << ',' << trace.step[i] << ','
        << TerrainName(trace.terrain[i]) << ',' << int(trace.boundary[i]);
    for (Eigen::Index j = 0; j < trace.latents.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g", trace.latents(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

LatentTrace ReadTrace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file");
  const int dim =
      static_cast<int>(std::count(line.begin(), line.end(), ',')) - 3;
  if (dim < 0) throw std::runtime_error("bad trace header: " + line);
  LatentTrace trace;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != dim + 4) {
      throw std::runtime_error("bad trace row: " + line);
    }
    trace.episode.push_back(std::stoi(cells[0]));
    trace.step.push_back(std::stoi(cells[1]));
    trace.terrain.push_back(ParseTerrain(cells[2]));
    trace.boundary.push_back(static_cast<std::uint8_t>(std::stoi(cells[3])));
    std::vector<double> z(dim);
    for (int j = 0; j < dim; ++j) z[j] = std::stod(cells[4 + j]);
    rows.push_back(std::move(z));
  }
  trace.latents.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < dim; ++j) trace.latents(i, j) = rows[i][j];
  }
  return trace;
}

nlohmann::json SummaryJson(const AnalysisSummary& s) {
  nlohmann::json tails = nlohmann::json::array();
  for (const TailStat& t : s.tails) {
    tails.push_back({{"from", std::string(TerrainName(t.from))},
                     {"to", std::string(TerrainName(t.to))},
                     {"tail_distance", t.tail_distance},
                     {"cluster_spread", t.cluster_spread},
                     {"rows", t.rows}});
  }
  return {{"lvte", s.tracking.lvte},
          {"avte", s.tracking.avte},
          {"silhouette", s.silhouette},
          {"null_mean", s.null_mean},
          {"tail_stats", tails}};
}

}  // namespace slr
