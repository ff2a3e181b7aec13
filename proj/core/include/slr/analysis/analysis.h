#ifndef SLR_ANALYSIS_ANALYSIS_H_
#define SLR_ANALYSIS_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slr/env/rover_env.h"
#include "slr/model/agent.h"
#include "slr/tensor/matrix.h"

namespace slr {

// One latent row per environment step.
struct LatentTrace {
  std::vector<int> episode;
  std::vector<int> step;
  std::vector<TerrainMode> terrain;
  std::vector<std::uint8_t> boundary;
  MatD latents;  // rows x latent_dim

  int rows() const { return static_cast<int>(step.size()); }
};

struct CourseConfig {
  std::vector<TerrainMode> sequence{TerrainMode::kSlopeUp, TerrainMode::kStepsDown,
                                    TerrainMode::kFlat, TerrainMode::kStepsUp};
  int steps_per_terrain = 200;
  double terrain_scale = 0.1;
  double command_vx = 0.5;
  // rows within this many steps of a terrain change are flagged
  int boundary_window = 10;
  std::uint64_t seed = 0;

  bool operator==(const CourseConfig&) const = default;
};

// Marks the 2k steps around each change of label: k before and k after.
std::vector<std::uint8_t> BoundaryFlags(std::span<const TerrainMode> labels,
                                        int k);

// Deterministic rollout with the policy mean over the course, switching
// terrain every steps_per_terrain steps. Labels are the scheduled terrain.
// Throws std::invalid_argument when the agent has no encoder or its dims
// disagree with the environment.
LatentTrace RecordLatents(const Agent<float>& agent, const EnvConfig& env,
                          const CourseConfig& course);

// Mean silhouette over the non-boundary rows, Euclidean distance. A point
// whose cluster has no other member scores 0, as does a point with a = b = 0.
// Throws std::invalid_argument with fewer than 2 labels.
double SeparabilityScore(const LatentTrace& trace);

// scores with the labels of the non-boundary rows shuffled `shuffles` times
std::vector<double> ShuffledSeparability(const LatentTrace& trace,
                                         int shuffles, std::mt19937_64& rng);

// silhouette for a precomputed distance matrix; the building block of both
double Silhouette(const MatD& distances, std::span<const int> labels);

struct TailStat {
  TerrainMode from;
  TerrainMode to;
  // mean distance from the flagged rows of this transition to the interior
  // centroid of `to`
  double tail_distance = 0.0;
  // mean distance of the interior rows of `to` to that centroid
  double cluster_spread = 0.0;
  int rows = 0;
};

std::vector<TailStat> TailStatistics(const LatentTrace& trace);

struct TrackingRecord {
  std::vector<double> v;
  std::vector<double> v_cmd;
  std::vector<double> w;
  std::vector<double> w_cmd;
};

struct TrackingError {
  double lvte = 0.0;
  double avte = 0.0;
};

// mean squared command errors; throws std::invalid_argument when empty or
// the columns differ in length
TrackingError ComputeTrackingError(const TrackingRecord& record);

struct EvalConfig {
  double command_lo = -1.0;
  double command_hi = 1.0;
  int grid_points = 9;
  int episodes = 4;
  int steps = 200;
  std::uint64_t seed = 0;

  bool operator==(const EvalConfig&) const = default;
};

struct EvalRow {
  double command = 0.0;
  TrackingError error;
  double mean_reward = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  TrackingError aggregate;
  double mean_reward = 0.0;
};

// Deterministic episodes (policy mean) for every command on the grid.
EvalReport EvaluateTracking(const Agent<float>& agent, const EnvConfig& env,
                            const EvalConfig& eval);
nlohmann::json EvalReportJson(const EvalReport& report);

// CSV `episode,step,terrain,boundary,z0..z{d-1}`, 9 significant digits.
void ExportTrace(const LatentTrace& trace, const std::filesystem::path& path);
// inverse of ExportTrace
LatentTrace ReadTrace(const std::filesystem::path& path);

struct AnalysisSummary {
  TrackingError tracking;
  double silhouette = 0.0;
  double null_mean = 0.0;
  std::vector<TailStat> tails;
};

nlohmann::json SummaryJson(const AnalysisSummary& summary);

}  // namespace slr

#endif  // SLR_ANALYSIS_ANALYSIS_H_
