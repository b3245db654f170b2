#ifndef HEPRUNE_HARNESS_HPP
#define HEPRUNE_HARNESS_HPP

#include <cstdint>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "pruning.hpp"
#include "training.hpp"

namespace heprune {

// What a sweep varies and what gets pruned:
//   full             - grids as given, positional and diagonal pruning
//   diagonal_only    - lambda_p forced 0, positional thresholds frozen
//   positional_only  - lambda_d forced 0, diagonal thresholds frozen
//   baseline_no_lasso- lambda_p = lambda_d = 0 in training, pruning unchanged
//   channel_baseline - conventional per-channel pruning arm
enum class SweepMode { full, diagonal_only, positional_only, baseline_no_lasso, channel_baseline };

SweepMode parse_sweep_mode(const std::string& name);
std::string sweep_mode_name(SweepMode mode);

struct SweepSpec {
  SweepMode mode = SweepMode::full;
  std::vector<double> lambda_grid = {0.0};
  std::vector<double> lambda_p_grid = {0.0};
  std::vector<double> lambda_d_grid = {0.0};
  std::vector<std::uint64_t> seeds = {1};
  SyntheticSpec task;
  ModelConfig model;
  TrainConfig train;
  PruneSchedule schedule;
};

void validate_sweep_spec(const SweepSpec& spec);

// Every field optional; omitted sections keep their defaults.
SweepSpec sweep_spec_from_json(const nlohmann::json& doc);
nlohmann::json sweep_spec_to_json(const SweepSpec& spec);

struct RunProvenance {
  double lambda = 0.0;
  double lambda_p = 0.0;
  double lambda_d = 0.0;
  std::uint64_t seed = 0;

  // Stable file stem, e.g. "run_l0.001_p0_d0.0005_s3".
  std::string stem() const;
};

struct RunResult {
  RunProvenance provenance;
  bool ok = false;
  std::string error;
  TrainHistory history;
  PruneTrajectory trajectory;
  ChannelPruneTrajectory channel;  // used by channel_baseline mode only
};

struct SweepResult {
  SweepSpec spec;
  std::vector<RunResult> runs;
};

// Runs train -> prune-with-finetune for every grid point x seed. A failing
// run records its error and the sweep continues. When out_dir is non-empty,
// each run's trajectory CSV and a summary JSON are written there.
SweepResult run_sweep(const SweepSpec& spec, const std::string& out_dir = "");

struct ParetoPoint {
  double accuracy = 0.0;
  double reduction_pct = 0.0;
  double lambda = 0.0;
  double lambda_p = 0.0;
  double lambda_d = 0.0;
  std::uint64_t seed = 0;
  int iteration = 0;
};

// Every trajectory record of every successful run as an (accuracy, reduction)
// point with provenance.
std::vector<ParetoPoint> collect_points(const SweepResult& result);

// Same points recovered from a directory run_sweep persisted to.
std::vector<ParetoPoint> load_sweep_points(const std::string& dir);

std::string frontier_csv(std::span<const ParetoPoint> frontier);
nlohmann::json frontier_to_json(std::span<const ParetoPoint> frontier);
// Accepts the frontier_to_json shape or a bare array of points.
std::vector<ParetoPoint> frontier_from_json(const nlohmann::json& doc);

// Maximal non-dominated subset, sorted by reduction ascending. Points that
// tie on both axes are all kept.
std::vector<ParetoPoint> pareto_frontier(std::vector<ParetoPoint> points);

// Largest reduction the frontier reaches while keeping accuracy >= floor,
// linearly interpolating between neighboring frontier points. Zero when even
// the frontier's best accuracy misses the floor.
double max_reduction_at_floor(std::span<const ParetoPoint> frontier, double floor);

// Ratio of the two frontiers' max reductions at the accuracy floor
// (best accuracy over both frontiers minus drop). Infinity when only A
// reaches the floor with positive reduction, 1 when both reductions are 0.
double compare_at_accuracy(std::span<const ParetoPoint> frontier_a,
                           std::span<const ParetoPoint> frontier_b, double accuracy_drop);

}  // namespace heprune

#endif
