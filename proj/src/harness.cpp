#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "serialize.hpp"

namespace heprune {

SweepMode parse_sweep_mode(const std::string& name) {
  if (name == "full" || name == "artemis") return SweepMode::full;
  if (name == "diagonal-only") return SweepMode::diagonal_only;
  if (name == "positional-only") return SweepMode::positional_only;
  if (name == "baseline-no-lasso") return SweepMode::baseline_no_lasso;
  if (name == "channel-baseline") return SweepMode::channel_baseline;
  throw std::invalid_argument("unknown sweep mode: " + name);
}

std::string sweep_mode_name(SweepMode mode) {
  switch (mode) {
    case SweepMode::full: return "full";
    case SweepMode::diagonal_only: return "diagonal-only";
    case SweepMode::positional_only: return "positional-only";
    case SweepMode::baseline_no_lasso: return "baseline-no-lasso";
    case SweepMode::channel_baseline: return "channel-baseline";
  }
  throw std::invalid_argument("unknown sweep mode value");
}

void validate_sweep_spec(const SweepSpec& spec) {
  if (spec.lambda_grid.empty() || spec.lambda_p_grid.empty() || spec.lambda_d_grid.empty())
    throw std::invalid_argument("sweep grids must be non-empty");
  if (spec.seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  for (double v : spec.lambda_grid)
    if (v < 0.0) throw std::invalid_argument("lambda grid values must be non-negative");
  for (double v : spec.lambda_p_grid)
    if (v < 0.0) throw std::invalid_argument("lambda_p grid values must be non-negative");
  for (double v : spec.lambda_d_grid)
    if (v < 0.0) throw std::invalid_argument("lambda_d grid values must be non-negative");
  validate_model_config(spec.model);
  validate_train_config(spec.train);
  validate_schedule(spec.schedule);
}

namespace {

std::string grid_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Grids the mode ignores collapse to {0} so runs are not duplicated.
void apply_mode(SweepMode mode, SweepSpec& spec) {
  switch (mode) {
    case SweepMode::full:
      break;
    case SweepMode::diagonal_only:
      spec.lambda_p_grid = {0.0};
      spec.schedule.threshold_step_p = 0.0;
      break;
    case SweepMode::positional_only:
      spec.lambda_d_grid = {0.0};
      spec.schedule.threshold_step_d = 0.0;
      break;
    case SweepMode::baseline_no_lasso:
      spec.lambda_p_grid = {0.0};
      spec.lambda_d_grid = {0.0};
      break;
    case SweepMode::channel_baseline:
      spec.lambda_p_grid = {0.0};
      spec.lambda_d_grid = {0.0};
      break;
  }
}

}  // namespace

std::string RunProvenance::stem() const {
  return "run_l" + grid_value(lambda) + "_p" + grid_value(lambda_p) + "_d" + grid_value(lambda_d) +
         "_s" + std::to_string(seed);
}

SweepResult run_sweep(const SweepSpec& raw_spec, const std::string& out_dir) {
  validate_sweep_spec(raw_spec);
  SweepSpec spec = raw_spec;
  apply_mode(spec.mode, spec);

  SweepResult result;
  result.spec = spec;

  for (std::uint64_t seed : spec.seeds)
    for (double lambda : spec.lambda_grid)
      for (double lambda_p : spec.lambda_p_grid)
        for (double lambda_d : spec.lambda_d_grid) {
          RunResult run;
          run.provenance = {lambda, lambda_p, lambda_d, seed};
          try {
            SyntheticSpec task_spec = spec.task;
            task_spec.seed = seed;
            const SyntheticTask task = make_synthetic_task(task_spec);

            ModelConfig model_config = spec.model;
            model_config.in_channels = task_spec.channels;
            model_config.height = task_spec.height;
            model_config.width = task_spec.width;
            model_config.num_classes = task_spec.num_classes;
            model_config.seed = seed;
            ToyCnn model = init_model(model_config);

            TrainConfig train_config = spec.train;
            train_config.seed = seed;
            const RegFactors reg{lambda, lambda_p, lambda_d};
            run.history = train(model, task, train_config, reg);

            PruneSchedule schedule = spec.schedule;
            schedule.seed = seed;
            if (spec.mode == SweepMode::channel_baseline)
              run.channel = channel_prune_baseline(model, schedule, task);
            else
              run.trajectory = prune_with_finetune(model, schedule, task);
            run.ok = true;
          } catch (const std::exception& e) {
            run.ok = false;
            run.error = e.what();
          }
          result.runs.push_back(std::move(run));
        }

  if (!out_dir.empty()) {
    nlohmann::json summary;
    summary["mode"] = sweep_mode_name(spec.mode);
    summary["task"] = synthetic_spec_to_json(spec.task);
    summary["model"] = model_config_to_json(spec.model);
    summary["train"] = train_config_to_json(spec.train);
    summary["schedule"] = schedule_to_json(spec.schedule);
    summary["lambda_grid"] = spec.lambda_grid;
    summary["lambda_p_grid"] = spec.lambda_p_grid;
    summary["lambda_d_grid"] = spec.lambda_d_grid;
    summary["seeds"] = spec.seeds;
    nlohmann::json runs = nlohmann::json::array();
    for (const RunResult& run : result.runs) {
      nlohmann::json entry;
      entry["lambda"] = run.provenance.lambda;
      entry["lambda_p"] = run.provenance.lambda_p;
      entry["lambda_d"] = run.provenance.lambda_d;
      entry["seed"] = run.provenance.seed;
      entry["ok"] = run.ok;
      if (!run.ok) entry["error"] = run.error;
      const std::string stem = run.provenance.stem();
      entry["trajectory_file"] = stem + ".csv";
      runs.push_back(entry);
      if (run.ok) {
        const std::string csv = spec.mode == SweepMode::channel_baseline
                                    ? channel_trajectory_csv(run.channel)
                                    : trajectory_csv(run.trajectory);
        write_file_atomic(out_dir + "/" + stem + ".csv", csv);
        write_file_atomic(out_dir + "/" + stem + "_history.csv", history_csv(run.history));
      }
    }
    summary["runs"] = runs;
    write_file_atomic(out_dir + "/sweep.json", summary.dump(2));
  }
  return result;
}

std::vector<ParetoPoint> collect_points(const SweepResult& result) {
  std::vector<ParetoPoint> points;
  for (const RunResult& run : result.runs) {
    if (!run.ok) continue;
    const auto push = [&](double accuracy, double reduction, int iteration) {
      ParetoPoint p;
      p.accuracy = accuracy;
      p.reduction_pct = reduction;
      p.lambda = run.provenance.lambda;
      p.lambda_p = run.provenance.lambda_p;
      p.lambda_d = run.provenance.lambda_d;
      p.seed = run.provenance.seed;
      p.iteration = iteration;
      points.push_back(p);
    };
    if (result.spec.mode == SweepMode::channel_baseline)
      for (const ChannelPruneRecord& r : run.channel.records)
        push(r.accuracy, r.param_reduction_pct, r.iteration);
    else
      for (const PruneRecord& r : run.trajectory.records)
        push(r.accuracy, r.rotations_reduction_pct, r.iteration);
  }
  return points;
}

std::vector<ParetoPoint> pareto_frontier(std::vector<ParetoPoint> points) {
  if (points.empty()) throw std::invalid_argument("pareto_frontier needs at least one point");

  // Scan in order of decreasing reduction; a point survives iff its accuracy
  // beats everything with larger-or-equal reduction (ties on both axes kept).
  std::stable_sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.reduction_pct != b.reduction_pct) return a.reduction_pct > b.reduction_pct;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.seed != b.seed) return a.seed < b.seed;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.lambda_p != b.lambda_p) return a.lambda_p < b.lambda_p;
    if (a.lambda_d != b.lambda_d) return a.lambda_d < b.lambda_d;
    return a.iteration < b.iteration;
  });

  std::vector<ParetoPoint> frontier;
  double best_accuracy = -std::numeric_limits<double>::infinity();
  for (const ParetoPoint& p : points) {
    if (p.accuracy > best_accuracy) {
      frontier.push_back(p);
      best_accuracy = p.accuracy;
    } else if (p.accuracy == best_accuracy && !frontier.empty() &&
               p.reduction_pct == frontier.back().reduction_pct) {
      frontier.push_back(p);  // exact tie on both axes
    }
  }
  std::reverse(frontier.begin(), frontier.end());
  return frontier;
}

double max_reduction_at_floor(std::span<const ParetoPoint> frontier, double floor) {
  if (frontier.empty()) throw std::invalid_argument("empty frontier");
  // Ascending reduction means non-increasing accuracy along the frontier.
  double best = 0.0;
  bool reachable = false;
  for (std::size_t k = 0; k < frontier.size(); ++k) {
    if (frontier[k].accuracy >= floor) {
      best = std::max(best, frontier[k].reduction_pct);
      reachable = true;
      // Interpolate into the next, lower-accuracy segment if one exists.
      if (k + 1 < frontier.size() && frontier[k + 1].accuracy < floor) {
        const double a0 = frontier[k].accuracy, a1 = frontier[k + 1].accuracy;
        const double r0 = frontier[k].reduction_pct, r1 = frontier[k + 1].reduction_pct;
        if (a0 > a1) best = std::max(best, r0 + (r1 - r0) * (a0 - floor) / (a0 - a1));
      }
    }
  }
  return reachable ? best : 0.0;
}

double compare_at_accuracy(std::span<const ParetoPoint> frontier_a,
                           std::span<const ParetoPoint> frontier_b, double accuracy_drop) {
  if (frontier_a.empty() || frontier_b.empty())
    throw std::invalid_argument("compare_at_accuracy needs two non-empty frontiers");
  if (accuracy_drop < 0.0) throw std::invalid_argument("accuracy drop must be non-negative");

  double best = -std::numeric_limits<double>::infinity();
  for (const ParetoPoint& p : frontier_a) best = std::max(best, p.accuracy);
  for (const ParetoPoint& p : frontier_b) best = std::max(best, p.accuracy);
  const double floor = best - accuracy_drop;

  const double ra = max_reduction_at_floor(frontier_a, floor);
  const double rb = max_reduction_at_floor(frontier_b, floor);
  if (rb == 0.0) return ra == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return ra / rb;
}

SweepSpec sweep_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("sweep spec must be a JSON object");
  SweepSpec spec;
  if (doc.contains("mode")) spec.mode = parse_sweep_mode(doc.at("mode").get<std::string>());
  if (doc.contains("lambda_grid"))
    spec.lambda_grid = doc.at("lambda_grid").get<std::vector<double>>();
  if (doc.contains("lambda_p_grid"))
    spec.lambda_p_grid = doc.at("lambda_p_grid").get<std::vector<double>>();
  if (doc.contains("lambda_d_grid"))
    spec.lambda_d_grid = doc.at("lambda_d_grid").get<std::vector<double>>();
  if (doc.contains("seeds")) spec.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  if (doc.contains("task")) spec.task = synthetic_spec_from_json(doc.at("task"));
  if (doc.contains("model")) spec.model = model_config_from_json(doc.at("model"));
  if (doc.contains("train")) spec.train = train_config_from_json(doc.at("train"));
  if (doc.contains("schedule")) spec.schedule = schedule_from_json(doc.at("schedule"));
  validate_sweep_spec(spec);
  return spec;
}

nlohmann::json sweep_spec_to_json(const SweepSpec& spec) {
  nlohmann::json doc;
  doc["mode"] = sweep_mode_name(spec.mode);
  doc["lambda_grid"] = spec.lambda_grid;
  doc["lambda_p_grid"] = spec.lambda_p_grid;
  doc["lambda_d_grid"] = spec.lambda_d_grid;
  doc["seeds"] = spec.seeds;
  doc["task"] = synthetic_spec_to_json(spec.task);
  doc["model"] = model_config_to_json(spec.model);
  doc["train"] = train_config_to_json(spec.train);
  doc["schedule"] = schedule_to_json(spec.schedule);
  return doc;
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) {
      std::vector<std::string> cells;
      std::size_t start = pos;
      while (start <= eol) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos || comma > eol) comma = eol;
        cells.push_back(text.substr(start, comma - start));
        start = comma + 1;
      }
      rows.push_back(std::move(cells));
    }
    pos = eol + 1;
  }
  return rows;
}

}  // namespace

std::vector<ParetoPoint> load_sweep_points(const std::string& dir) {
  const nlohmann::json summary = nlohmann::json::parse(read_file(dir + "/sweep.json"));
  const bool channel = parse_sweep_mode(summary.at("mode").get<std::string>()) ==
                       SweepMode::channel_baseline;
  // Column of the reduction axis; accuracy is always last.
  const std::size_t reduction_col = channel ? 3 : 6;
  const std::size_t num_cols = channel ? 5 : 8;

  std::vector<ParetoPoint> points;
  for (const nlohmann::json& run : summary.at("runs")) {
    if (!run.at("ok").get<bool>()) continue;
    const std::string file = dir + "/" + run.at("trajectory_file").get<std::string>();
    const auto rows = parse_csv(read_file(file));
    if (rows.empty() || rows[0].size() != num_cols || rows[0][0] != "iteration")
      throw std::invalid_argument("unrecognized trajectory header in " + file);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != num_cols)
        throw std::invalid_argument("malformed trajectory row in " + file);
      ParetoPoint p;
      p.iteration = std::stoi(rows[r][0]);
      p.accuracy = std::stod(rows[r].back());
      p.reduction_pct = std::stod(rows[r][reduction_col]);
      p.lambda = run.at("lambda").get<double>();
      p.lambda_p = run.at("lambda_p").get<double>();
      p.lambda_d = run.at("lambda_d").get<double>();
      p.seed = run.at("seed").get<std::uint64_t>();
      points.push_back(p);
    }
  }
  return points;
}

std::string frontier_csv(std::span<const ParetoPoint> frontier) {
  std::string out = "accuracy,reduction_pct,lambda,lambda_p,lambda_d,seed,iteration\n";
  for (const ParetoPoint& p : frontier) {
    out += format_double(p.accuracy) + ',' + format_double(p.reduction_pct) + ',' +
           format_double(p.lambda) + ',' + format_double(p.lambda_p) + ',' +
           format_double(p.lambda_d) + ',' + std::to_string(p.seed) + ',' +
           std::to_string(p.iteration) + '\n';
  }
  return out;
}

nlohmann::json frontier_to_json(std::span<const ParetoPoint> frontier) {
  nlohmann::json points = nlohmann::json::array();
  for (const ParetoPoint& p : frontier) {
    points.push_back({{"accuracy", p.accuracy},
                      {"reduction_pct", p.reduction_pct},
                      {"lambda", p.lambda},
                      {"lambda_p", p.lambda_p},
                      {"lambda_d", p.lambda_d},
                      {"seed", p.seed},
                      {"iteration", p.iteration}});
  }
  return nlohmann::json{{"frontier", points}};
}

std::vector<ParetoPoint> frontier_from_json(const nlohmann::json& doc) {
  const nlohmann::json& arr = doc.is_array() ? doc : doc.at("frontier");
  if (!arr.is_array()) throw std::invalid_argument("frontier must be a JSON array");
  std::vector<ParetoPoint> points;
  for (const nlohmann::json& entry : arr) {
    ParetoPoint p;
    p.accuracy = entry.at("accuracy").get<double>();
    p.reduction_pct = entry.at("reduction_pct").get<double>();
    p.lambda = entry.value("lambda", 0.0);
    p.lambda_p = entry.value("lambda_p", 0.0);
    p.lambda_d = entry.value("lambda_d", 0.0);
    p.seed = entry.value("seed", std::uint64_t{0});
    p.iteration = entry.value("iteration", 0);
    points.push_back(p);
  }
  return points;
}

}  // namespace heprune
