#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <heprune/heprune.h>

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out.flush()) throw std::runtime_error("short write to " + path);
}

// Copies a library-owned string out and releases it.
std::string take(char* str) {
  std::string out = str ? str : "";
  hp_string_free(str);
  return out;
}

void check(hp_status status) {
  if (status != HP_OK) throw std::runtime_error(hp_last_error());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotation-exact packed-convolution emulator and pruning workbench"};
  app.set_version_flag("--version", []() { return std::string(hp_version()); });
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train a model on the synthetic task");
  std::string train_config, train_checkpoint, train_history;
  train->add_option("--config", train_config, "JSON with task/model/train/reg sections")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--checkpoint", train_checkpoint, "Checkpoint file to write")->required();
  train->add_option("--history", train_history, "Write the per-epoch CSV here instead of stdout");

  auto* prune = app.add_subcommand("prune", "Iteratively prune and finetune a checkpoint");
  std::string prune_checkpoint, prune_config, prune_out, prune_trajectory;
  prune->add_option("--checkpoint", prune_checkpoint, "Trained checkpoint to start from")
      ->required()
      ->check(CLI::ExistingFile);
  prune->add_option("--config", prune_config, "JSON with task/schedule sections")
      ->required()
      ->check(CLI::ExistingFile);
  prune->add_option("--out-checkpoint", prune_out, "Write the pruned checkpoint here");
  prune->add_option("--trajectory", prune_trajectory,
                    "Write the trajectory CSV here instead of stdout");

  auto* cost = app.add_subcommand("cost", "Closed-form rotation counts for a network spec");
  std::string cost_spec, cost_json;
  cost->add_option("--spec", cost_spec, "JSON array of layer specs")
      ->required()
      ->check(CLI::ExistingFile);
  cost->add_option("--json", cost_json, "Also write the JSON report to this file");

  auto* sweep = app.add_subcommand("sweep", "Train/prune every grid point of a sweep spec");
  std::string sweep_spec, sweep_out;
  sweep->add_option("--spec", sweep_spec, "Sweep spec JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "Results directory (created if missing)")->required();

  auto* pareto = app.add_subcommand("pareto", "Extract the Pareto frontier of a sweep directory");
  std::string pareto_results, pareto_csv, pareto_json;
  pareto->add_option("--results", pareto_results, "Directory written by sweep")->required();
  pareto->add_option("--csv", pareto_csv, "Write the frontier CSV here");
  pareto->add_option("--json", pareto_json, "Write the frontier JSON here");

  auto* compare = app.add_subcommand("compare", "Reduction ratio of two frontiers at a floor");
  std::string compare_a, compare_b;
  double compare_drop = 0.0;
  compare->add_option("--a", compare_a, "Frontier JSON (numerator)")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--b", compare_b, "Frontier JSON (denominator)")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--drop", compare_drop,
                      "Accuracy drop below the best of both frontiers (0.03 = 3 points)");

  auto* verify = app.add_subcommand("verify", "Run the built-in oracle and count-law checks");
  std::uint64_t verify_seed = 1;
  verify->add_option("--seed", verify_seed, "Seed for the randomized instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      char* csv = nullptr;
      check(hp_train_run(read_text(train_config).c_str(), train_checkpoint.c_str(), &csv));
      const std::string text = take(csv);
      if (train_history.empty())
        std::fputs(text.c_str(), stdout);
      else
        write_text(train_history, text);
      std::fprintf(stderr, "wrote %s\n", train_checkpoint.c_str());
    } else if (*prune) {
      char* csv = nullptr;
      check(hp_prune_run(prune_checkpoint.c_str(), read_text(prune_config).c_str(),
                         prune_out.empty() ? nullptr : prune_out.c_str(), &csv));
      const std::string text = take(csv);
      if (prune_trajectory.empty())
        std::fputs(text.c_str(), stdout);
      else
        write_text(prune_trajectory, text);
      if (!prune_out.empty()) std::fprintf(stderr, "wrote %s\n", prune_out.c_str());
    } else if (*cost) {
      const std::string doc = read_text(cost_spec);
      char* table = nullptr;
      check(hp_cost_report_table(doc.c_str(), &table));
      std::fputs(take(table).c_str(), stdout);
      char* json = nullptr;
      check(hp_cost_report_json(doc.c_str(), &json));
      const std::string report = take(json);
      std::fprintf(stdout, "%s\n", report.c_str());
      if (!cost_json.empty()) write_text(cost_json, report + "\n");
    } else if (*sweep) {
      char* summary = nullptr;
      check(hp_sweep_run(read_text(sweep_spec).c_str(), sweep_out.c_str(), &summary));
      std::fprintf(stdout, "%s\n", take(summary).c_str());
      std::fprintf(stderr, "results in %s\n", sweep_out.c_str());
    } else if (*pareto) {
      char* csv = nullptr;
      char* json = nullptr;
      check(hp_pareto_extract(pareto_results.c_str(), &csv, &json));
      const std::string csv_text = take(csv);
      const std::string json_text = take(json);
      if (!pareto_csv.empty()) write_text(pareto_csv, csv_text);
      if (!pareto_json.empty()) write_text(pareto_json, json_text + "\n");
      if (pareto_csv.empty() && pareto_json.empty()) std::fputs(csv_text.c_str(), stdout);
    } else if (*compare) {
      double ratio = 0.0;
      check(hp_compare_frontiers(read_text(compare_a).c_str(), read_text(compare_b).c_str(),
                                 compare_drop, &ratio));
      std::fprintf(stdout, "%.17g\n", ratio);
    } else if (*verify) {
      int32_t ok = 0;
      char* report = nullptr;
      check(hp_verify_run(verify_seed, &ok, &report));
      std::fputs(take(report).c_str(), stdout);
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
