#include "heprune/heprune.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "costmodel.hpp"
#include "dataset.hpp"
#include "harness.hpp"
#include "heconv.hpp"
#include "ledger.hpp"
#include "mask.hpp"
#include "model.hpp"
#include "packing.hpp"
#include "pruning.hpp"
#include "serialize.hpp"
#include "training.hpp"
#include "verify.hpp"

struct hp_ledger {
  heprune::RotationLedger impl;
};

namespace {

thread_local std::string t_last_error;

hp_status fail(hp_status code, std::string message) {
  t_last_error = std::move(message);
  return code;
}

// Allocated with malloc so hp_string_free pairs with it regardless of how the
// caller's runtime was built.
char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
hp_status guarded(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    return fail(HP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(HP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::system_error& e) {
    return fail(HP_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(HP_ERR_RUNTIME, e.what());
  }
  t_last_error.clear();
  return HP_OK;
}

hp_status null_arg(const char* name) {
  return fail(HP_ERR_INVALID_ARGUMENT, std::string(name) + " must not be null");
}

void copy_mask_bits(const uint8_t* bits, std::vector<std::uint8_t>& dst, const char* what) {
  for (std::size_t k = 0; k < dst.size(); ++k) {
    if (bits[k] > 1)
      throw std::invalid_argument(std::string(what) + " entries must be 0 or 1");
    dst[k] = bits[k];
  }
}

}  // namespace

extern "C" {

const char* hp_version(void) { return "0.1.0"; }

const char* hp_last_error(void) { return t_last_error.c_str(); }

void hp_string_free(char* str) { std::free(str); }

hp_status hp_ledger_create(hp_ledger** out_ledger) {
  if (!out_ledger) return null_arg("out_ledger");
  return guarded([&] { *out_ledger = new hp_ledger(); });
}

void hp_ledger_free(hp_ledger* ledger) { delete ledger; }

hp_status hp_ledger_reset(hp_ledger* ledger) {
  if (!ledger) return null_arg("ledger");
  return guarded([&] { ledger->impl.reset(); });
}

hp_status hp_ledger_counts(const hp_ledger* ledger, uint64_t* out_tau, uint64_t* out_pi,
                           uint64_t* out_total) {
  if (!ledger) return null_arg("ledger");
  return guarded([&] {
    const heprune::RotationCounts counts = ledger->impl.counts();
    if (out_tau) *out_tau = counts.tau;
    if (out_pi) *out_pi = counts.pi;
    if (out_total) *out_total = counts.total;
  });
}

hp_status hp_ledger_json(const hp_ledger* ledger, char** out_json) {
  if (!ledger) return null_arg("ledger");
  if (!out_json) return null_arg("out_json");
  return guarded([&] { *out_json = copy_string(heprune::ledger_to_json(ledger->impl)); });
}

hp_status hp_packed_conv(const double* x, int32_t c_in, int32_t height, int32_t width,
                         const double* weights, const double* bias, int32_t c_out, int32_t f,
                         int32_t c_n, const uint8_t* positional_mask,
                         const uint8_t* diagonal_mask, hp_ledger* ledger, const char* layer_id,
                         double* out) {
  if (!x) return null_arg("x");
  if (!weights) return null_arg("weights");
  if (!ledger) return null_arg("ledger");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (c_in <= 0 || height <= 0 || width <= 0 || c_out <= 0 || f <= 0 || c_n <= 0)
      throw std::invalid_argument("dimensions must be positive");

    heprune::Tensor xt({c_in, height, width});
    std::copy(x, x + xt.size(), xt.data.begin());

    heprune::ConvLayerParams p;
    p.weights = heprune::Tensor({c_out, c_in, f, f});
    std::copy(weights, weights + p.weights.size(), p.weights.data.begin());
    p.bias = heprune::Tensor({c_out});
    if (bias) std::copy(bias, bias + c_out, p.bias.data.begin());

    heprune::LayerMask mask = heprune::LayerMask::all_active(c_in, c_out, f, c_n);
    if (positional_mask) copy_mask_bits(positional_mask, mask.positional, "positional_mask");
    if (diagonal_mask) copy_mask_bits(diagonal_mask, mask.diagonal, "diagonal_mask");
    heprune::apply_mask(p.weights, mask);

    const heprune::Tensor y = heprune::unpack(heprune::mimo_conv(
        heprune::pack(xt, c_n), p, mask, ledger->impl, layer_id ? layer_id : "conv"));
    std::copy(y.data.begin(), y.data.end(), out);
  });
}

hp_status hp_rotations_unpruned(int32_t c_in, int32_t c_out, int32_t f, int32_t c_n,
                                uint64_t* out_rotations) {
  if (!out_rotations) return null_arg("out_rotations");
  return guarded([&] {
    *out_rotations = heprune::rotations_unpruned({"layer", c_in, c_out, f, c_n, 1.0, 1.0});
  });
}

hp_status hp_rotations_pruned(int32_t c_in, int32_t c_out, int32_t f, int32_t c_n, double alpha,
                              double beta, double* out_rotations) {
  if (!out_rotations) return null_arg("out_rotations");
  return guarded([&] {
    *out_rotations = heprune::rotations_pruned({"layer", c_in, c_out, f, c_n, alpha, beta});
  });
}

hp_status hp_cost_report_json(const char* specs_json, char** out_json) {
  if (!specs_json) return null_arg("specs_json");
  if (!out_json) return null_arg("out_json");
  return guarded([&] {
    const auto specs = heprune::cost_specs_from_json(nlohmann::json::parse(specs_json));
    *out_json = copy_string(heprune::cost_report(specs).dump(2));
  });
}

hp_status hp_cost_report_table(const char* specs_json, char** out_table) {
  if (!specs_json) return null_arg("specs_json");
  if (!out_table) return null_arg("out_table");
  return guarded([&] {
    const auto specs = heprune::cost_specs_from_json(nlohmann::json::parse(specs_json));
    *out_table = copy_string(heprune::cost_report_table(specs));
  });
}

hp_status hp_train_run(const char* config_json, const char* checkpoint_path,
                       char** out_history_csv) {
  if (!config_json) return null_arg("config_json");
  return guarded([&] {
    const nlohmann::json doc = nlohmann::json::parse(config_json);
    if (!doc.is_object()) throw std::invalid_argument("train config must be a JSON object");
    heprune::SyntheticSpec task_spec;
    heprune::ModelConfig model_config;
    heprune::TrainConfig train_config;
    heprune::RegFactors reg;
    if (doc.contains("task")) task_spec = heprune::synthetic_spec_from_json(doc.at("task"));
    if (doc.contains("model")) model_config = heprune::model_config_from_json(doc.at("model"));
    if (doc.contains("train")) train_config = heprune::train_config_from_json(doc.at("train"));
    if (doc.contains("reg")) reg = heprune::reg_factors_from_json(doc.at("reg"));

    // The model consumes whatever the task produces.
    model_config.in_channels = task_spec.channels;
    model_config.height = task_spec.height;
    model_config.width = task_spec.width;
    model_config.num_classes = task_spec.num_classes;

    const heprune::SyntheticTask task = heprune::make_synthetic_task(task_spec);
    heprune::ToyCnn model = heprune::init_model(model_config);
    const heprune::TrainHistory history = heprune::train(model, task, train_config, reg);
    if (checkpoint_path) heprune::save_checkpoint(model, checkpoint_path);
    if (out_history_csv) *out_history_csv = copy_string(heprune::history_csv(history));
  });
}

hp_status hp_prune_run(const char* checkpoint_path, const char* config_json,
                       const char* pruned_checkpoint_path, char** out_trajectory_csv) {
  if (!checkpoint_path) return null_arg("checkpoint_path");
  if (!config_json) return null_arg("config_json");
  return guarded([&] {
    heprune::ToyCnn model = heprune::load_checkpoint(checkpoint_path);
    const nlohmann::json doc = nlohmann::json::parse(config_json);
    if (!doc.is_object()) throw std::invalid_argument("prune config must be a JSON object");
    heprune::SyntheticSpec task_spec;
    heprune::PruneSchedule schedule;
    if (doc.contains("task")) task_spec = heprune::synthetic_spec_from_json(doc.at("task"));
    if (doc.contains("schedule")) schedule = heprune::schedule_from_json(doc.at("schedule"));
    if (task_spec.channels != model.config.in_channels ||
        task_spec.height != model.config.height || task_spec.width != model.config.width ||
        task_spec.num_classes != model.config.num_classes)
      throw std::invalid_argument("task shape does not match the checkpointed model");

    const heprune::SyntheticTask task = heprune::make_synthetic_task(task_spec);
    std::string csv;
    if (doc.value("channel", false))
      csv = heprune::channel_trajectory_csv(
          heprune::channel_prune_baseline(model, schedule, task));
    else
      csv = heprune::trajectory_csv(heprune::prune_with_finetune(model, schedule, task));
    if (pruned_checkpoint_path) heprune::save_checkpoint(model, pruned_checkpoint_path);
    if (out_trajectory_csv) *out_trajectory_csv = copy_string(csv);
  });
}

hp_status hp_sweep_run(const char* spec_json, const char* out_dir, char** out_summary_json) {
  if (!spec_json) return null_arg("spec_json");
  if (!out_dir || !*out_dir) return null_arg("out_dir");
  return guarded([&] {
    const heprune::SweepSpec spec =
        heprune::sweep_spec_from_json(nlohmann::json::parse(spec_json));
    heprune::run_sweep(spec, out_dir);
    if (out_summary_json)
      *out_summary_json = copy_string(heprune::read_file(std::string(out_dir) + "/sweep.json"));
  });
}

hp_status hp_pareto_extract(const char* results_dir, char** out_frontier_csv,
                            char** out_frontier_json) {
  if (!results_dir) return null_arg("results_dir");
  return guarded([&] {
    const std::vector<heprune::ParetoPoint> frontier =
        heprune::pareto_frontier(heprune::load_sweep_points(results_dir));
    // Allocate both documents before publishing either so a late failure
    // can't deliver half a result.
    char* csv_ptr = nullptr;
    char* json_ptr = nullptr;
    try {
      if (out_frontier_csv) csv_ptr = copy_string(heprune::frontier_csv(frontier));
      if (out_frontier_json) json_ptr = copy_string(heprune::frontier_to_json(frontier).dump(2));
    } catch (...) {
      std::free(csv_ptr);
      std::free(json_ptr);
      throw;
    }
    if (out_frontier_csv) *out_frontier_csv = csv_ptr;
    if (out_frontier_json) *out_frontier_json = json_ptr;
  });
}

hp_status hp_compare_frontiers(const char* frontier_a_json, const char* frontier_b_json,
                               double accuracy_drop, double* out_ratio) {
  if (!frontier_a_json) return null_arg("frontier_a_json");
  if (!frontier_b_json) return null_arg("frontier_b_json");
  if (!out_ratio) return null_arg("out_ratio");
  return guarded([&] {
    const auto a = heprune::frontier_from_json(nlohmann::json::parse(frontier_a_json));
    const auto b = heprune::frontier_from_json(nlohmann::json::parse(frontier_b_json));
    *out_ratio = heprune::compare_at_accuracy(a, b, accuracy_drop);
  });
}

hp_status hp_verify_run(uint64_t seed, int32_t* out_ok, char** out_report) {
  if (!out_ok) return null_arg("out_ok");
  return guarded([&] {
    const heprune::VerifyReport report = heprune::run_verification(seed);
    *out_ok = report.ok ? 1 : 0;
    if (out_report) *out_report = copy_string(report.text);
  });
}

}  // extern "C"
