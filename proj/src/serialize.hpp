#ifndef HEPRUNE_SERIALIZE_HPP
#define HEPRUNE_SERIALIZE_HPP

#include <json.hpp>
#include <span>
#include <string>

#include "costmodel.hpp"
#include "dataset.hpp"
#include "model.hpp"
#include "pruning.hpp"
#include "training.hpp"

namespace heprune {

// Checkpoints carry the config (including the init seed), weights, biases and
// mask state, so a reloaded model evaluates identically.
nlohmann::json model_to_json(const ToyCnn& model);
ToyCnn model_from_json(const nlohmann::json& doc);
void save_checkpoint(const ToyCnn& model, const std::string& path);
ToyCnn load_checkpoint(const std::string& path);

// Config parsing with defaults for every omitted field.
ModelConfig model_config_from_json(const nlohmann::json& doc);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& doc);
TrainConfig train_config_from_json(const nlohmann::json& doc);
RegFactors reg_factors_from_json(const nlohmann::json& doc);
PruneSchedule schedule_from_json(const nlohmann::json& doc);

nlohmann::json model_config_to_json(const ModelConfig& config);
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
nlohmann::json train_config_to_json(const TrainConfig& config);
nlohmann::json reg_factors_to_json(const RegFactors& reg);
nlohmann::json schedule_to_json(const PruneSchedule& schedule);

// Round-trip safe decimal rendering shared by every CSV writer.
std::string format_double(double value);

std::string history_csv(const TrainHistory& history);
std::string trajectory_csv(const PruneTrajectory& trajectory);
std::string channel_trajectory_csv(const ChannelPruneTrajectory& trajectory);

// Per-layer closed-form rotation counts plus network totals.
nlohmann::json cost_report(std::span<const LayerCostSpec> specs);
std::string cost_report_table(std::span<const LayerCostSpec> specs);
std::vector<LayerCostSpec> cost_specs_from_json(const nlohmann::json& doc);

std::string read_file(const std::string& path);
// Writes via a temp file in the same directory and renames into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace heprune

#endif
