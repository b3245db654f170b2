#include "serialize.hpp"

#include <cerrno>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace heprune {

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
  return {{"shape", t.shape}, {"data", t.data}};
}

Tensor tensor_from_json(const nlohmann::json& doc) {
  Tensor t(doc.at("shape").get<std::vector<int>>());
  const auto data = doc.at("data").get<std::vector<double>>();
  if (data.size() != t.size()) throw std::invalid_argument("tensor data does not match its shape");
  t.data = data;
  return t;
}

nlohmann::json mask_to_json(const LayerMask& m) {
  return {{"f", m.f},
          {"c_n", m.c_n},
          {"blocks_in", m.blocks_in},
          {"blocks_out", m.blocks_out},
          {"positional", m.positional},
          {"diagonal", m.diagonal},
          {"channel", m.channel}};
}

LayerMask mask_from_json(const nlohmann::json& doc) {
  LayerMask m;
  m.f = doc.at("f").get<int>();
  m.c_n = doc.at("c_n").get<int>();
  m.blocks_in = doc.at("blocks_in").get<int>();
  m.blocks_out = doc.at("blocks_out").get<int>();
  m.positional = doc.at("positional").get<std::vector<std::uint8_t>>();
  m.diagonal = doc.at("diagonal").get<std::vector<std::uint8_t>>();
  m.channel = doc.at("channel").get<std::vector<std::uint8_t>>();
  if (m.positional.size() != static_cast<std::size_t>(m.f) * m.f ||
      m.diagonal.size() != static_cast<std::size_t>(m.blocks_in) * m.blocks_out * m.c_n)
    throw std::invalid_argument("mask arrays do not match their dimensions");
  return m;
}

template <typename T>
T field_or(const nlohmann::json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  return doc.at(key).get<T>();
}

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& config) {
  return {{"in_channels", config.in_channels},
          {"height", config.height},
          {"width", config.width},
          {"num_classes", config.num_classes},
          {"conv_widths", config.conv_widths},
          {"f", config.f},
          {"c_n", config.c_n},
          {"seed", config.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& doc) {
  ModelConfig config;
  config.in_channels = field_or(doc, "in_channels", config.in_channels);
  config.height = field_or(doc, "height", config.height);
  config.width = field_or(doc, "width", config.width);
  config.num_classes = field_or(doc, "num_classes", config.num_classes);
  config.conv_widths = field_or(doc, "conv_widths", config.conv_widths);
  config.f = field_or(doc, "f", config.f);
  config.c_n = field_or(doc, "c_n", config.c_n);
  config.seed = field_or(doc, "seed", config.seed);
  return config;
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
  return {{"num_classes", spec.num_classes},
          {"channels", spec.channels},
          {"height", spec.height},
          {"width", spec.width},
          {"train_per_class", spec.train_per_class},
          {"eval_per_class", spec.eval_per_class},
          {"noise", spec.noise},
          {"seed", spec.seed}};
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& doc) {
  SyntheticSpec spec;
  spec.num_classes = field_or(doc, "num_classes", spec.num_classes);
  spec.channels = field_or(doc, "channels", spec.channels);
  spec.height = field_or(doc, "height", spec.height);
  spec.width = field_or(doc, "width", spec.width);
  spec.train_per_class = field_or(doc, "train_per_class", spec.train_per_class);
  spec.eval_per_class = field_or(doc, "eval_per_class", spec.eval_per_class);
  spec.noise = field_or(doc, "noise", spec.noise);
  spec.seed = field_or(doc, "seed", spec.seed);
  return spec;
}

nlohmann::json train_config_to_json(const TrainConfig& config) {
  return {{"lr_init", config.lr_init},
          {"momentum", config.momentum},
          {"schedule", config.schedule == LrSchedule::cosine ? "cosine" : "multistep"},
          {"lr_drop_epochs", config.lr_drop_epochs},
          {"lr_drop_factor", config.lr_drop_factor},
          {"batch_size", config.batch_size},
          {"epochs", config.epochs},
          {"label_smoothing", config.label_smoothing},
          {"seed", config.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  TrainConfig config;
  config.lr_init = field_or(doc, "lr_init", config.lr_init);
  config.momentum = field_or(doc, "momentum", config.momentum);
  if (doc.contains("schedule")) {
    const std::string name = doc.at("schedule").get<std::string>();
    if (name == "cosine")
      config.schedule = LrSchedule::cosine;
    else if (name == "multistep")
      config.schedule = LrSchedule::multistep;
    else
      throw std::invalid_argument("unknown lr schedule: " + name);
  }
  config.lr_drop_epochs = field_or(doc, "lr_drop_epochs", config.lr_drop_epochs);
  config.lr_drop_factor = field_or(doc, "lr_drop_factor", config.lr_drop_factor);
  config.batch_size = field_or(doc, "batch_size", config.batch_size);
  config.epochs = field_or(doc, "epochs", config.epochs);
  config.label_smoothing = field_or(doc, "label_smoothing", config.label_smoothing);
  config.seed = field_or(doc, "seed", config.seed);
  return config;
}

nlohmann::json reg_factors_to_json(const RegFactors& reg) {
  return {{"lambda", reg.lambda}, {"lambda_p", reg.lambda_p}, {"lambda_d", reg.lambda_d}};
}

RegFactors reg_factors_from_json(const nlohmann::json& doc) {
  RegFactors reg;
  reg.lambda = field_or(doc, "lambda", reg.lambda);
  reg.lambda_p = field_or(doc, "lambda_p", reg.lambda_p);
  reg.lambda_d = field_or(doc, "lambda_d", reg.lambda_d);
  return reg;
}

nlohmann::json schedule_to_json(const PruneSchedule& schedule) {
  return {{"iterations", schedule.iterations},
          {"threshold_start", schedule.threshold_start},
          {"threshold_step_p", schedule.threshold_step_p},
          {"threshold_step_d", schedule.threshold_step_d},
          {"finetune_steps", schedule.finetune_steps},
          {"finetune_lr", schedule.finetune_lr},
          {"batch_size", schedule.batch_size},
          {"label_smoothing", schedule.label_smoothing},
          {"seed", schedule.seed}};
}

PruneSchedule schedule_from_json(const nlohmann::json& doc) {
  PruneSchedule schedule;
  schedule.iterations = field_or(doc, "iterations", schedule.iterations);
  schedule.threshold_start = field_or(doc, "threshold_start", schedule.threshold_start);
  schedule.threshold_step_p = field_or(doc, "threshold_step_p", schedule.threshold_step_p);
  schedule.threshold_step_d = field_or(doc, "threshold_step_d", schedule.threshold_step_d);
  schedule.finetune_steps = field_or(doc, "finetune_steps", schedule.finetune_steps);
  schedule.finetune_lr = field_or(doc, "finetune_lr", schedule.finetune_lr);
  schedule.batch_size = field_or(doc, "batch_size", schedule.batch_size);
  schedule.label_smoothing = field_or(doc, "label_smoothing", schedule.label_smoothing);
  schedule.seed = field_or(doc, "seed", schedule.seed);
  return schedule;
}

nlohmann::json model_to_json(const ToyCnn& model) {
  nlohmann::json convs = nlohmann::json::array();
  for (const auto& conv : model.convs)
    convs.push_back({{"weights", tensor_to_json(conv.weights)}, {"bias", tensor_to_json(conv.bias)}});
  nlohmann::json masks = nlohmann::json::array();
  for (const auto& mask : model.masks) masks.push_back(mask_to_json(mask));
  return {{"format", "heprune-checkpoint"},
          {"version", 1},
          {"config", model_config_to_json(model.config)},
          {"convs", convs},
          {"masks", masks},
          {"head", {{"weights", tensor_to_json(model.head.weights)},
                    {"bias", tensor_to_json(model.head.bias)}}}};
}

ToyCnn model_from_json(const nlohmann::json& doc) {
  if (field_or<std::string>(doc, "format", "") != "heprune-checkpoint")
    throw std::invalid_argument("not a model checkpoint");
  ToyCnn model;
  model.config = model_config_from_json(doc.at("config"));
  validate_model_config(model.config);
  for (const auto& conv : doc.at("convs")) {
    ConvLayerParams p;
    p.weights = tensor_from_json(conv.at("weights"));
    p.bias = tensor_from_json(conv.at("bias"));
    model.convs.push_back(std::move(p));
  }
  for (const auto& mask : doc.at("masks")) model.masks.push_back(mask_from_json(mask));
  if (model.convs.size() != model.config.conv_widths.size() ||
      model.masks.size() != model.convs.size())
    throw std::invalid_argument("checkpoint layer count does not match its config");
  model.head.weights = tensor_from_json(doc.at("head").at("weights"));
  model.head.bias = tensor_from_json(doc.at("head").at("bias"));
  return model;
}

void save_checkpoint(const ToyCnn& model, const std::string& path) {
  write_file_atomic(path, model_to_json(model).dump(2));
}

ToyCnn load_checkpoint(const std::string& path) {
  return model_from_json(nlohmann::json::parse(read_file(path)));
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string history_csv(const TrainHistory& history) {
  std::ostringstream out;
  out << "epoch,lr,train_loss,eval_accuracy,mean_positional_norm,mean_diagonal_norm\n";
  for (const EpochRecord& r : history.epochs)
    out << r.epoch << ',' << format_double(r.lr) << ',' << format_double(r.train_loss) << ','
        << format_double(r.eval_accuracy) << ',' << format_double(r.mean_positional_norm) << ','
        << format_double(r.mean_diagonal_norm) << '\n';
  return out.str();
}

std::string trajectory_csv(const PruneTrajectory& trajectory) {
  std::ostringstream out;
  out << "iteration,threshold_p,threshold_d,alpha,beta,rotations,rotations_reduction_pct,"
         "accuracy\n";
  for (const PruneRecord& r : trajectory.records)
    out << r.iteration << ',' << format_double(r.threshold_p) << ','
        << format_double(r.threshold_d) << ',' << format_double(r.alpha) << ','
        << format_double(r.beta) << ',' << r.rotations << ','
        << format_double(r.rotations_reduction_pct) << ',' << format_double(r.accuracy) << '\n';
  return out.str();
}

std::string channel_trajectory_csv(const ChannelPruneTrajectory& trajectory) {
  std::ostringstream out;
  out << "iteration,threshold,active_params,param_reduction_pct,accuracy\n";
  for (const ChannelPruneRecord& r : trajectory.records)
    out << r.iteration << ',' << format_double(r.threshold) << ',' << r.active_params << ','
        << format_double(r.param_reduction_pct) << ',' << format_double(r.accuracy) << '\n';
  return out.str();
}

nlohmann::json cost_report(std::span<const LayerCostSpec> specs) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerCostSpec& spec : specs) {
    validate_cost_spec(spec);
    layers.push_back({{"name", spec.name},
                      {"c_in", spec.c_in},
                      {"c_out", spec.c_out},
                      {"f", spec.f},
                      {"c_n", spec.c_n},
                      {"alpha", spec.alpha},
                      {"beta", spec.beta},
                      {"rotations_unpruned", rotations_unpruned(spec)},
                      {"rotations_pruned", rotations_pruned(spec)}});
  }
  const NetworkCost total = network_cost(specs);
  return {{"layers", layers},
          {"total",
           {{"rotations_unpruned", total.unpruned},
            {"rotations_pruned", total.pruned},
            {"reduction_pct", total.reduction_pct()}}}};
}

std::string cost_report_table(std::span<const LayerCostSpec> specs) {
  std::ostringstream out;
  out << "layer            c_in  c_out  f  c_n  alpha  beta   unpruned    pruned\n";
  char line[160];
  for (const LayerCostSpec& spec : specs) {
    std::snprintf(line, sizeof(line), "%-16s %5d %6d %2d %4d %6.3f %5.3f %10llu %9.1f\n",
                  spec.name.c_str(), spec.c_in, spec.c_out, spec.f, spec.c_n, spec.alpha,
                  spec.beta, static_cast<unsigned long long>(rotations_unpruned(spec)),
                  rotations_pruned(spec));
    out << line;
  }
  const NetworkCost total = network_cost(specs);
  std::snprintf(line, sizeof(line), "total %10llu rotations unpruned, %.1f pruned (%.2f%% saved)\n",
                static_cast<unsigned long long>(total.unpruned), total.pruned,
                total.reduction_pct());
  out << line;
  return out.str();
}

std::vector<LayerCostSpec> cost_specs_from_json(const nlohmann::json& doc) {
  const nlohmann::json& list = doc.is_array() ? doc : doc.at("layers");
  std::vector<LayerCostSpec> specs;
  for (const auto& item : list) {
    LayerCostSpec spec;
    spec.name = field_or<std::string>(item, "name", "layer" + std::to_string(specs.size() + 1));
    spec.c_in = item.at("c_in").get<int>();
    spec.c_out = item.at("c_out").get<int>();
    spec.f = item.at("f").get<int>();
    spec.c_n = item.at("c_n").get<int>();
    spec.alpha = field_or(item, "alpha", 1.0);
    spec.beta = field_or(item, "beta", 1.0);
    validate_cost_spec(spec);
    specs.push_back(std::move(spec));
  }
  return specs;
}

namespace {

// std::system_error (like filesystem_error below) so callers can tell IO
// failures apart from logic errors.
[[noreturn]] void throw_io(const std::string& what) {
  throw std::system_error(std::error_code(errno ? errno : EIO, std::generic_category()), what);
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw_io("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace heprune
