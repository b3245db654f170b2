#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "dataset.hpp"
#include "model.hpp"
#include "serialize.hpp"
#include "training.hpp"

using namespace heprune;

TEST_CASE("model checkpoints round trip through json") {
  ModelConfig config;
  config.in_channels = 2;
  config.height = 4;
  config.width = 4;
  config.num_classes = 3;
  config.conv_widths = {4, 4};
  config.c_n = 2;
  config.seed = 99;
  ToyCnn model = init_model(config);
  model.masks[0].positional[0] = 0;
  model.masks[1].diagonal_at(0, 1, 1) = 0;
  apply_mask(model.convs[0].weights, model.masks[0]);
  apply_mask(model.convs[1].weights, model.masks[1]);

  const ToyCnn back = model_from_json(model_to_json(model));
  CHECK(back.config.seed == 99);
  REQUIRE(back.convs.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(back.convs[l].weights.data == model.convs[l].weights.data);
    CHECK(back.convs[l].bias.data == model.convs[l].bias.data);
    CHECK(back.masks[l].positional == model.masks[l].positional);
    CHECK(back.masks[l].diagonal == model.masks[l].diagonal);
  }
  CHECK(back.head.weights.data == model.head.weights.data);

  // File round trip.
  const std::string path =
      (std::filesystem::temp_directory_path() / "hp_ckpt_test.json").string();
  save_checkpoint(model, path);
  const ToyCnn loaded = load_checkpoint(path);
  CHECK(loaded.convs[0].weights.data == model.convs[0].weights.data);
  CHECK_FALSE(loaded.masks[0].positional_active(0, 0));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(model_from_json(nlohmann::json{{"foo", 1}}), std::invalid_argument);
}

TEST_CASE("config parsers fill defaults and reject junk") {
  const TrainConfig t = train_config_from_json(nlohmann::json::parse(R"({"epochs": 7})"));
  CHECK(t.epochs == 7);
  CHECK(t.lr_init == doctest::Approx(0.01));
  CHECK(t.momentum == doctest::Approx(0.9));
  CHECK(t.label_smoothing == doctest::Approx(0.1));
  CHECK(t.schedule == LrSchedule::cosine);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json::parse(R"({"schedule": "warp"})")),
                  std::invalid_argument);

  const auto multistep =
      train_config_from_json(nlohmann::json::parse(R"({"schedule": "multistep"})"));
  CHECK(multistep.schedule == LrSchedule::multistep);
  CHECK(multistep.lr_drop_epochs == std::vector<int>{50, 100, 130, 160});

  const RegFactors reg = reg_factors_from_json(nlohmann::json::parse(R"({"lambda_d": 0.002})"));
  CHECK(reg.lambda == 0.0);
  CHECK(reg.lambda_d == doctest::Approx(0.002));

  const PruneSchedule s =
      schedule_from_json(nlohmann::json::parse(R"({"iterations": 3, "threshold_step_d": 0.1})"));
  CHECK(s.iterations == 3);
  CHECK(s.threshold_step_d == doctest::Approx(0.1));
  CHECK(s.finetune_lr == doctest::Approx(1e-4));
}

TEST_CASE("trajectory csv has the documented columns") {
  PruneTrajectory traj;
  traj.unpruned_rotations = 22;
  PruneRecord r;
  r.iteration = 1;
  r.threshold_p = 0.25;
  r.threshold_d = 0.5;
  r.alpha = 0.75;
  r.beta = 0.5;
  r.tau = 12;
  r.pi = 2;
  r.rotations = 14;
  r.rotations_reduction_pct = 36.363636363636363;
  r.accuracy = 0.875;
  traj.records.push_back(r);

  const std::string csv = trajectory_csv(traj);
  CHECK(csv.find("iteration,threshold_p,threshold_d,alpha,beta,rotations,"
                 "rotations_reduction_pct,accuracy\n") == 0);
  CHECK(csv.find("1,0.25,0.5,0.75,0.5,14," + format_double(36.363636363636363) + ",0.875\n") !=
        std::string::npos);
}

TEST_CASE("cost report json and table") {
  std::vector<LayerCostSpec> specs = {
      {"conv1", 4, 4, 3, 4, 1.0, 1.0},
      {"conv2", 256, 256, 3, 64, 0.5, 0.5},
  };
  const nlohmann::json report = cost_report(specs);
  REQUIRE(report["layers"].size() == 2);
  CHECK(report["layers"][0]["rotations_unpruned"] == 11);
  CHECK(report["layers"][1]["rotations_unpruned"] == 1040);
  CHECK(report["layers"][1]["rotations_pruned"] == doctest::Approx(520.0));
  CHECK(report["total"]["rotations_unpruned"] == 1051);

  const std::string table = cost_report_table(specs);
  CHECK(table.find("conv1") != std::string::npos);
  CHECK(table.find("1040") != std::string::npos);

  const auto parsed = cost_specs_from_json(nlohmann::json::parse(
      R"([{"name":"a","c_in":4,"c_out":4,"f":3,"c_n":4}])"));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].alpha == doctest::Approx(1.0));
  CHECK_THROWS_AS(cost_specs_from_json(nlohmann::json::parse(
                      R"([{"c_in":6,"c_out":4,"f":3,"c_n":4}])")),
                  std::invalid_argument);
}

TEST_CASE("atomic writes create parent directories and replace content") {
  const std::string dir = (std::filesystem::temp_directory_path() / "hp_write_test").string();
  std::filesystem::remove_all(dir);
  const std::string path = dir + "/nested/file.txt";
  write_file_atomic(path, "one");
  CHECK(read_file(path) == "one");
  write_file_atomic(path, "two");
  CHECK(read_file(path) == "two");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_file(path), std::runtime_error);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 36.363636363636363, 1e-17, 0.0})
    CHECK(std::stod(format_double(v)) == v);
}
