#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Exercises the shared-library surface exactly as an external client would:
// only the public C header, no core headers.
#include <heprune/heprune.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace {

// Reference convolution coded against the documented contract only.
std::vector<double> direct_conv(const std::vector<double>& x, int c_in, int h, int w,
                                const std::vector<double>& weights,
                                const std::vector<double>& bias, int c_out, int f) {
  const int r = f / 2;
  std::vector<double> y(static_cast<std::size_t>(c_out) * h * w, 0.0);
  for (int o = 0; o < c_out; ++o)
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx) {
        double acc = bias.empty() ? 0.0 : bias[o];
        for (int i = 0; i < c_in; ++i)
          for (int u = 0; u < f; ++u)
            for (int v = 0; v < f; ++v) {
              const int sy = yy + u - r, sx = xx + v - r;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += weights[((static_cast<std::size_t>(o) * c_in + i) * f + u) * f + v] *
                     x[(static_cast<std::size_t>(i) * h + sy) * w + sx];
            }
        y[(static_cast<std::size_t>(o) * h + yy) * w + xx] = acc;
      }
  return y;
}

std::string take(char* str) {
  REQUIRE(str != nullptr);
  std::string out(str);
  hp_string_free(str);
  return out;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

const char* kTinyTrainConfig = R"({
  "task": {"num_classes": 2, "channels": 2, "height": 4, "width": 4,
           "train_per_class": 8, "eval_per_class": 4, "noise": 0.4, "seed": 5},
  "model": {"conv_widths": [4], "c_n": 2, "seed": 5},
  "train": {"epochs": 2, "batch_size": 4, "lr_init": 0.05},
  "reg": {"lambda_d": 0.001}
})";

}  // namespace

TEST_CASE("version and error strings behave") {
  CHECK(std::strlen(hp_version()) > 0);
  CHECK(hp_last_error() != nullptr);
  hp_string_free(nullptr);  // must be a no-op
}

TEST_CASE("ledger lifecycle over the C surface") {
  hp_ledger* ledger = nullptr;
  REQUIRE(hp_ledger_create(&ledger) == HP_OK);
  uint64_t tau = 99, pi = 99, total = 99;
  REQUIRE(hp_ledger_counts(ledger, &tau, &pi, &total) == HP_OK);
  CHECK(tau == 0);
  CHECK(pi == 0);
  CHECK(total == 0);

  char* json = nullptr;
  REQUIRE(hp_ledger_json(ledger, &json) == HP_OK);
  const std::string doc = take(json);
  CHECK(doc.find("\"tau\"") != std::string::npos);

  CHECK(hp_ledger_counts(nullptr, &tau, &pi, &total) == HP_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(hp_last_error()) > 0);
  hp_ledger_free(ledger);
}

TEST_CASE("packed convolution matches the reference and counts rotations") {
  // 1x3x3 all ones against an all-ones kernel: the classic overlap counts.
  {
    std::vector<double> x(9, 1.0), w(9, 1.0), out(9, -1.0);
    hp_ledger* ledger = nullptr;
    REQUIRE(hp_ledger_create(&ledger) == HP_OK);
    REQUIRE(hp_packed_conv(x.data(), 1, 3, 3, w.data(), nullptr, 1, 3, 1, nullptr, nullptr,
                           ledger, "l1", out.data()) == HP_OK);
    CHECK(out[4] == doctest::Approx(9.0));
    CHECK(out[0] == doctest::Approx(4.0));
    CHECK(out[1] == doctest::Approx(6.0));
    uint64_t total = 0;
    REQUIRE(hp_ledger_counts(ledger, nullptr, nullptr, &total) == HP_OK);
    CHECK(total == 8);  // f^2 - 1 taus, no pis at c_n = 1
    hp_ledger_free(ledger);
  }

  // Random multi-block instance against the inline reference.
  {
    const int c_in = 4, c_out = 4, h = 5, w = 5, f = 3, c_n = 4;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::vector<double> x(c_in * h * w), weights(c_out * c_in * f * f), bias(c_out);
    for (double& v : x) v = value(rng);
    for (double& v : weights) v = value(rng);
    for (double& v : bias) v = value(rng);

    std::vector<double> got(c_out * h * w, 0.0);
    hp_ledger* ledger = nullptr;
    REQUIRE(hp_ledger_create(&ledger) == HP_OK);
    REQUIRE(hp_packed_conv(x.data(), c_in, h, w, weights.data(), bias.data(), c_out, f, c_n,
                           nullptr, nullptr, ledger, "l1", got.data()) == HP_OK);
    const std::vector<double> want = direct_conv(x, c_in, h, w, weights, bias, c_out, f);
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));

    uint64_t tau = 0, pi = 0;
    REQUIRE(hp_ledger_counts(ledger, &tau, &pi, nullptr) == HP_OK);
    CHECK(tau == 8);
    CHECK(pi == 3);

    // Masks cut counts: keep only the center tap / only the j = 0 diagonal.
    std::vector<uint8_t> center_only(f * f, 0);
    center_only[4] = 1;
    REQUIRE(hp_ledger_reset(ledger) == HP_OK);
    REQUIRE(hp_packed_conv(x.data(), c_in, h, w, weights.data(), bias.data(), c_out, f, c_n,
                           center_only.data(), nullptr, ledger, "l1", got.data()) == HP_OK);
    REQUIRE(hp_ledger_counts(ledger, &tau, &pi, nullptr) == HP_OK);
    CHECK(tau == 0);
    CHECK(pi == 3);

    std::vector<uint8_t> j0_only(c_n, 0);  // one block pair at c_in = c_out = c_n
    j0_only[0] = 1;
    REQUIRE(hp_ledger_reset(ledger) == HP_OK);
    REQUIRE(hp_packed_conv(x.data(), c_in, h, w, weights.data(), bias.data(), c_out, f, c_n,
                           nullptr, j0_only.data(), ledger, "l1", got.data()) == HP_OK);
    REQUIRE(hp_ledger_counts(ledger, &tau, &pi, nullptr) == HP_OK);
    CHECK(tau == 8);
    CHECK(pi == 0);
    hp_ledger_free(ledger);
  }
}

TEST_CASE("packed convolution rejects bad arguments") {
  std::vector<double> x(9, 0.0), w(9, 0.0), out(9, 0.0);
  hp_ledger* ledger = nullptr;
  REQUIRE(hp_ledger_create(&ledger) == HP_OK);

  CHECK(hp_packed_conv(nullptr, 1, 3, 3, w.data(), nullptr, 1, 3, 1, nullptr, nullptr, ledger,
                       nullptr, out.data()) == HP_ERR_INVALID_ARGUMENT);
  CHECK(hp_packed_conv(x.data(), 1, 3, 3, w.data(), nullptr, 1, 3, -1, nullptr, nullptr, ledger,
                       nullptr, out.data()) == HP_ERR_INVALID_ARGUMENT);

  // c_n must divide the channel counts.
  std::vector<double> x3(3 * 9, 0.0), w33(3 * 3 * 9, 0.0), out3(3 * 9, 0.0);
  CHECK(hp_packed_conv(x3.data(), 3, 3, 3, w33.data(), nullptr, 3, 3, 2, nullptr, nullptr,
                       ledger, nullptr, out3.data()) == HP_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(hp_last_error()) > 0);

  std::vector<uint8_t> bad_mask(9, 2);
  CHECK(hp_packed_conv(x.data(), 1, 3, 3, w.data(), nullptr, 1, 3, 1, bad_mask.data(), nullptr,
                       ledger, nullptr, out.data()) == HP_ERR_INVALID_ARGUMENT);
  hp_ledger_free(ledger);
}

TEST_CASE("closed-form rotation counts") {
  uint64_t count = 0;
  REQUIRE(hp_rotations_unpruned(4, 4, 3, 4, &count) == HP_OK);
  CHECK(count == 11);
  REQUIRE(hp_rotations_unpruned(256, 256, 3, 64, &count) == HP_OK);
  CHECK(count == 1040);

  double pruned = 0.0;
  REQUIRE(hp_rotations_pruned(256, 256, 3, 64, 0.5, 0.5, &pruned) == HP_OK);
  CHECK(pruned == doctest::Approx(520.0));

  CHECK(hp_rotations_unpruned(5, 4, 3, 4, &count) == HP_ERR_INVALID_ARGUMENT);
  CHECK(hp_rotations_pruned(4, 4, 3, 4, -0.1, 1.0, &pruned) == HP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("cost reports from a spec document") {
  const char* specs = R"([
    {"name": "conv1", "c_in": 4, "c_out": 4, "f": 3, "c_n": 4},
    {"name": "conv2", "c_in": 256, "c_out": 256, "f": 3, "c_n": 64, "alpha": 0.5, "beta": 0.5}
  ])";
  char* json = nullptr;
  REQUIRE(hp_cost_report_json(specs, &json) == HP_OK);
  const std::string report = take(json);
  CHECK(report.find("1040") != std::string::npos);
  CHECK(report.find("\"total\"") != std::string::npos);

  char* table = nullptr;
  REQUIRE(hp_cost_report_table(specs, &table) == HP_OK);
  const std::string text = take(table);
  CHECK(text.find("conv2") != std::string::npos);

  CHECK(hp_cost_report_json("not json", &json) == HP_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(hp_last_error()) > 0);
}

TEST_CASE("train, prune, sweep, pareto and compare round trip") {
  const std::string checkpoint = temp_path("hp_capi_ckpt.json");
  const std::string pruned = temp_path("hp_capi_pruned.json");
  std::filesystem::remove(checkpoint);
  std::filesystem::remove(pruned);

  char* history = nullptr;
  REQUIRE(hp_train_run(kTinyTrainConfig, checkpoint.c_str(), &history) == HP_OK);
  const std::string history_text = take(history);
  CHECK(history_text.find("epoch,lr,train_loss,eval_accuracy") == 0);
  CHECK(std::filesystem::exists(checkpoint));

  const char* prune_config = R"({
    "task": {"num_classes": 2, "channels": 2, "height": 4, "width": 4,
             "train_per_class": 8, "eval_per_class": 4, "noise": 0.4, "seed": 5},
    "schedule": {"iterations": 2, "threshold_start": 0.05, "threshold_step_p": 0.05,
                 "threshold_step_d": 0.05, "finetune_steps": 2, "batch_size": 4}
  })";
  char* trajectory = nullptr;
  REQUIRE(hp_prune_run(checkpoint.c_str(), prune_config, pruned.c_str(), &trajectory) == HP_OK);
  const std::string trajectory_text = take(trajectory);
  CHECK(trajectory_text.find("iteration,threshold_p,threshold_d,alpha,beta,rotations") == 0);
  CHECK(std::filesystem::exists(pruned));

  // A task that does not match the checkpoint is rejected.
  CHECK(hp_prune_run(checkpoint.c_str(), R"({"task": {"channels": 4}})", nullptr, nullptr) ==
        HP_ERR_INVALID_ARGUMENT);
  // A missing checkpoint is an IO error.
  CHECK(hp_prune_run(temp_path("hp_capi_missing.json").c_str(), prune_config, nullptr,
                     nullptr) == HP_ERR_IO);

  const std::string sweep_dir = temp_path("hp_capi_sweep");
  std::filesystem::remove_all(sweep_dir);
  const char* sweep_spec = R"({
    "mode": "diagonal-only",
    "lambda_d_grid": [0.0, 0.002],
    "seeds": [1],
    "task": {"num_classes": 2, "channels": 2, "height": 4, "width": 4,
             "train_per_class": 8, "eval_per_class": 4, "noise": 0.4, "seed": 1},
    "model": {"conv_widths": [4], "c_n": 2},
    "train": {"epochs": 2, "batch_size": 4, "lr_init": 0.05},
    "schedule": {"iterations": 2, "threshold_start": 0.0, "threshold_step_d": 0.05,
                 "finetune_steps": 2, "batch_size": 4}
  })";
  char* summary = nullptr;
  REQUIRE(hp_sweep_run(sweep_spec, sweep_dir.c_str(), &summary) == HP_OK);
  CHECK(take(summary).find("\"runs\"") != std::string::npos);

  char* frontier_csv_text = nullptr;
  char* frontier_json_text = nullptr;
  REQUIRE(hp_pareto_extract(sweep_dir.c_str(), &frontier_csv_text, &frontier_json_text) ==
          HP_OK);
  CHECK(take(frontier_csv_text).find("accuracy,reduction_pct") == 0);
  const std::string frontier = take(frontier_json_text);
  CHECK(frontier.find("\"frontier\"") != std::string::npos);

  double ratio = 0.0;
  REQUIRE(hp_compare_frontiers(frontier.c_str(), frontier.c_str(), 0.02, &ratio) == HP_OK);
  CHECK(ratio == doctest::Approx(1.0));
  CHECK(hp_compare_frontiers(frontier.c_str(), frontier.c_str(), -0.5, &ratio) ==
        HP_ERR_INVALID_ARGUMENT);

  std::filesystem::remove_all(sweep_dir);
  std::filesystem::remove(checkpoint);
  std::filesystem::remove(pruned);
}

TEST_CASE("built-in verification passes") {
  int32_t ok = 0;
  char* report = nullptr;
  REQUIRE(hp_verify_run(7, &ok, &report) == HP_OK);
  const std::string text = take(report);
  CHECK(ok == 1);
  CHECK(text.find("all checks passed") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}
