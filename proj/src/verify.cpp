#include "verify.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "costmodel.hpp"
#include "dataset.hpp"
#include "heconv.hpp"
#include "ledger.hpp"
#include "mask.hpp"
#include "model.hpp"
#include "nn.hpp"
#include "packing.hpp"
#include "training.hpp"

namespace heprune {
namespace {

// Independently coded reference convolution: explicit bounds checks instead of
// padding buffers or packing, so it shares nothing with the packed path.
Tensor direct_conv(const Tensor& x, const ConvLayerParams& p) {
  const int c_in = x.shape[0], h = x.shape[1], w = x.shape[2];
  const int c_out = p.weights.shape[0], f = p.weights.shape[2], r = f / 2;
  Tensor y({c_out, h, w});
  for (int o = 0; o < c_out; ++o)
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx) {
        double acc = p.bias.data[o];
        for (int i = 0; i < c_in; ++i)
          for (int u = 0; u < f; ++u)
            for (int v = 0; v < f; ++v) {
              const int sy = yy + u - r, sx = xx + v - r;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += p.weights.data[((static_cast<std::size_t>(o) * c_in + i) * f + u) * f + v] *
                     x.data[(static_cast<std::size_t>(i) * h + sy) * w + sx];
            }
        y.data[(static_cast<std::size_t>(o) * h + yy) * w + xx] = acc;
      }
  return y;
}

struct Instance {
  Tensor x;
  ConvLayerParams p;
  LayerMask mask;
};

Instance random_instance(std::mt19937_64& rng, bool masked) {
  std::uniform_int_distribution<int> pick2(0, 1);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::bernoulli_distribution keep(0.7);

  const int c_n = pick2(rng) ? 2 : 4;
  const int c_in = c_n * (1 + pick2(rng));
  const int c_out = c_n * (1 + pick2(rng));
  const int f = pick2(rng) ? 3 : 5;
  const int hw = pick2(rng) ? 4 : 6;

  Instance inst;
  inst.x = Tensor({c_in, hw, hw});
  for (double& v : inst.x.data) v = value(rng);
  inst.p.weights = Tensor({c_out, c_in, f, f});
  for (double& v : inst.p.weights.data) v = value(rng);
  inst.p.bias = Tensor({c_out});
  for (double& v : inst.p.bias.data) v = value(rng);
  inst.mask = LayerMask::all_active(c_in, c_out, f, c_n);
  if (masked) {
    for (auto& bit : inst.mask.positional) bit = keep(rng) ? 1 : 0;
    for (auto& bit : inst.mask.diagonal) bit = keep(rng) ? 1 : 0;
    apply_mask(inst.p.weights, inst.mask);
  }
  return inst;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k)
    worst = std::max(worst, std::abs(a.data[k] - b.data[k]));
  return worst;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

class Checker {
 public:
  void check(bool pass, const std::string& label) {
    report_.text += (pass ? "ok: " : "FAIL: ") + label + "\n";
    if (!pass) report_.ok = false;
  }
  VerifyReport finish() {
    report_.text += report_.ok ? "all checks passed\n" : "verification FAILED\n";
    return report_;
  }

 private:
  VerifyReport report_;
};

}  // namespace

VerifyReport run_verification(std::uint64_t seed) {
  Checker checker;
  std::mt19937_64 rng(seed);
  constexpr int kTrials = 20;
  constexpr double kTol = 1e-9;

  // Packed conv against the reference, dense weights.
  {
    double worst = 0.0;
    bool counts_match = true;
    for (int t = 0; t < kTrials; ++t) {
      const Instance inst = random_instance(rng, false);
      RotationLedger ledger;
      const Tensor got = unpack(mimo_conv(pack(inst.x, inst.mask.c_n), inst.p, inst.mask, ledger));
      worst = std::max(worst, max_abs_diff(got, direct_conv(inst.x, inst.p)));
      const LayerCostSpec spec{"layer", inst.mask.c_in(), inst.mask.c_out(),
                               inst.mask.f, inst.mask.c_n, 1.0, 1.0};
      counts_match = counts_match && ledger.counts().total == rotations_unpruned(spec);
    }
    checker.check(worst <= kTol,
                  fmt("packed conv matches direct conv on 20 dense instances (max err %.2e)",
                      worst));
    checker.check(counts_match, "ledger equals the closed-form count on 20 dense instances");
  }

  // Packed conv against the reference under random masks.
  {
    double worst = 0.0;
    bool counts_match = true;
    for (int t = 0; t < kTrials; ++t) {
      const Instance inst = random_instance(rng, true);
      RotationLedger ledger;
      const Tensor got = unpack(mimo_conv(pack(inst.x, inst.mask.c_n), inst.p, inst.mask, ledger));
      worst = std::max(worst, max_abs_diff(got, direct_conv(inst.x, inst.p)));
      const MaskRotationCounts expect = exact_rotation_counts(inst.mask);
      const RotationCounts got_counts = ledger.counts();
      counts_match = counts_match && got_counts.tau == expect.tau && got_counts.pi == expect.pi;
    }
    checker.check(worst <= kTol,
                  fmt("packed conv matches direct conv on 20 masked instances (max err %.2e)",
                      worst));
    checker.check(counts_match, "ledger equals the per-mask exact count on 20 masked instances");
  }

  // Count-law spot values, including one large config run for real at h=w=2.
  {
    const LayerCostSpec small{"small", 4, 4, 3, 4, 1.0, 1.0};
    checker.check(rotations_unpruned(small) == 11, "count law gives 11 for (4,4,3,4)");

    const LayerCostSpec big{"big", 256, 256, 3, 64, 1.0, 1.0};
    checker.check(rotations_unpruned(big) == 1040, "count law gives 1040 for (256,256,3,64)");

    Tensor x({256, 2, 2});
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    for (double& v : x.data) v = value(rng);
    ConvLayerParams p;
    p.weights = Tensor({256, 256, 3, 3});
    for (double& v : p.weights.data) v = value(rng);
    p.bias = Tensor({256});
    RotationLedger ledger;
    const LayerMask mask = LayerMask::all_active(256, 256, 3, 64);
    unpack(mimo_conv(pack(x, 64), p, mask, ledger));
    checker.check(ledger.counts().total == 1040,
                  "a real (256,256,3,64) packed pass executes 1040 rotations");

    checker.check(rotations_pruned({"half", 256, 256, 3, 64, 0.5, 0.5}) == 520.0,
                  "half/half pruning of (256,256,3,64) costs 520");
    const DominanceGap gap = dominance_gap(big, 0.5);
    checker.check(gap.save_positional == 16.0 && gap.save_diagonal == 504.0,
                  "pruning half the diagonals saves 504 rotations vs 16 for positions");
  }

  // Uniform masks make the pruned-count estimator exact.
  {
    std::bernoulli_distribution keep(0.6);
    bool all_exact = true;
    for (int t = 0; t < 10; ++t) {
      Instance inst = random_instance(rng, false);
      const int c_n = inst.mask.c_n, f = inst.mask.f;
      for (int u = 0; u < f; ++u)
        for (int v = 0; v < f; ++v)
          if (u != f / 2 || v != f / 2)
            inst.mask.positional[u * f + v] = keep(rng) ? 1 : 0;
      for (int j = 1; j < c_n; ++j) {
        const std::uint8_t bit = keep(rng) ? 1 : 0;
        for (int bi = 0; bi < inst.mask.blocks_in; ++bi)
          for (int bo = 0; bo < inst.mask.blocks_out; ++bo)
            inst.mask.diagonal_at(bi, bo, j) = bit;
      }
      apply_mask(inst.p.weights, inst.mask);
      RotationLedger ledger;
      unpack(mimo_conv(pack(inst.x, c_n), inst.p, inst.mask, ledger));
      const LayerCostSpec spec{"layer", inst.mask.c_in(), inst.mask.c_out(),
                               f, c_n, inst.mask.alpha(), inst.mask.beta()};
      all_exact = all_exact &&
                  std::abs(rotations_pruned(spec) - double(ledger.counts().total)) <= kTol;
    }
    checker.check(all_exact, "pruned-count estimator equals the ledger on 10 uniform masks");
  }

  // Training gradient against central finite differences.
  {
    SyntheticSpec task_spec;
    task_spec.num_classes = 2;
    task_spec.channels = 2;
    task_spec.height = 4;
    task_spec.width = 4;
    task_spec.train_per_class = 4;
    task_spec.eval_per_class = 2;
    task_spec.seed = seed;
    const SyntheticTask task = make_synthetic_task(task_spec);

    ModelConfig config;
    config.in_channels = 2;
    config.height = 4;
    config.width = 4;
    config.num_classes = 2;
    config.conv_widths = {4};
    config.c_n = 2;
    config.seed = seed + 1;
    ToyCnn model = init_model(config);

    RegFactors reg;
    reg.lambda = 1e-3;
    reg.lambda_p = 1e-3;
    reg.lambda_d = 1e-3;
    const std::vector<std::size_t> batch = {0, 1, 2, 3};
    const std::vector<Tensor> images(task.train.images.begin(), task.train.images.begin() + 4);
    const std::vector<int> labels(task.train.labels.begin(), task.train.labels.begin() + 4);

    // One momentum-free unit-lr step turns the weight delta into the gradient.
    ToyCnn stepped = model;
    SgdState state = make_sgd_state(stepped);
    sgd_step(stepped, task.train.images, task.train.labels, batch, 1.0, 0.0, 0.1, reg, state);

    const double eps = 1e-5;
    double worst = 0.0;
    int checked = 0;
    const auto probe = [&](const Tensor& before, const Tensor& after, Tensor& live,
                           std::size_t stride) {
      for (std::size_t k = 0; k < live.data.size(); k += stride) {
        const double grad = before.data[k] - after.data[k];
        const double saved = live.data[k];
        live.data[k] = saved + eps;
        const double up = total_loss(model, images, labels, 0.1, reg);
        live.data[k] = saved - eps;
        const double down = total_loss(model, images, labels, 0.1, reg);
        live.data[k] = saved;
        const double fd = (up - down) / (2.0 * eps);
        if (std::abs(fd) < 1e-7) continue;  // ReLU kink or dead path
        worst = std::max(worst, std::abs(grad - fd) / std::max(std::abs(fd), 1e-10));
        ++checked;
      }
    };
    probe(model.convs[0].weights, stepped.convs[0].weights, model.convs[0].weights, 7);
    probe(model.head.weights, stepped.head.weights, model.head.weights, 3);
    checker.check(checked >= 10 && worst < 1e-4,
                  fmt("training gradient matches finite differences (%.0f probes, max rel err "
                      "%.2e)",
                      double(checked), worst));
  }

  return checker.finish();
}

}  // namespace heprune
