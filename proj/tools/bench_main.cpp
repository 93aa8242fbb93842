// Benchmark: OpenMP kernels vs their serial reference implementations for
// rollout sampling and batch-gradient assembly, with a bit-equality check.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cfpo/trainer.hpp"

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

cfpo::TrainConfig bench_config(int batch_size, int max_len) {
  cfpo::TrainConfig cfg;
  cfg.objective.kind = cfpo::ObjectiveKind::kCfpo;
  cfg.policy.vocab_size = 12;
  cfg.policy.num_prompts = 8;
  cfg.policy.max_len = max_len;
  cfg.env.kind = cfpo::EnvKind::kVerifiable;
  cfg.env.num_prompts = 8;
  cfg.env.vocab_size = 12;
  for (int p = 0; p < 8; ++p) cfg.env.answer_map.push_back(1 + p % 11);
  cfg.batch_size = batch_size;
  cfg.group_size = 4;
  cfg.minibatch_size = cfg.batch_responses();
  cfg.steps = 1;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  int repeats = 5;
  if (argc > 1) repeats = std::atoi(argv[1]);

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; parallel kernels run serially\n");
#endif
  std::printf("%-24s %10s %10s %8s\n", "kernel", "serial[s]", "parallel[s]", "speedup");

  for (const auto& [batch, len] : {std::pair{64, 32}, std::pair{256, 64}}) {
    const cfpo::TrainConfig cfg = bench_config(batch, len);
    const cfpo::PolicyParams params = cfpo::zero_params(cfg.policy);
    const cfpo::RngStream rng(cfg.seed);

    double t_serial = 0.0, t_parallel = 0.0;
    cfpo::RolloutBatch batch_serial, batch_parallel;
    for (int r = 0; r < repeats; ++r) {
      double t0 = now_s();
      batch_serial = cfpo::rollout_serial(params, params, cfg, rng.substream(r));
      t_serial += now_s() - t0;
      t0 = now_s();
      batch_parallel = cfpo::rollout(params, params, cfg, rng.substream(r));
      t_parallel += now_s() - t0;
    }
    if (batch_serial.old_logps != batch_parallel.old_logps ||
        batch_serial.rewards != batch_parallel.rewards) {
      std::printf("MISMATCH: rollout serial vs parallel differ\n");
      return 1;
    }
    char label[64];
    std::snprintf(label, sizeof(label), "rollout %dx4 len%d", batch, len);
    std::printf("%-24s %10.4f %10.4f %8.2f\n", label, t_serial, t_parallel,
                t_serial / t_parallel);

    cfpo::compute_advantages(batch_serial, cfg.advantage_estimator, cfg.group_size);
    std::vector<int> ids(batch_serial.responses.size());
    std::iota(ids.begin(), ids.end(), 0);

    double g_serial = 0.0, g_parallel = 0.0;
    cfpo::GradResult grad_serial, grad_parallel;
    for (int r = 0; r < repeats; ++r) {
      double t0 = now_s();
      grad_serial = cfpo::surrogate_gradient_serial(params, batch_serial, ids, cfg.objective);
      g_serial += now_s() - t0;
      t0 = now_s();
      grad_parallel = cfpo::surrogate_gradient(params, batch_serial, ids, cfg.objective);
      g_parallel += now_s() - t0;
    }
    if (grad_serial.grad != grad_parallel.grad) {
      std::printf("MISMATCH: gradient serial vs parallel differ\n");
      return 1;
    }
    std::snprintf(label, sizeof(label), "gradient %dx4 len%d", batch, len);
    std::printf("%-24s %10.4f %10.4f %8.2f\n", label, g_serial, g_parallel,
                g_serial / g_parallel);
  }
  return 0;
}
