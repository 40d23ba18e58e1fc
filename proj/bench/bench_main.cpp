// Compares the OpenMP kernels against the serial reference path on the
// heavy inner loops: suite evaluation, representation-training steps, and
// acquisition proposal. Both paths must produce identical results; the
// timings show what threading buys on this machine.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "labo/core/parallel.hpp"
#include "labo/core/rng.hpp"
#include "labo/design/layout.hpp"
#include "labo/eval/score.hpp"
#include "labo/eval/suite.hpp"
#include "labo/gp/acquisition.hpp"
#include "labo/gp/gp.hpp"
#include "labo/nn/training.hpp"

using namespace labo;

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   %s\n", name, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              identical ? "results identical" : "RESULTS DIFFER");
}

ParamVector random_theta(RngStream& rng) {
  ParamVector theta;
  for (auto& v : theta.values) v = rng.uniform01();
  return theta;
}

}  // namespace

int main() {
  std::printf("workers available: %d\n", worker_count());
  std::printf("%-28s %13s %13s\n", "kernel", "serial", "openmp");

  RngStream rng(20240901);

  {  // Task-suite evaluation.
    const TaskSuite suite = TaskSuite::procedural(24, 7);
    const ParamVector theta = random_theta(rng);
    ScoreReport a, b;
    const double t_serial = time_ms([&] {
      set_parallel_enabled(false);
      a = score(theta, suite, false, 99, {});
    });
    const double t_parallel = time_ms([&] {
      set_parallel_enabled(true);
      b = score(theta, suite, false, 99, {});
    });
    row("suite evaluation (24 tasks)", t_serial, t_parallel,
        a.F == b.F && a.p == b.p && a.per_task_rewards == b.per_task_rewards);
  }

  {  // Pretraining steps (batched loss + backprop).
    std::vector<std::vector<double>> data(256, std::vector<double>(kParamDim));
    for (auto& d : data) {
      for (auto& v : d) v = rng.uniform01();
    }
    auto train = [&](bool parallel, RepModel* out) {
      set_parallel_enabled(parallel);
      RepModel model;
      model.initialize(41);
      TrainerState state;
      state.resize_for(model);
      TrainOptions opts;
      RngStream batch_rng(1), eps_rng(2);
      LossWorkspace ws;
      pretrain(model, state, data, 60, opts, batch_rng, eps_rng, &ws, 0);
      *out = model;
    };
    RepModel m_serial, m_parallel;
    const double t_serial = time_ms([&] { train(false, &m_serial); });
    const double t_parallel = time_ms([&] { train(true, &m_parallel); });
    row("pretraining (60 steps)", t_serial, t_parallel,
        m_serial.encoder().values == m_parallel.encoder().values &&
            m_serial.decoder().values == m_parallel.decoder().values);
  }

  {  // Acquisition proposal.
    const int dim = 32;
    std::vector<std::vector<double>> xs(40, std::vector<double>(dim));
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (auto& v : xs[i]) v = rng.uniform01();
      ys[i] = std::cos(3.0 * xs[i][0]) + 0.1 * xs[i][1];
    }
    GpModel model;
    RngStream fit_rng(5);
    GpFitOptions fopts;
    fopts.restarts = 2;
    fopts.ascent_steps = 25;
    model.fit(xs, ys, fopts, fit_rng);
    ProposeOptions popts;
    popts.n_raw = 512;
    popts.n_restarts = 8;
    popts.refine_steps = 30;
    std::vector<std::vector<double>> a, b;
    const double t_serial = time_ms([&] {
      set_parallel_enabled(false);
      RngStream acq(9);
      a = propose(model, 0.2, dim, popts, acq);
    });
    const double t_parallel = time_ms([&] {
      set_parallel_enabled(true);
      RngStream acq(9);
      b = propose(model, 0.2, dim, popts, acq);
    });
    row("acquisition proposal", t_serial, t_parallel, a == b);
  }

  set_parallel_enabled(true);
  return 0;
}
