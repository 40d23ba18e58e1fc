#include "labo/gp/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "labo/core/parallel.hpp"

namespace labo {

double ucb(const GpModel& model, const std::vector<double>& x, double beta, AcqSign sign) {
  const Posterior p = model.posterior(x);
  if (sign == AcqSign::kPaper) return p.mean - beta * p.stddev * p.stddev;
  return p.mean + beta * p.stddev;
}

namespace {

void project_inside(std::vector<double>& x, double margin) {
  for (auto& v : x) v = std::clamp(v, margin, 1.0 - margin);
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::vector<std::vector<double>> propose(const GpModel& model, double beta, int dim,
                                         const ProposeOptions& opts, RngStream& rng) {
  // Raw pool (drawn serially: the stream state must not depend on threads).
  std::vector<std::vector<double>> raw(opts.n_raw, std::vector<double>(dim));
  for (auto& x : raw) {
    for (auto& v : x) v = rng.uniform01();
    project_inside(x, opts.bound_margin);
  }
  std::vector<double> raw_acq(opts.n_raw);
  parallel_for(raw.size(), [&](std::size_t i) { raw_acq[i] = ucb(model, raw[i], beta, opts.sign); });

  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (raw_acq[a] != raw_acq[b]) return raw_acq[a] > raw_acq[b];
    return a < b;  // stable under acquisition ties
  });

  const int n_restarts = std::min<int>(opts.n_restarts, static_cast<int>(raw.size()));
  std::vector<std::vector<double>> refined(n_restarts);
  std::vector<double> refined_acq(n_restarts);

  parallel_for(static_cast<std::size_t>(n_restarts), [&](std::size_t r) {
    std::vector<double> x = raw[order[r]];
    double fx = raw_acq[order[r]];
    std::vector<double> grad(dim), trial(dim);
    for (int it = 0; it < opts.refine_steps; ++it) {
      // Central differences, clamped probes.
      for (int k = 0; k < dim; ++k) {
        const double x0 = x[k];
        const double hi = std::min(x0 + opts.fd_step, 1.0 - opts.bound_margin);
        const double lo = std::max(x0 - opts.fd_step, opts.bound_margin);
        x[k] = hi;
        const double fhi = ucb(model, x, beta, opts.sign);
        x[k] = lo;
        const double flo = ucb(model, x, beta, opts.sign);
        x[k] = x0;
        grad[k] = hi > lo ? (fhi - flo) / (hi - lo) : 0.0;
      }
      double gnorm = 0.0;
      for (double g : grad) gnorm += g * g;
      gnorm = std::sqrt(gnorm);
      if (gnorm < 1e-14) break;

      // Projected ascent with backtracking halving.
      double step = opts.step_size;
      bool improved = false;
      for (int back = 0; back < 8; ++back) {
        for (int k = 0; k < dim; ++k) trial[k] = x[k] + step * grad[k] / gnorm;
        project_inside(trial, opts.bound_margin);
        const double ft = ucb(model, trial, beta, opts.sign);
        if (ft > fx) {
          x = trial;
          fx = ft;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    refined[r] = std::move(x);
    refined_acq[r] = fx;
  });

  // Greedy distinct selection, refined points first, raw pool as fallback.
  std::vector<std::size_t> refined_order(refined.size());
  std::iota(refined_order.begin(), refined_order.end(), std::size_t{0});
  std::sort(refined_order.begin(), refined_order.end(), [&](std::size_t a, std::size_t b) {
    if (refined_acq[a] != refined_acq[b]) return refined_acq[a] > refined_acq[b];
    return a < b;
  });

  std::vector<std::vector<double>> picked;
  const double min_d2 = opts.min_separation * opts.min_separation;
  auto try_pick = [&](const std::vector<double>& x) {
    if (static_cast<int>(picked.size()) >= opts.n_candidates) return;
    for (const auto& p : picked) {
      if (sq_dist(p, x) < min_d2) return;
    }
    picked.push_back(x);
  };
  for (std::size_t r : refined_order) try_pick(refined[r]);
  for (std::size_t r : order) {
    if (static_cast<int>(picked.size()) >= opts.n_candidates) break;
    try_pick(raw[r]);
  }
  return picked;
}

}  // namespace labo
