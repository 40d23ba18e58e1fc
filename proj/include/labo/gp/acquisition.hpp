#pragma once

#include <vector>

#include "labo/core/rng.hpp"
#include "labo/gp/gp.hpp"

namespace labo {

enum class AcqSign {
  kDefault,  // mu + beta * stddev (maximization-consistent UCB)
  kPaper,    // mu - beta * variance, the literal published form
};

double ucb(const GpModel& model, const std::vector<double>& x, double beta,
           AcqSign sign = AcqSign::kDefault);

struct ProposeOptions {
  int n_candidates = 2;
  int n_raw = 1024;
  int n_restarts = 10;
  int refine_steps = 50;
  double step_size = 0.01;       // refined by backtracking halving
  double fd_step = 1e-4;         // central-difference gradient
  double min_separation = 1e-4;  // pairwise distance between candidates
  double bound_margin = 1e-6;    // proposals stay strictly inside (0,1)^dim
  AcqSign sign = AcqSign::kDefault;
};

// Multi-start acquisition maximization over the unit cube: score n_raw
// uniform samples, refine the best n_restarts by projected finite-difference
// ascent, then greedily pick distinct candidates.
std::vector<std::vector<double>> propose(const GpModel& model, double beta, int dim,
                                         const ProposeOptions& opts, RngStream& rng);

}  // namespace labo
