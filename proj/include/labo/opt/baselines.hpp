#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "labo/gp/acquisition.hpp"
#include "labo/gp/gp.hpp"

namespace labo {

// Score function under optimization: F at a point of the unit cube. The
// eval_index is globally unique and drives any evaluation-side seeding, so
// concurrent evaluation cannot perturb determinism.
using ScoreFn = std::function<double(const std::vector<double>&, std::size_t)>;

struct TraceEntry {
  std::vector<double> x;
  double F = 0.0;
};

struct SearchResult {
  std::vector<double> best_x;
  double best_F = 0.0;
  std::vector<TraceEntry> trace;  // exactly `budget` entries, evaluation order
  int degenerate_covariance_events = 0;
};

SearchResult uniform_search(int budget, std::uint64_t seed, const ScoreFn& score_fn, int dim);

// CMA-ES state (rank-mu + rank-1 updates, cumulative step-size adaptation).
// The covariance is maintained through its eigendecomposition with an
// eigenvalue floor of 1e-14; flooring events are logged, not fatal.
struct CMAState {
  Eigen::VectorXd mean;
  double sigma = 0.3;
  Eigen::MatrixXd C;
  Eigen::MatrixXd B;       // eigenvectors
  Eigen::VectorXd D;       // sqrt eigenvalues
  Eigen::VectorXd p_sigma;
  Eigen::VectorXd p_c;
  int lambda = 0;
  long long generation = 0;
};

struct CmaParams {
  int lambda = 0;       // 0: 4 + floor(3 ln d)
  double sigma0 = 0.3;  // in unit-cube coordinates
};

// Maximizes score_fn over [0,1]^dim (out-of-bound samples are reflected back
// for evaluation and tracing). Standard hyperparameters throughout.
SearchResult cmaes_search(int budget, std::uint64_t seed, const ScoreFn& score_fn, int dim,
                          const CmaParams& params = {});

struct BoParams {
  double beta = 0.2;
  int n_init = 2;  // uniform bootstrap evaluations before the first fit
  GpFitOptions fit;
  ProposeOptions propose;
};

// The gp-surrogate machinery applied to the raw parameter space.
SearchResult raw_bo_search(int budget, std::uint64_t seed, const ScoreFn& score_fn, int dim,
                           const BoParams& params = {});

}  // namespace labo
