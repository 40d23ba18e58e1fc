#include "labo/opt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "labo/core/errors.hpp"
#include "labo/core/parallel.hpp"

namespace labo {

namespace {

double reflect01(double v) {
  v = std::fmod(v, 2.0);
  if (v < 0.0) v += 2.0;
  return v <= 1.0 ? v : 2.0 - v;
}

void track_best(SearchResult& out, const std::vector<double>& x, double f) {
  if (out.trace.empty() || f > out.best_F) {
    out.best_F = f;
    out.best_x = x;
  }
}

}  // namespace

SearchResult uniform_search(int budget, std::uint64_t seed, const ScoreFn& score_fn, int dim) {
  if (budget <= 0) throw Error("uniform_search: budget must be positive");
  RngStream rng = derive_stream(seed, "uniform-search");
  std::vector<std::vector<double>> xs(budget, std::vector<double>(dim));
  for (auto& x : xs) {
    for (auto& v : x) v = rng.uniform01();
  }
  std::vector<double> fs(budget);
  parallel_for(static_cast<std::size_t>(budget),
               [&](std::size_t i) { fs[i] = score_fn(xs[i], i); });

  SearchResult out;
  out.trace.reserve(budget);
  for (int i = 0; i < budget; ++i) {
    track_best(out, xs[i], fs[i]);
    out.trace.push_back({std::move(xs[i]), fs[i]});
  }
  return out;
}

SearchResult cmaes_search(int budget, std::uint64_t seed, const ScoreFn& score_fn, int dim,
                          const CmaParams& params) {
  const int lambda =
      params.lambda > 0 ? params.lambda : 4 + static_cast<int>(std::floor(3.0 * std::log(dim)));
  if (budget < lambda) throw Error("cmaes_search: budget below one generation");

  // Standard strategy parameters.
  const int mu = lambda / 2;
  Eigen::VectorXd weights(mu);
  for (int i = 0; i < mu; ++i) weights[i] = std::log((lambda + 1) / 2.0) - std::log(i + 1.0);
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();
  const double n = dim;
  const double c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  const double d_sigma =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma;
  const double c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  const double c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  const double c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                              ((n + 2.0) * (n + 2.0) + mu_eff));
  const double chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  RngStream rng = derive_stream(seed, "cmaes");
  CMAState st;
  st.lambda = lambda;
  st.sigma = params.sigma0;
  st.mean = Eigen::VectorXd::Constant(dim, 0.5);
  for (int i = 0; i < dim; ++i) st.mean[i] = rng.uniform(0.3, 0.7);
  st.C = Eigen::MatrixXd::Identity(dim, dim);
  st.B = Eigen::MatrixXd::Identity(dim, dim);
  st.D = Eigen::VectorXd::Ones(dim);
  st.p_sigma = Eigen::VectorXd::Zero(dim);
  st.p_c = Eigen::VectorXd::Zero(dim);

  SearchResult out;
  out.trace.reserve(budget);
  int evals = 0;

  std::vector<Eigen::VectorXd> zs(lambda), xs(lambda);
  std::vector<std::vector<double>> repaired(lambda, std::vector<double>(dim));
  std::vector<double> fs(lambda);

  while (evals < budget) {
    const int pop = std::min(lambda, budget - evals);
    // Draw serially so the stream is independent of evaluation threading.
    for (int k = 0; k < pop; ++k) {
      Eigen::VectorXd z(dim);
      for (int i = 0; i < dim; ++i) z[i] = rng.gaussian();
      zs[k] = z;
      xs[k] = st.mean + st.sigma * (st.B * (st.D.asDiagonal() * z));
      for (int i = 0; i < dim; ++i) repaired[k][i] = reflect01(xs[k][i]);
    }
    const std::size_t base = static_cast<std::size_t>(evals);
    parallel_for(static_cast<std::size_t>(pop),
                 [&](std::size_t k) { fs[k] = score_fn(repaired[k], base + k); });
    for (int k = 0; k < pop; ++k) {
      track_best(out, repaired[k], fs[k]);
      out.trace.push_back({repaired[k], fs[k]});
    }
    evals += pop;
    if (pop < lambda) break;  // truncated final generation: no update

    // Selection on the maximized objective.
    std::vector<int> order(lambda);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (fs[a] != fs[b]) return fs[a] > fs[b];
      return a < b;
    });

    const Eigen::VectorXd old_mean = st.mean;
    Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < mu; ++i) new_mean += weights[i] * xs[order[i]];
    st.mean = new_mean;

    const Eigen::VectorXd delta = (st.mean - old_mean) / st.sigma;
    // C^{-1/2} delta = B D^{-1} B^T delta.
    const Eigen::VectorXd c_inv_sqrt_delta =
        st.B * st.D.cwiseInverse().asDiagonal() * (st.B.transpose() * delta);
    st.p_sigma = (1.0 - c_sigma) * st.p_sigma +
                 std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * c_inv_sqrt_delta;

    const double ps_norm = st.p_sigma.norm();
    const double denom =
        std::sqrt(1.0 - std::pow(1.0 - c_sigma, 2.0 * (st.generation + 1.0)));
    const bool hsig = ps_norm / denom < (1.4 + 2.0 / (n + 1.0)) * chi_n;

    st.p_c = (1.0 - c_c) * st.p_c +
             (hsig ? std::sqrt(c_c * (2.0 - c_c) * mu_eff) : 0.0) * delta;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < mu; ++i) {
      const Eigen::VectorXd y = (xs[order[i]] - old_mean) / st.sigma;
      rank_mu += weights[i] * y * y.transpose();
    }
    st.C = (1.0 - c_1 - c_mu) * st.C +
           c_1 * (st.p_c * st.p_c.transpose() +
                  (hsig ? 0.0 : c_c * (2.0 - c_c)) * st.C) +
           c_mu * rank_mu;
    st.C = 0.5 * (st.C + st.C.transpose());  // exact symmetry

    st.sigma *= std::exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0));
    st.generation += 1;

    // Refresh the eigendecomposition; floor the spectrum.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.C);
    Eigen::VectorXd evals_vec = eig.eigenvalues();
    bool floored = false;
    for (int i = 0; i < dim; ++i) {
      if (evals_vec[i] < 1e-14) {
        evals_vec[i] = 1e-14;
        floored = true;
      }
    }
    if (floored) {
      ++out.degenerate_covariance_events;
      st.C = eig.eigenvectors() * evals_vec.asDiagonal() * eig.eigenvectors().transpose();
      st.C = 0.5 * (st.C + st.C.transpose());
    }
    st.B = eig.eigenvectors();
    st.D = evals_vec.cwiseSqrt();
  }
  return out;
}

SearchResult raw_bo_search(int budget, std::uint64_t seed, const ScoreFn& score_fn, int dim,
                           const BoParams& params) {
  if (budget <= 0) throw Error("raw_bo_search: budget must be positive");
  RngStream init_rng = derive_stream(seed, "bo-init");
  RngStream fit_rng = derive_stream(seed, "bo-fit");
  RngStream acq_rng = derive_stream(seed, "bo-acquisition");

  SearchResult out;
  out.trace.reserve(budget);
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;

  auto evaluate = [&](const std::vector<double>& x) {
    const double f = score_fn(x, out.trace.size());
    track_best(out, x, f);
    out.trace.push_back({x, f});
    inputs.push_back(x);
    targets.push_back(f);
  };

  const int n_init = std::min(std::max(2, params.n_init), budget);
  for (int i = 0; i < n_init; ++i) {
    std::vector<double> x(dim);
    for (auto& v : x) v = init_rng.uniform01();
    evaluate(x);
  }

  GpModel model;
  while (static_cast<int>(out.trace.size()) < budget) {
    model.fit(inputs, targets, params.fit, fit_rng);
    ProposeOptions popts = params.propose;
    popts.n_candidates = std::min(popts.n_candidates,
                                  budget - static_cast<int>(out.trace.size()));
    const auto candidates = propose(model, params.beta, dim, popts, acq_rng);
    for (const auto& c : candidates) evaluate(c);
    if (candidates.empty()) {
      // Degenerate proposal; spend the remaining budget uniformly.
      std::vector<double> x(dim);
      for (auto& v : x) v = init_rng.uniform01();
      evaluate(x);
    }
  }
  return out;
}

}  // namespace labo
