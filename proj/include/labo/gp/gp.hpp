#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "labo/core/rng.hpp"

namespace labo {

// Half-integer Matern kernels in closed form. The general Bessel form is out
// of scope; nu = 2.5 is the default.
struct GpHyper {
  double log_output_scale = 0.0;  // log alpha
  double log_lengthscale = 0.0;   // log ell
  double log_noise = std::log(1e-4);  // log sigma_n^2
  double nu = 2.5;                // one of 0.5, 1.5, 2.5

  double output_scale() const { return std::exp(log_output_scale); }
  double lengthscale() const { return std::exp(log_lengthscale); }
  double noise_variance() const { return std::exp(log_noise); }
};

double matern_kernel(const std::vector<double>& x, const std::vector<double>& y,
                     const GpHyper& hyper);

struct GpFitOptions {
  int restarts = 4;
  int ascent_steps = 60;
  double nu = 2.5;
  double jitter_initial = 1e-6;
  double jitter_max = 1e-2;
};

struct Posterior {
  double mean = 0.0;
  double stddev = 0.0;
};

// Exact GP regression with internally standardized targets. fit() maximizes
// the log marginal likelihood over (log alpha, log ell, log noise) by
// gradient ascent with random restarts; the Cholesky factor is cached and
// invalidated by refits.
class GpModel {
 public:
  void fit(const std::vector<std::vector<double>>& inputs, const std::vector<double>& targets,
           const GpFitOptions& opts, RngStream& rng);

  Posterior posterior(const std::vector<double>& x) const;

  bool fitted() const { return fitted_; }
  const GpHyper& hyper() const { return hyper_; }
  double log_marginal() const { return log_marginal_; }
  double prior_variance() const;  // de-standardized alpha
  double jitter_used() const { return jitter_used_; }
  std::size_t size() const { return inputs_.size(); }

  // Log marginal likelihood of standardized targets under given hypers
  // (exposed for tests).
  static double log_marginal_likelihood(const std::vector<std::vector<double>>& inputs,
                                        const std::vector<double>& std_targets,
                                        const GpHyper& hyper, double jitter);

 private:
  void factorize(const GpHyper& hyper);

  std::vector<std::vector<double>> inputs_;
  std::vector<double> std_targets_;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  GpHyper hyper_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // (K + s2 I)^-1 y
  double log_marginal_ = 0.0;
  double jitter_used_ = 0.0;
  bool fitted_ = false;
};

}  // namespace labo
