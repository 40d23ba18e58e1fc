#include "labo/gp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labo/core/errors.hpp"

namespace labo {

namespace {

double sq_distance(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kSqrt5 = 2.2360679774997896964;

double matern_r(double r, double alpha, double nu) {
  if (nu == 0.5) return alpha * std::exp(-r);
  if (nu == 1.5) return alpha * (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
  if (nu == 2.5) return alpha * (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
  throw UnsupportedSmoothness("matern: nu must be 0.5, 1.5 or 2.5");
}

// d k / d log(ell) at scaled distance r (note d r / d log ell = -r).
double matern_dlogell(double r, double alpha, double nu) {
  if (nu == 0.5) return alpha * r * std::exp(-r);
  if (nu == 1.5) return alpha * 3.0 * r * r * std::exp(-kSqrt3 * r);
  if (nu == 2.5) return alpha * (5.0 * r * r / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
  throw UnsupportedSmoothness("matern: nu must be 0.5, 1.5 or 2.5");
}

}  // namespace

double matern_kernel(const std::vector<double>& x, const std::vector<double>& y,
                     const GpHyper& hyper) {
  if (x.size() != y.size()) throw ShapeMismatch("matern_kernel: mismatched widths");
  const double r = std::sqrt(sq_distance(x, y)) / hyper.lengthscale();
  return matern_r(r, hyper.output_scale(), hyper.nu);
}

double GpModel::log_marginal_likelihood(const std::vector<std::vector<double>>& inputs,
                                        const std::vector<double>& std_targets,
                                        const GpHyper& hyper, double jitter) {
  const int n = static_cast<int>(inputs.size());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double k = matern_kernel(inputs[i], inputs[j], hyper);
      K(i, j) = k;
      K(j, i) = k;
    }
    K(i, i) += hyper.noise_variance() + jitter;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  Eigen::Map<const Eigen::VectorXd> y(std_targets.data(), n);
  const Eigen::VectorXd alpha = llt.solve(y);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
  logdet *= 2.0;
  return -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * n * std::log(2.0 * 3.14159265358979323846);
}

void GpModel::factorize(const GpHyper& hyper) {
  const int n = static_cast<int>(inputs_.size());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double k = matern_kernel(inputs_[i], inputs_[j], hyper);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  // Jitter escalation: 1e-6 up to 1e-2 relative to the signal scale.
  double jitter = 1e-6 * hyper.output_scale();
  const double jitter_cap = 1e-2 * hyper.output_scale();
  while (true) {
    Eigen::MatrixXd Kj = K;
    for (int i = 0; i < n; ++i) Kj(i, i) += hyper.noise_variance() + jitter;
    llt_.compute(Kj);
    if (llt_.info() == Eigen::Success) break;
    jitter *= 10.0;
    if (jitter > jitter_cap) {
      throw SingularGram("Gram matrix not positive definite after max jitter");
    }
  }
  jitter_used_ = jitter;
  Eigen::Map<const Eigen::VectorXd> y(std_targets_.data(), n);
  alpha_ = llt_.solve(y);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(llt_.matrixL()(i, i));
  logdet *= 2.0;
  log_marginal_ =
      -0.5 * y.dot(alpha_) - 0.5 * logdet - 0.5 * n * std::log(2.0 * 3.14159265358979323846);
  hyper_ = hyper;
}

void GpModel::fit(const std::vector<std::vector<double>>& inputs,
                  const std::vector<double>& targets, const GpFitOptions& opts, RngStream& rng) {
  if (inputs.size() < 2) throw Error("fit: need at least 2 observations");
  if (inputs.size() != targets.size()) throw ShapeMismatch("fit: inputs/targets length mismatch");

  inputs_ = inputs;
  const int n = static_cast<int>(inputs.size());

  // Standardize targets; the floor keeps constant targets well-posed.
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= n;
  double var = 0.0;
  for (double t : targets) var += (t - mean) * (t - mean);
  var /= n;
  y_mean_ = mean;
  y_std_ = std::max(std::sqrt(var), 1e-8);
  std_targets_.resize(n);
  for (int i = 0; i < n; ++i) std_targets_[i] = (targets[i] - mean) / y_std_;

  // Gradient ascent on the log marginal likelihood over the three log
  // hyperparameters, with random restarts; the best run wins.
  const double jitter = 1e-8;
  auto lml_and_grad = [&](const GpHyper& h, Eigen::Vector3d* grad) -> double {
    Eigen::MatrixXd K(n, n), Kf(n, n), dKdl(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double r = std::sqrt(sq_distance(inputs_[i], inputs_[j])) / h.lengthscale();
        const double kf = matern_r(r, h.output_scale(), h.nu);
        Kf(i, j) = Kf(j, i) = kf;
        dKdl(i, j) = dKdl(j, i) = matern_dlogell(r, h.output_scale(), h.nu);
        K(i, j) = K(j, i) = kf;
      }
      K(i, i) += h.noise_variance() + jitter;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) {
      if (grad) grad->setZero();
      return -std::numeric_limits<double>::infinity();
    }
    Eigen::Map<const Eigen::VectorXd> y(std_targets_.data(), n);
    const Eigen::VectorXd a = llt.solve(y);
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
    logdet *= 2.0;
    const double lml =
        -0.5 * y.dot(a) - 0.5 * logdet - 0.5 * n * std::log(2.0 * 3.14159265358979323846);
    if (grad) {
      const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
      const Eigen::MatrixXd W = a * a.transpose() - Kinv;  // d lml = 0.5 tr(W dK)
      (*grad)[0] = 0.5 * (W.cwiseProduct(Kf)).sum();
      (*grad)[1] = 0.5 * (W.cwiseProduct(dKdl)).sum();
      (*grad)[2] = 0.5 * W.trace() * h.noise_variance();
    }
    return lml;
  };

  GpHyper best_h;
  best_h.nu = opts.nu;
  double best_lml = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    GpHyper h;
    h.nu = opts.nu;
    if (restart == 0) {
      // Deterministic sensible start: unit signal, median-ish lengthscale.
      h.log_output_scale = 0.0;
      h.log_lengthscale = std::log(std::max(0.3, std::sqrt(static_cast<double>(inputs[0].size())) * 0.3));
      h.log_noise = std::log(1e-3);
    } else {
      h.log_output_scale = rng.uniform(std::log(0.3), std::log(3.0));
      h.log_lengthscale = rng.uniform(std::log(0.05), std::log(8.0));
      h.log_noise = rng.uniform(std::log(1e-5), std::log(1e-1));
    }

    Eigen::Vector3d grad;
    double lml = lml_and_grad(h, &grad);
    double step = 0.1;
    for (int it = 0; it < opts.ascent_steps; ++it) {
      if (!std::isfinite(lml)) break;
      GpHyper trial = h;
      bool improved = false;
      for (int back = 0; back < 10; ++back) {
        trial.log_output_scale = std::clamp(h.log_output_scale + step * grad[0], -6.0, 6.0);
        trial.log_lengthscale = std::clamp(h.log_lengthscale + step * grad[1], -5.0, 5.0);
        trial.log_noise = std::clamp(h.log_noise + step * grad[2], std::log(1e-8), std::log(1.0));
        const double trial_lml = lml_and_grad(trial, nullptr);
        if (trial_lml > lml) {
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
      h = trial;
      lml = lml_and_grad(h, &grad);
      step = std::min(step * 1.5, 1.0);
    }
    if (lml > best_lml) {
      best_lml = lml;
      best_h = h;
      have_best = true;
    }
  }
  if (!have_best) throw SingularGram("fit: no hyperparameter setting produced a valid factor");

  factorize(best_h);
  fitted_ = true;
}

Posterior GpModel::posterior(const std::vector<double>& x) const {
  if (!fitted_) throw UnfittedModel("posterior: model not fitted");
  const int n = static_cast<int>(inputs_.size());
  Eigen::VectorXd ks(n);
  for (int i = 0; i < n; ++i) ks[i] = matern_kernel(inputs_[i], x, hyper_);
  const double mean_std = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  const double prior = matern_kernel(x, x, hyper_);
  const double var_std = std::max(0.0, prior - v.squaredNorm());
  Posterior p;
  p.mean = y_mean_ + y_std_ * mean_std;
  p.stddev = y_std_ * std::sqrt(var_std);
  return p;
}

double GpModel::prior_variance() const {
  if (!fitted_) throw UnfittedModel("prior_variance: model not fitted");
  return y_std_ * y_std_ * hyper_.output_scale();
}

}  // namespace labo
