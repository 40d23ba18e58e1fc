#pragma once

#include <vector>

#include "labo/nn/mlp.hpp"

namespace labo {

enum class KlDirection {
  kPaper,     // D_KL(N(0,I) || N(mu,sigma)): sum log s + (1+m^2)/(2 s^2) - 1/2
  kStandard,  // D_KL(N(mu,sigma) || N(0,I)): sum (s^2 + m^2 - 1)/2 - log s
};

struct LabeledDesign {
  std::vector<double> theta;
  std::vector<double> p;  // per-task success labels in {0,1}
  double F = 0.0;
};

inline constexpr double kCeClamp = 1e-7;  // predictions clamp to [eps, 1-eps]

double kl_term(const std::vector<double>& mu, const std::vector<double>& sigma,
               KlDirection dir = KlDirection::kPaper);

struct LossOptions {
  KlDirection kl_direction = KlDirection::kPaper;
  double kl_weight = 1.0;
};

struct Gradients {
  std::vector<double> enc, dec, pred;

  void resize_for(const RepModel& m);
  void zero();
};

// Reusable per-sample gradient slots so batched losses stay allocation-free
// in the training loop and bitwise-deterministic under OpenMP (parallel
// compute into disjoint slots, serial ordered reduction).
struct LossWorkspace {
  std::vector<double> enc, dec, pred;  // batch x group, concatenated
  std::vector<double> losses;
};

// Mean over the batch of (1/d)||theta - theta_hat||^2 + w_kl * KL. One
// epsilon vector per sample; gradients (optional) cover encoder + decoder.
double loss_pretrain(const RepModel& model, const std::vector<std::vector<double>>& thetas,
                     const std::vector<std::vector<double>>& epsilons, const LossOptions& opts,
                     Gradients* grads = nullptr, LossWorkspace* ws = nullptr);

// Pretrain loss plus the per-dimension binary cross entropy against the
// task-success labels; gradients cover all three networks.
double loss_rep(const RepModel& model, const std::vector<LabeledDesign>& batch,
                const std::vector<std::vector<double>>& epsilons, const LossOptions& opts,
                Gradients* grads = nullptr, LossWorkspace* ws = nullptr);

// Closed-form loss pieces on explicit intermediates; the batched losses are
// built from these and the unit tests pin them directly.
double reconstruction_term(const std::vector<double>& theta, const std::vector<double>& theta_hat);
double cross_entropy_term(const std::vector<double>& p, const std::vector<double>& p_hat);

// Mean reconstruction error (1/d)||theta - theta_hat||^2 over a dataset with
// the deterministic latent f = sigmoid(mu).
double reconstruction_mse(const RepModel& model, const std::vector<std::vector<double>>& thetas);

}  // namespace labo
