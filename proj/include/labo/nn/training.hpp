#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "labo/core/rng.hpp"
#include "labo/nn/losses.hpp"
#include "labo/nn/mlp.hpp"

namespace labo {

struct AdamParams {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment state for one parameter group. Groups keep separate
// states (and step counters) because the two fine-tuning phases update
// different subsets of networks.
struct AdamState {
  std::vector<double> m, v;
  long long t = 0;

  void resize(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
  }
};

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamParams& hp);

struct TrainOptions {
  int batch_size = 32;
  AdamParams adam;
  LossOptions loss;
};

// Optimizer state across the three networks, serialized in checkpoints.
struct TrainerState {
  AdamState enc, dec, pred;

  void resize_for(const RepModel& m) {
    enc.resize(m.encoder().values.size());
    dec.resize(m.decoder().values.size());
    pred.resize(m.predictor().values.size());
  }
};

struct TrainLogEntry {
  long long step = 0;
  double loss = 0.0;
};

// VAE pretraining on unlabeled vectors: n_steps minibatch steps updating
// encoder + decoder. Batches and epsilons are drawn from the two streams.
// Every logged loss must be finite; divergence throws.
std::vector<TrainLogEntry> pretrain(RepModel& model, TrainerState& state,
                                    const std::vector<std::vector<double>>& dataset, int n_steps,
                                    const TrainOptions& opts, RngStream& batch_rng,
                                    RngStream& eps_rng, LossWorkspace* ws = nullptr,
                                    int log_every = 1000);

// One fine-tuning phase of the optimization loop: n_steps/2 labeled steps on
// the evaluated designs (encoder, decoder, predictor), then n_steps/2
// pretraining steps on the unlabeled set (encoder, decoder).
void finetune(RepModel& model, TrainerState& state, const std::vector<LabeledDesign>& labeled,
              const std::vector<std::vector<double>>& dataset, int n_steps,
              const TrainOptions& opts, RngStream& batch_rng, RngStream& eps_rng,
              LossWorkspace* ws = nullptr);

// Versioned binary checkpoint: architecture, flat parameters, Adam moments.
void save_checkpoint(const RepModel& model, const TrainerState& state, const std::string& path);
void load_checkpoint(RepModel* model, TrainerState* state, const std::string& path);
std::uint64_t file_content_hash(const std::string& path);

}  // namespace labo
