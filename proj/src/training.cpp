#include "labo/nn/training.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "labo/core/errors.hpp"
#include "labo/core/hash.hpp"

namespace labo {

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamParams& hp) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeMismatch("adam_step: mismatched sizes");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

namespace {

std::vector<std::vector<double>> draw_epsilons(RngStream& rng, int batch, int latent) {
  std::vector<std::vector<double>> eps(batch, std::vector<double>(latent));
  for (auto& e : eps) {
    for (auto& v : e) v = rng.gaussian();
  }
  return eps;
}

void check_finite(double loss, long long step) {
  if (!std::isfinite(loss)) {
    throw Error("training diverged at step " + std::to_string(step));
  }
}

}  // namespace

std::vector<TrainLogEntry> pretrain(RepModel& model, TrainerState& state,
                                    const std::vector<std::vector<double>>& dataset, int n_steps,
                                    const TrainOptions& opts, RngStream& batch_rng,
                                    RngStream& eps_rng, LossWorkspace* ws, int log_every) {
  if (dataset.empty()) throw EmptyDataset("pretrain: empty dataset");
  std::vector<TrainLogEntry> log;
  Gradients grads;
  std::vector<std::vector<double>> batch(opts.batch_size);
  for (int step = 0; step < n_steps; ++step) {
    for (auto& b : batch) b = dataset[batch_rng.index(dataset.size())];
    const auto eps = draw_epsilons(eps_rng, opts.batch_size, model.arch().latent);
    const double loss = loss_pretrain(model, batch, eps, opts.loss, &grads, ws);
    check_finite(loss, step);
    adam_step(model.encoder().values, grads.enc, state.enc, opts.adam);
    adam_step(model.decoder().values, grads.dec, state.dec, opts.adam);
    if (log_every > 0 && (step % log_every == 0 || step + 1 == n_steps)) {
      log.push_back({step, loss});
    }
  }
  return log;
}

void finetune(RepModel& model, TrainerState& state, const std::vector<LabeledDesign>& labeled,
              const std::vector<std::vector<double>>& dataset, int n_steps,
              const TrainOptions& opts, RngStream& batch_rng, RngStream& eps_rng,
              LossWorkspace* ws) {
  if (labeled.empty()) throw EmptyDataset("finetune: no labeled designs");
  if (dataset.empty()) throw EmptyDataset("finetune: empty pretraining dataset");

  const int n_labeled_steps = n_steps / 2;
  const int n_pretrain_steps = n_steps - n_labeled_steps;
  Gradients grads;

  std::vector<LabeledDesign> batch(opts.batch_size);
  for (int step = 0; step < n_labeled_steps; ++step) {
    for (auto& b : batch) b = labeled[batch_rng.index(labeled.size())];
    const auto eps = draw_epsilons(eps_rng, opts.batch_size, model.arch().latent);
    const double loss = loss_rep(model, batch, eps, opts.loss, &grads, ws);
    check_finite(loss, step);
    adam_step(model.encoder().values, grads.enc, state.enc, opts.adam);
    adam_step(model.decoder().values, grads.dec, state.dec, opts.adam);
    adam_step(model.predictor().values, grads.pred, state.pred, opts.adam);
  }

  std::vector<std::vector<double>> pre_batch(opts.batch_size);
  for (int step = 0; step < n_pretrain_steps; ++step) {
    for (auto& b : pre_batch) b = dataset[batch_rng.index(dataset.size())];
    const auto eps = draw_epsilons(eps_rng, opts.batch_size, model.arch().latent);
    const double loss = loss_pretrain(model, pre_batch, eps, opts.loss, &grads, ws);
    check_finite(loss, step);
    adam_step(model.encoder().values, grads.enc, state.enc, opts.adam);
    adam_step(model.decoder().values, grads.dec, state.dec, opts.adam);
  }
}

namespace {

constexpr char kMagic[8] = {'L', 'A', 'B', 'O', 'C', 'K', 'P', '1'};

void write_vec(std::ofstream& out, const std::vector<double>& v) {
  const std::uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_vec(std::ifstream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw Error("checkpoint truncated");
  return v;
}

void write_adam(std::ofstream& out, const AdamState& s) {
  write_vec(out, s.m);
  write_vec(out, s.v);
  out.write(reinterpret_cast<const char*>(&s.t), sizeof(s.t));
}

void read_adam(std::ifstream& in, AdamState* s) {
  s->m = read_vec(in);
  s->v = read_vec(in);
  in.read(reinterpret_cast<char*>(&s->t), sizeof(s->t));
}

}  // namespace

void save_checkpoint(const RepModel& model, const TrainerState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const auto& a = model.arch();
  const std::int32_t arch[4] = {a.input_dim, a.hidden, a.latent, a.n_tasks};
  out.write(reinterpret_cast<const char*>(arch), sizeof(arch));
  write_vec(out, model.encoder().values);
  write_vec(out, model.decoder().values);
  write_vec(out, model.predictor().values);
  write_adam(out, state.enc);
  write_adam(out, state.dec);
  write_adam(out, state.pred);
}

void load_checkpoint(RepModel* model, TrainerState* state, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw SchemaMismatch("bad checkpoint magic in " + path);
  }
  std::int32_t arch[4];
  in.read(reinterpret_cast<char*>(arch), sizeof(arch));
  ArchDescriptor a{arch[0], arch[1], arch[2], arch[3]};
  *model = RepModel(a);
  model->encoder().values = read_vec(in);
  model->decoder().values = read_vec(in);
  model->predictor().values = read_vec(in);
  read_adam(in, &state->enc);
  read_adam(in, &state->dec);
  read_adam(in, &state->pred);
  if (!in) throw Error("checkpoint truncated: " + path);
}

std::uint64_t file_content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash missing file: " + path);
  Fnv1a64 h;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.digest();
}

}  // namespace labo
