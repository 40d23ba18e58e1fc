#include "labo/nn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "labo/core/errors.hpp"
#include "labo/core/parallel.hpp"

namespace labo {

double kl_term(const std::vector<double>& mu, const std::vector<double>& sigma, KlDirection dir) {
  if (mu.size() != sigma.size()) throw ShapeMismatch("kl_term: mismatched widths");
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = sigma[i];
    if (!(s > 0.0)) throw NonPositiveSigma("kl_term: sigma must be positive");
    const double m = mu[i];
    if (dir == KlDirection::kPaper) {
      kl += std::log(s) + (1.0 + m * m) / (2.0 * s * s) - 0.5;
    } else {
      kl += (s * s + m * m - 1.0) / 2.0 - std::log(s);
    }
  }
  return kl;
}

double reconstruction_term(const std::vector<double>& theta,
                           const std::vector<double>& theta_hat) {
  if (theta.size() != theta_hat.size()) throw ShapeMismatch("reconstruction: mismatched widths");
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = theta[i] - theta_hat[i];
    acc += d * d;
  }
  return acc / static_cast<double>(theta.size());
}

double cross_entropy_term(const std::vector<double>& p, const std::vector<double>& p_hat) {
  if (p.size() != p_hat.size()) throw ShapeMismatch("cross entropy: mismatched widths");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p_hat[i], kCeClamp, 1.0 - kCeClamp);
    acc += -p[i] * std::log(q) - (1.0 - p[i]) * std::log(1.0 - q);
  }
  return acc;
}

void Gradients::resize_for(const RepModel& m) {
  enc.assign(m.encoder().values.size(), 0.0);
  dec.assign(m.decoder().values.size(), 0.0);
  pred.assign(m.predictor().values.size(), 0.0);
}

void Gradients::zero() {
  std::fill(enc.begin(), enc.end(), 0.0);
  std::fill(dec.begin(), dec.end(), 0.0);
  std::fill(pred.begin(), pred.end(), 0.0);
}

namespace {

// delta_out (rows) through y = Wx+b: accumulates dW, db and returns
// delta_x = W^T delta_out.
void linear_backward(const double* w, const double* x, const double* delta_out, double* dw,
                     double* db, double* delta_x, std::size_t rows, std::size_t cols) {
  if (delta_x) std::fill(delta_x, delta_x + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = delta_out[r];
    db[r] += d;
    double* dwr = dw + r * cols;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      dwr[c] += d * x[c];
      if (delta_x) delta_x[c] += wr[c] * d;
    }
  }
}

struct SampleGrad {
  double* enc;
  double* dec;
  double* pred;  // may be null for the pretrain loss
};

// Forward + backward for one sample. labels == nullptr gives the pretrain
// loss. Gradients accumulate into the caller's slots (zeroed here).
double sample_loss_grad(const RepModel& model, const std::vector<double>& theta,
                        const std::vector<double>* labels, const std::vector<double>& eps,
                        const LossOptions& opts, const SampleGrad* grad) {
  const auto& arch = model.arch();
  const auto d = static_cast<std::size_t>(arch.input_dim);
  const auto h = static_cast<std::size_t>(arch.hidden);
  const auto l = static_cast<std::size_t>(arch.latent);
  const auto np = static_cast<std::size_t>(arch.n_tasks);
  if (theta.size() != d) throw ShapeMismatch("loss: theta width");
  if (eps.size() != l) throw ShapeMismatch("loss: epsilon width");

  const auto& E = model.encoder();
  const auto& D = model.decoder();
  const auto& P = model.predictor();

  // Encoder forward, keeping pre-activations for the ReLU masks.
  std::vector<double> a1(h), h1(h), a2(h), h2(h), mu(l), ls(l), sigma(l), z(l), f(l);
  linear_forward(E.at(RepModel::kEncW1), E.at(RepModel::kEncB1), theta.data(), a1.data(), h, d);
  for (std::size_t i = 0; i < h; ++i) h1[i] = a1[i] > 0.0 ? a1[i] : 0.0;
  linear_forward(E.at(RepModel::kEncW2), E.at(RepModel::kEncB2), h1.data(), a2.data(), h, h);
  for (std::size_t i = 0; i < h; ++i) h2[i] = a2[i] > 0.0 ? a2[i] : 0.0;
  linear_forward(E.at(RepModel::kEncWMu), E.at(RepModel::kEncBMu), h2.data(), mu.data(), l, h);
  linear_forward(E.at(RepModel::kEncWLs), E.at(RepModel::kEncBLs), h2.data(), ls.data(), l, h);
  for (std::size_t i = 0; i < l; ++i) {
    sigma[i] = std::exp(ls[i]);
    z[i] = mu[i] + sigma[i] * eps[i];
    f[i] = sigmoid(z[i]);
  }

  // Decoder forward.
  std::vector<double> b1(h), g1(h), b2(d), theta_hat(d);
  linear_forward(D.at(RepModel::kDecW1), D.at(RepModel::kDecB1), f.data(), b1.data(), h, l);
  for (std::size_t i = 0; i < h; ++i) g1[i] = b1[i] > 0.0 ? b1[i] : 0.0;
  linear_forward(D.at(RepModel::kDecW2), D.at(RepModel::kDecB2), g1.data(), b2.data(), d, h);
  for (std::size_t i = 0; i < d; ++i) theta_hat[i] = sigmoid(b2[i]);

  double loss = reconstruction_term(theta, theta_hat);

  // KL term.
  double kl = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    const double m = mu[i], s = sigma[i];
    if (opts.kl_direction == KlDirection::kPaper) {
      kl += std::log(s) + (1.0 + m * m) / (2.0 * s * s) - 0.5;
    } else {
      kl += (s * s + m * m - 1.0) / 2.0 - std::log(s);
    }
  }
  loss += opts.kl_weight * kl;

  // Predictor forward (labeled loss only).
  std::vector<double> c1, q1, c2, p_hat;
  if (labels) {
    if (labels->size() != np) throw ShapeMismatch("loss: label width");
    c1.resize(h);
    q1.resize(h);
    c2.resize(np);
    p_hat.resize(np);
    linear_forward(P.at(RepModel::kPredW1), P.at(RepModel::kPredB1), f.data(), c1.data(), h, l);
    for (std::size_t i = 0; i < h; ++i) q1[i] = c1[i] > 0.0 ? c1[i] : 0.0;
    linear_forward(P.at(RepModel::kPredW2), P.at(RepModel::kPredB2), q1.data(), c2.data(), np, h);
    for (std::size_t i = 0; i < np; ++i) p_hat[i] = sigmoid(c2[i]);
    loss += cross_entropy_term(*labels, p_hat);
  }

  if (!grad) return loss;

  // Decoder backward.
  std::vector<double> delta_b2(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double dl_dthat = (2.0 / static_cast<double>(d)) * (theta_hat[i] - theta[i]);
    delta_b2[i] = dl_dthat * theta_hat[i] * (1.0 - theta_hat[i]);
  }
  std::vector<double> delta_g1(h), delta_b1(h), delta_f(l, 0.0);
  {
    double* dw2 = grad->dec + D.tensors[RepModel::kDecW2].offset;
    double* db2 = grad->dec + D.tensors[RepModel::kDecB2].offset;
    linear_backward(D.at(RepModel::kDecW2), g1.data(), delta_b2.data(), dw2, db2, delta_g1.data(),
                    d, h);
    for (std::size_t i = 0; i < h; ++i) delta_b1[i] = b1[i] > 0.0 ? delta_g1[i] : 0.0;
    double* dw1 = grad->dec + D.tensors[RepModel::kDecW1].offset;
    double* db1 = grad->dec + D.tensors[RepModel::kDecB1].offset;
    linear_backward(D.at(RepModel::kDecW1), f.data(), delta_b1.data(), dw1, db1, delta_f.data(), h,
                    l);
  }

  // Predictor backward adds its pull on f.
  if (labels && grad->pred) {
    std::vector<double> delta_c2(np), delta_q1(h), delta_c1(h), delta_f_pred(l);
    for (std::size_t i = 0; i < np; ++i) {
      const double q = p_hat[i];
      if (q <= kCeClamp || q >= 1.0 - kCeClamp) {
        delta_c2[i] = 0.0;  // clamped: locally constant
      } else {
        const double dce_dq = -(*labels)[i] / q + (1.0 - (*labels)[i]) / (1.0 - q);
        delta_c2[i] = dce_dq * q * (1.0 - q);
      }
    }
    double* pw2 = grad->pred + P.tensors[RepModel::kPredW2].offset;
    double* pb2 = grad->pred + P.tensors[RepModel::kPredB2].offset;
    linear_backward(P.at(RepModel::kPredW2), q1.data(), delta_c2.data(), pw2, pb2, delta_q1.data(),
                    np, h);
    for (std::size_t i = 0; i < h; ++i) delta_c1[i] = c1[i] > 0.0 ? delta_q1[i] : 0.0;
    double* pw1 = grad->pred + P.tensors[RepModel::kPredW1].offset;
    double* pb1 = grad->pred + P.tensors[RepModel::kPredB1].offset;
    linear_backward(P.at(RepModel::kPredW1), f.data(), delta_c1.data(), pw1, pb1,
                    delta_f_pred.data(), h, l);
    for (std::size_t i = 0; i < l; ++i) delta_f[i] += delta_f_pred[i];
  }

  // Through the reparameterized latent into the encoder heads.
  std::vector<double> delta_mu(l), delta_ls(l);
  for (std::size_t i = 0; i < l; ++i) {
    const double dz = delta_f[i] * f[i] * (1.0 - f[i]);
    const double m = mu[i], s = sigma[i];
    double dkl_dmu, dkl_dls;
    if (opts.kl_direction == KlDirection::kPaper) {
      dkl_dmu = m / (s * s);
      dkl_dls = 1.0 - (1.0 + m * m) / (s * s);
    } else {
      dkl_dmu = m;
      dkl_dls = s * s - 1.0;
    }
    delta_mu[i] = dz + opts.kl_weight * dkl_dmu;
    delta_ls[i] = dz * s * eps[i] + opts.kl_weight * dkl_dls;
  }

  std::vector<double> delta_h2(h, 0.0), tmp(h), delta_a2(h), delta_h1(h), delta_a1(h);
  {
    double* dwmu = grad->enc + E.tensors[RepModel::kEncWMu].offset;
    double* dbmu = grad->enc + E.tensors[RepModel::kEncBMu].offset;
    linear_backward(E.at(RepModel::kEncWMu), h2.data(), delta_mu.data(), dwmu, dbmu, delta_h2.data(),
                    l, h);
    double* dwls = grad->enc + E.tensors[RepModel::kEncWLs].offset;
    double* dbls = grad->enc + E.tensors[RepModel::kEncBLs].offset;
    linear_backward(E.at(RepModel::kEncWLs), h2.data(), delta_ls.data(), dwls, dbls, tmp.data(), l,
                    h);
    for (std::size_t i = 0; i < h; ++i) delta_h2[i] += tmp[i];
    for (std::size_t i = 0; i < h; ++i) delta_a2[i] = a2[i] > 0.0 ? delta_h2[i] : 0.0;
    double* dw2 = grad->enc + E.tensors[RepModel::kEncW2].offset;
    double* db2 = grad->enc + E.tensors[RepModel::kEncB2].offset;
    linear_backward(E.at(RepModel::kEncW2), h1.data(), delta_a2.data(), dw2, db2, delta_h1.data(),
                    h, h);
    for (std::size_t i = 0; i < h; ++i) delta_a1[i] = a1[i] > 0.0 ? delta_h1[i] : 0.0;
    double* dw1 = grad->enc + E.tensors[RepModel::kEncW1].offset;
    double* db1 = grad->enc + E.tensors[RepModel::kEncB1].offset;
    linear_backward(E.at(RepModel::kEncW1), theta.data(), delta_a1.data(), dw1, db1, nullptr, h, d);
  }
  return loss;
}

double batched_loss(const RepModel& model, const std::vector<const std::vector<double>*>& thetas,
                    const std::vector<const std::vector<double>*>& labels,
                    const std::vector<std::vector<double>>& epsilons, const LossOptions& opts,
                    Gradients* grads, LossWorkspace* ws, bool with_pred) {
  const std::size_t batch = thetas.size();
  if (batch == 0) throw EmptyDataset("loss: empty batch");
  if (epsilons.size() != batch) throw ShapeMismatch("loss: one epsilon per sample required");

  const std::size_t ne = model.encoder().values.size();
  const std::size_t nd = model.decoder().values.size();
  const std::size_t npred = model.predictor().values.size();

  LossWorkspace local;
  LossWorkspace* w = ws ? ws : &local;
  if (grads) {
    w->enc.assign(batch * ne, 0.0);
    w->dec.assign(batch * nd, 0.0);
    if (with_pred) w->pred.assign(batch * npred, 0.0);
  }
  w->losses.assign(batch, 0.0);

  parallel_for(batch, [&](std::size_t i) {
    SampleGrad slot{nullptr, nullptr, nullptr};
    SampleGrad* slot_ptr = nullptr;
    if (grads) {
      slot.enc = w->enc.data() + i * ne;
      slot.dec = w->dec.data() + i * nd;
      slot.pred = with_pred ? w->pred.data() + i * npred : nullptr;
      slot_ptr = &slot;
    }
    w->losses[i] =
        sample_loss_grad(model, *thetas[i], labels.empty() ? nullptr : labels[i], epsilons[i],
                         opts, slot_ptr);
  });

  double total = 0.0;
  for (double v : w->losses) total += v;
  const double inv = 1.0 / static_cast<double>(batch);

  if (grads) {
    grads->resize_for(model);
    // Ordered reduction keeps results bitwise-identical across thread counts.
    for (std::size_t i = 0; i < batch; ++i) {
      const double* ge = w->enc.data() + i * ne;
      for (std::size_t k = 0; k < ne; ++k) grads->enc[k] += ge[k];
      const double* gd = w->dec.data() + i * nd;
      for (std::size_t k = 0; k < nd; ++k) grads->dec[k] += gd[k];
      if (with_pred) {
        const double* gp = w->pred.data() + i * npred;
        for (std::size_t k = 0; k < npred; ++k) grads->pred[k] += gp[k];
      }
    }
    for (auto& v : grads->enc) v *= inv;
    for (auto& v : grads->dec) v *= inv;
    for (auto& v : grads->pred) v *= inv;
  }
  return total * inv;
}

}  // namespace

double loss_pretrain(const RepModel& model, const std::vector<std::vector<double>>& thetas,
                     const std::vector<std::vector<double>>& epsilons, const LossOptions& opts,
                     Gradients* grads, LossWorkspace* ws) {
  std::vector<const std::vector<double>*> t;
  t.reserve(thetas.size());
  for (const auto& th : thetas) t.push_back(&th);
  return batched_loss(model, t, {}, epsilons, opts, grads, ws, /*with_pred=*/false);
}

double loss_rep(const RepModel& model, const std::vector<LabeledDesign>& batch,
                const std::vector<std::vector<double>>& epsilons, const LossOptions& opts,
                Gradients* grads, LossWorkspace* ws) {
  std::vector<const std::vector<double>*> t, p;
  t.reserve(batch.size());
  p.reserve(batch.size());
  for (const auto& s : batch) {
    if (s.p.empty()) throw MissingLabels("loss_rep: design without success labels");
    t.push_back(&s.theta);
    p.push_back(&s.p);
  }
  return batched_loss(model, t, p, epsilons, opts, grads, ws, /*with_pred=*/true);
}

double reconstruction_mse(const RepModel& model, const std::vector<std::vector<double>>& thetas) {
  if (thetas.empty()) throw EmptyDataset("reconstruction_mse: empty dataset");
  std::vector<double> errs(thetas.size(), 0.0);
  parallel_for(thetas.size(), [&](std::size_t i) {
    const auto f = model.encode_deterministic(thetas[i]);
    const auto rec = model.decode_latent(f);
    errs[i] = reconstruction_term(thetas[i], rec);
  });
  double acc = 0.0;
  for (double e : errs) acc += e;
  return acc / static_cast<double>(thetas.size());
}

}  // namespace labo
