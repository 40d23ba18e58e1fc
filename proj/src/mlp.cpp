#include "labo/nn/mlp.hpp"

#include <cmath>

#include "labo/core/errors.hpp"

namespace labo {

void linear_forward(const double* w, const double* b, const double* x, double* y, std::size_t rows,
                    std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

namespace {

ParamGroup make_group(std::initializer_list<std::pair<std::size_t, std::size_t>> shapes) {
  ParamGroup g;
  std::size_t off = 0;
  for (const auto& [rows, cols] : shapes) {
    g.tensors.push_back({off, rows, cols});
    off += rows * (cols == 0 ? 1 : cols);
  }
  g.values.assign(off, 0.0);
  return g;
}

void init_group(ParamGroup& g, RngStream& rng) {
  // He-style uniform: U(-sqrt(6/fan_in), sqrt(6/fan_in)) for weights, zero
  // biases. fan_in = cols for weight matrices.
  for (const auto& t : g.tensors) {
    double* p = g.values.data() + t.offset;
    if (t.cols == 0) {
      for (std::size_t i = 0; i < t.rows; ++i) p[i] = 0.0;
    } else {
      const double bound = std::sqrt(6.0 / static_cast<double>(t.cols));
      for (std::size_t i = 0; i < t.rows * t.cols; ++i) p[i] = rng.uniform(-bound, bound);
    }
  }
}

}  // namespace

RepModel::RepModel(const ArchDescriptor& arch) : arch_(arch) {
  const auto d = static_cast<std::size_t>(arch.input_dim);
  const auto h = static_cast<std::size_t>(arch.hidden);
  const auto l = static_cast<std::size_t>(arch.latent);
  const auto p = static_cast<std::size_t>(arch.n_tasks);
  enc_ = make_group({{h, d}, {h, 0}, {h, h}, {h, 0}, {l, h}, {l, 0}, {l, h}, {l, 0}});
  dec_ = make_group({{h, l}, {h, 0}, {d, h}, {d, 0}});
  pred_ = make_group({{h, l}, {h, 0}, {p, h}, {p, 0}});
}

void RepModel::initialize(std::uint64_t seed) {
  RngStream enc_rng = derive_stream(seed, "init-encoder");
  RngStream dec_rng = derive_stream(seed, "init-decoder");
  RngStream pred_rng = derive_stream(seed, "init-predictor");
  init_group(enc_, enc_rng);
  init_group(dec_, dec_rng);
  init_group(pred_, pred_rng);
}

void RepModel::encode(const std::vector<double>& theta, std::vector<double>* mu,
                      std::vector<double>* sigma) const {
  const auto d = static_cast<std::size_t>(arch_.input_dim);
  const auto h = static_cast<std::size_t>(arch_.hidden);
  const auto l = static_cast<std::size_t>(arch_.latent);
  if (theta.size() != d) {
    throw ShapeMismatch("encode: input width " + std::to_string(theta.size()));
  }
  std::vector<double> h1(h), h2(h);
  linear_forward(enc_.at(kEncW1), enc_.at(kEncB1), theta.data(), h1.data(), h, d);
  for (auto& v : h1) v = v > 0.0 ? v : 0.0;
  linear_forward(enc_.at(kEncW2), enc_.at(kEncB2), h1.data(), h2.data(), h, h);
  for (auto& v : h2) v = v > 0.0 ? v : 0.0;
  mu->assign(l, 0.0);
  sigma->assign(l, 0.0);
  linear_forward(enc_.at(kEncWMu), enc_.at(kEncBMu), h2.data(), mu->data(), l, h);
  std::vector<double> log_sigma(l);
  linear_forward(enc_.at(kEncWLs), enc_.at(kEncBLs), h2.data(), log_sigma.data(), l, h);
  for (std::size_t i = 0; i < l; ++i) (*sigma)[i] = std::exp(log_sigma[i]);
}

LatentCode RepModel::sample_latent(const std::vector<double>& mu, const std::vector<double>& sigma,
                                   const std::vector<double>& epsilon) {
  if (mu.size() != sigma.size() || mu.size() != epsilon.size()) {
    throw ShapeMismatch("sample_latent: mismatched widths");
  }
  LatentCode code;
  code.mu = mu;
  code.sigma = sigma;
  code.z.resize(mu.size());
  code.f.resize(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw NonPositiveSigma("sigma must be positive");
    code.z[i] = mu[i] + sigma[i] * epsilon[i];
    code.f[i] = sigmoid(code.z[i]);
  }
  return code;
}

std::vector<double> RepModel::decode_latent(const std::vector<double>& f) const {
  const auto d = static_cast<std::size_t>(arch_.input_dim);
  const auto h = static_cast<std::size_t>(arch_.hidden);
  const auto l = static_cast<std::size_t>(arch_.latent);
  if (f.size() != l) throw ShapeMismatch("decode_latent: input width " + std::to_string(f.size()));
  std::vector<double> g1(h), out(d);
  linear_forward(dec_.at(kDecW1), dec_.at(kDecB1), f.data(), g1.data(), h, l);
  for (auto& v : g1) v = v > 0.0 ? v : 0.0;
  linear_forward(dec_.at(kDecW2), dec_.at(kDecB2), g1.data(), out.data(), d, h);
  for (auto& v : out) v = sigmoid(v);
  return out;
}

std::vector<double> RepModel::predict_success(const std::vector<double>& f) const {
  const auto p = static_cast<std::size_t>(arch_.n_tasks);
  const auto h = static_cast<std::size_t>(arch_.hidden);
  const auto l = static_cast<std::size_t>(arch_.latent);
  if (f.size() != l) {
    throw ShapeMismatch("predict_success: input width " + std::to_string(f.size()));
  }
  std::vector<double> q1(h), out(p);
  linear_forward(pred_.at(kPredW1), pred_.at(kPredB1), f.data(), q1.data(), h, l);
  for (auto& v : q1) v = v > 0.0 ? v : 0.0;
  linear_forward(pred_.at(kPredW2), pred_.at(kPredB2), q1.data(), out.data(), p, h);
  for (auto& v : out) v = sigmoid(v);
  return out;
}

std::vector<double> RepModel::encode_deterministic(const std::vector<double>& theta) const {
  std::vector<double> mu, sigma;
  encode(theta, &mu, &sigma);
  std::vector<double> f(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) f[i] = sigmoid(mu[i]);
  return f;
}

}  // namespace labo
