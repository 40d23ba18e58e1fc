#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "labo/core/rng.hpp"

namespace labo {

// Fixed architecture from the representation module: encoder
// 185 -> 100 -> 100 -> (32 mu + 32 log sigma), decoder 32 -> 100 -> 185 with
// a sigmoid head, predictor 32 -> 100 -> n_tasks with a sigmoid head. Hidden
// activations are ReLU. Only n_tasks is configurable.
struct ArchDescriptor {
  int input_dim = 185;
  int hidden = 100;
  int latent = 32;
  int n_tasks = 160;

  bool operator==(const ArchDescriptor&) const = default;
};

// One flat parameter array per network group (encoder / decoder /
// predictor), with (rows x cols) weight blocks followed by bias blocks.
struct TensorRef {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;  // 0 marks a bias vector

  std::size_t size() const { return rows * (cols == 0 ? 1 : cols); }
};

struct ParamGroup {
  std::vector<double> values;
  std::vector<TensorRef> tensors;

  double* at(int tensor) { return values.data() + tensors[tensor].offset; }
  const double* at(int tensor) const { return values.data() + tensors[tensor].offset; }
};

struct LatentCode {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> z;
  std::vector<double> f;  // sigmoid(z), in (0,1)
};

// Encoder/decoder/predictor parameters plus the forward passes. Backward
// passes live in losses.cpp next to the loss definitions.
class RepModel {
 public:
  // Tensor indices within each group.
  enum Enc { kEncW1, kEncB1, kEncW2, kEncB2, kEncWMu, kEncBMu, kEncWLs, kEncBLs };
  enum Dec { kDecW1, kDecB1, kDecW2, kDecB2 };
  enum Pred { kPredW1, kPredB1, kPredW2, kPredB2 };

  explicit RepModel(const ArchDescriptor& arch = {});

  const ArchDescriptor& arch() const { return arch_; }
  ParamGroup& encoder() { return enc_; }
  ParamGroup& decoder() { return dec_; }
  ParamGroup& predictor() { return pred_; }
  const ParamGroup& encoder() const { return enc_; }
  const ParamGroup& decoder() const { return dec_; }
  const ParamGroup& predictor() const { return pred_; }

  // Uniform fan-in (He-style) initialization, seed-deterministic.
  void initialize(std::uint64_t seed);

  // theta -> (mu, sigma). Throws ShapeMismatch on a wrong input width.
  void encode(const std::vector<double>& theta, std::vector<double>* mu,
              std::vector<double>* sigma) const;

  // z = mu + sigma * eps, f = sigmoid(z).
  static LatentCode sample_latent(const std::vector<double>& mu, const std::vector<double>& sigma,
                                  const std::vector<double>& epsilon);

  // f -> theta_hat in (0,1)^input_dim.
  std::vector<double> decode_latent(const std::vector<double>& f) const;

  // f -> p_hat in (0,1)^n_tasks.
  std::vector<double> predict_success(const std::vector<double>& f) const;

  // Deterministic latent of a design: f = sigmoid(mu), no epsilon draw.
  std::vector<double> encode_deterministic(const std::vector<double>& theta) const;

  std::size_t total_params() const { return enc_.values.size() + dec_.values.size() + pred_.values.size(); }

 private:
  ArchDescriptor arch_;
  ParamGroup enc_, dec_, pred_;
};

// y = W x + b; W is rows x cols row-major.
void linear_forward(const double* w, const double* b, const double* x, double* y, std::size_t rows,
                    std::size_t cols);
inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace labo
