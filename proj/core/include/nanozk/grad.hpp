#pragma once

#include "nanozk/model.hpp"

namespace nanozk::nn {

// Gradient buffers mirroring the weight structure.
struct LayerGrads {
  Mat wq, wk, wv, wo, w1, w2;
  std::vector<double> norm1_gain, norm1_bias, norm2_gain, norm2_bias;
  double sq_norm() const;
};

struct Grads {
  Mat tok_emb, pos_emb;
  std::vector<LayerGrads> layers;
  std::vector<double> final_gain, final_bias;
  Mat lm_head;

  static Grads zeros_like(const Weights& w);
  void accumulate(const Grads& o, double scale = 1.0);
  double global_norm() const;
  void scale(double s);
};

// Reverse-mode gradients of the summed log-likelihood
// sum_t log p(targets[t] | tokens[<=t]) with respect to every weight tensor.
// Exact mode only; the lookup kernels are step functions.
Grads loglike_grad(const Weights& w, const std::vector<uint32_t>& tokens,
                   const std::vector<uint32_t>& targets);

// Same but also returns the (negative mean) loss, for training.
struct GradResult {
  Grads grads;       // d(sum log p)/dW
  double sum_logp = 0.0;
  uint64_t count = 0;
};
GradResult loglike_grad_with_loss(const Weights& w, const std::vector<uint32_t>& tokens,
                                  const std::vector<uint32_t>& targets);

}  // namespace nanozk::nn
