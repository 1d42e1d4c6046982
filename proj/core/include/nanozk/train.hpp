#pragma once

#include "nanozk/grad.hpp"
#include "nanozk/model.hpp"

namespace nanozk::nn {

struct TrainOptions {
  uint32_t steps = 500;
  uint32_t batch = 8;
  uint32_t window = 32;  // training context length (<= max_seq)
  double lr = 0.5;
  double clip_norm = 1.0;
  uint64_t seed = 1;
};

struct TrainResult {
  Weights weights;
  double initial_loss = 0.0;  // mean NLL on the first batch
  double final_loss = 0.0;    // mean NLL on the last step
};

// Plain SGD with global-norm gradient clipping; deterministic given the
// seed. Weights are snapped to the fixed-point grid afterwards so the exact
// and quantized pipelines agree on the underlying model. Throws
// std::runtime_error if the loss diverges to NaN.
TrainResult train_toy(const ModelConfig& cfg, const std::vector<uint32_t>& corpus,
                      const TrainOptions& opts);

// Deterministic pseudo-text: seeded syllable babble with word/sentence
// structure, enough statistical signal for a char model to learn.
std::vector<uint32_t> synth_corpus(size_t n_bytes, uint64_t seed);
std::string corpus_to_string(const std::vector<uint32_t>& corpus);
std::vector<uint32_t> corpus_from_bytes(const Bytes& raw);

}  // namespace nanozk::nn
