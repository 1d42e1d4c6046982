#include "nanozk/train.hpp"

#include <cmath>
#include <stdexcept>

#include "nanozk/rng.hpp"

namespace nanozk::nn {

TrainResult train_toy(const ModelConfig& cfg, const std::vector<uint32_t>& corpus,
                      const TrainOptions& opts) {
  if (corpus.size() < opts.window + 2)
    throw std::invalid_argument("corpus too small for the training window");
  SeededRng rng(opts.seed, "train-toy");
  TrainResult res;
  res.weights = init_weights(cfg, opts.seed);
  Weights& w = res.weights;
  uint32_t window = std::min(opts.window, cfg.max_seq);

  for (uint32_t step = 0; step < opts.steps; step++) {
    Grads acc = Grads::zeros_like(w);
    double sum_logp = 0.0;
    uint64_t count = 0;
    for (uint32_t b = 0; b < opts.batch; b++) {
      size_t start = rng.below(corpus.size() - window - 1);
      std::vector<uint32_t> tokens(corpus.begin() + start, corpus.begin() + start + window);
      std::vector<uint32_t> targets(corpus.begin() + start + 1,
                                    corpus.begin() + start + window + 1);
      GradResult gr = loglike_grad_with_loss(w, tokens, targets);
      acc.accumulate(gr.grads);
      sum_logp += gr.sum_logp;
      count += gr.count;
    }
    double loss = -sum_logp / static_cast<double>(count);
    if (!std::isfinite(loss)) throw std::runtime_error("training diverged (loss is not finite)");
    if (step == 0) res.initial_loss = loss;
    res.final_loss = loss;

    // ascend log-likelihood == descend NLL; normalize to mean then clip
    acc.scale(1.0 / static_cast<double>(count));
    double norm = acc.global_norm();
    double clip = opts.clip_norm > 0 && norm > opts.clip_norm ? opts.clip_norm / norm : 1.0;
    double eta = opts.lr * clip;

    auto upd_mat = [&](Mat& wm, const Mat& gm) {
      for (size_t i = 0; i < wm.a.size(); i++) wm.a[i] += eta * gm.a[i];
    };
    auto upd_vec = [&](std::vector<double>& wv, const std::vector<double>& gv) {
      for (size_t i = 0; i < wv.size(); i++) wv[i] += eta * gv[i];
    };
    upd_mat(w.tok_emb, acc.tok_emb);
    upd_mat(w.pos_emb, acc.pos_emb);
    for (size_t l = 0; l < w.layers.size(); l++) {
      upd_mat(w.layers[l].wq, acc.layers[l].wq);
      upd_mat(w.layers[l].wk, acc.layers[l].wk);
      upd_mat(w.layers[l].wv, acc.layers[l].wv);
      upd_mat(w.layers[l].wo, acc.layers[l].wo);
      upd_mat(w.layers[l].w1, acc.layers[l].w1);
      upd_mat(w.layers[l].w2, acc.layers[l].w2);
      upd_vec(w.layers[l].norm1_gain, acc.layers[l].norm1_gain);
      upd_vec(w.layers[l].norm1_bias, acc.layers[l].norm1_bias);
      upd_vec(w.layers[l].norm2_gain, acc.layers[l].norm2_gain);
      upd_vec(w.layers[l].norm2_bias, acc.layers[l].norm2_bias);
    }
    upd_vec(w.final_gain, acc.final_gain);
    upd_vec(w.final_bias, acc.final_bias);
    upd_mat(w.lm_head, acc.lm_head);
  }
  snap_to_grid(w);
  return res;
}

std::vector<uint32_t> synth_corpus(size_t n_bytes, uint64_t seed) {
  SeededRng rng(seed, "synth-corpus");
  static const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                  "p", "r", "s", "t", "v", "st", "tr", "sh"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  static const char* kCodas[] = {"", "", "n", "s", "r", "t", ""};
  std::string text;
  text.reserve(n_bytes + 32);
  uint32_t words_in_sentence = 0;
  uint32_t sentence_len = 4 + rng.below(8);
  while (text.size() < n_bytes) {
    uint32_t syllables = 1 + rng.below(3);
    for (uint32_t s = 0; s < syllables; s++) {
      text += kOnsets[rng.below(16)];
      text += kVowels[rng.below(7)];
      text += kCodas[rng.below(7)];
    }
    words_in_sentence++;
    if (words_in_sentence >= sentence_len) {
      text += ".\n";
      words_in_sentence = 0;
      sentence_len = 4 + rng.below(8);
    } else {
      text += ' ';
    }
  }
  text.resize(n_bytes);
  std::vector<uint32_t> out(text.size());
  for (size_t i = 0; i < text.size(); i++) out[i] = static_cast<uint8_t>(text[i]);
  return out;
}

std::string corpus_to_string(const std::vector<uint32_t>& corpus) {
  std::string s;
  s.reserve(corpus.size());
  for (uint32_t c : corpus) s.push_back(static_cast<char>(c & 0xff));
  return s;
}

std::vector<uint32_t> corpus_from_bytes(const Bytes& raw) {
  std::vector<uint32_t> out(raw.size());
  for (size_t i = 0; i < raw.size(); i++) out[i] = raw[i];
  return out;
}

}  // namespace nanozk::nn
