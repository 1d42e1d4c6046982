#include <doctest.h>

#include <cmath>

#include "nanozk/grad.hpp"
#include "nanozk/train.hpp"

using namespace nanozk;
using namespace nanozk::nn;

namespace {

ModelConfig grad_cfg() {
  ModelConfig c;
  c.num_layers = 2;
  c.dim = 8;
  c.num_heads = 2;
  c.vocab = 32;
  c.max_seq = 8;
  return c;
}

double sum_logp(const Weights& w, const std::vector<uint32_t>& tokens,
                const std::vector<uint32_t>& targets) {
  ExactTrace tr = forward_exact(w, tokens);
  double s = 0.0;
  for (uint32_t t = 0; t < tokens.size(); t++) {
    double maxv = -1e300;
    for (uint32_t j = 0; j < w.cfg.vocab; j++) maxv = std::max(maxv, tr.logits.at(t, j));
    double denom = 0.0;
    for (uint32_t j = 0; j < w.cfg.vocab; j++) denom += std::exp(tr.logits.at(t, j) - maxv);
    s += tr.logits.at(t, targets[t]) - maxv - std::log(denom);
  }
  return s;
}

// central finite differences on one parameter (param points into w)
double fd_grad(Weights& w, double* param, const std::vector<uint32_t>& tokens,
               const std::vector<uint32_t>& targets, double h = 1e-4) {
  double orig = *param;
  *param = orig + h;
  double up = sum_logp(w, tokens, targets);
  *param = orig - h;
  double down = sum_logp(w, tokens, targets);
  *param = orig;
  return (up - down) / (2 * h);
}

struct TensorRef {
  std::string name;
  double* bp;      // backprop gradient entry
  double* param;   // weight entry (within a copy)
};

}  // namespace

TEST_CASE("softmax gradient rows sum to zero") {
  ModelConfig cfg = grad_cfg();
  Weights w = init_weights(cfg, 3);
  std::vector<uint32_t> tokens{1, 5, 9, 2};
  std::vector<uint32_t> targets{5, 9, 2, 7};
  // d(sum log p)/dlogits row = onehot - p; sums to zero per position
  ExactTrace tr = forward_exact(w, tokens);
  for (uint32_t t = 0; t < tokens.size(); t++) {
    double maxv = -1e300;
    for (uint32_t j = 0; j < cfg.vocab; j++) maxv = std::max(maxv, tr.logits.at(t, j));
    double denom = 0.0;
    for (uint32_t j = 0; j < cfg.vocab; j++) denom += std::exp(tr.logits.at(t, j) - maxv);
    double row_sum = 0.0;
    for (uint32_t j = 0; j < cfg.vocab; j++) {
      double p = std::exp(tr.logits.at(t, j) - maxv) / denom;
      row_sum += (j == targets[t] ? 1.0 : 0.0) - p;
    }
    CHECK(std::fabs(row_sum) < 1e-12);
  }
}

TEST_CASE("silenced layer gets zero gradient") {
  ModelConfig cfg = grad_cfg();
  Weights w = init_weights(cfg, 4);
  // silence layer 1 entirely: zero gains kill both branch inputs
  std::fill(w.layers[1].norm1_gain.begin(), w.layers[1].norm1_gain.end(), 0.0);
  std::fill(w.layers[1].norm1_bias.begin(), w.layers[1].norm1_bias.end(), 0.0);
  std::fill(w.layers[1].norm2_gain.begin(), w.layers[1].norm2_gain.end(), 0.0);
  std::fill(w.layers[1].norm2_bias.begin(), w.layers[1].norm2_bias.end(), 0.0);
  std::vector<uint32_t> tokens{3, 1, 4, 1, 5};
  std::vector<uint32_t> targets{1, 4, 1, 5, 9};
  Grads g = loglike_grad(w, tokens, targets);
  // weight matrices see zero input, so their gradients vanish
  for (double v : g.layers[1].wq.a) CHECK(v == 0.0);
  for (double v : g.layers[1].wo.a) CHECK(v == 0.0);
  for (double v : g.layers[1].w1.a) CHECK(v == 0.0);
  for (double v : g.layers[1].w2.a) CHECK(v == 0.0);
}

TEST_CASE("backprop matches central differences on every tensor") {
  for (auto norm : {NormKind::LAYERNORM, NormKind::RMSNORM}) {
    for (auto act : {ActKind::GELU, ActKind::SILU}) {
      ModelConfig cfg = grad_cfg();
      cfg.norm_kind = norm;
      cfg.act_kind = act;
      Weights w = init_weights(cfg, 11);
      std::vector<uint32_t> tokens{7, 2, 19, 30, 4, 13};
      std::vector<uint32_t> targets{2, 19, 30, 4, 13, 8};
      Grads g = loglike_grad(w, tokens, targets);

      // probe a spread of entries in every tensor kind
      auto probe = [&](const Mat& gm, Mat& wm, const std::string& name) {
        size_t n = wm.a.size();
        for (size_t i : {size_t{0}, n / 3, n / 2, n - 1}) {
          double fd = fd_grad(w, &wm.a[i], tokens, targets);
          double bp = gm.a[i];
          double rel = std::fabs(bp - fd) / std::max({1e-6, std::fabs(bp), std::fabs(fd)});
          INFO(name, "[", i, "] bp=", bp, " fd=", fd);
          CHECK(rel <= 1e-4);
        }
      };
      auto probe_vec = [&](const std::vector<double>& gv, std::vector<double>& wv,
                           const std::string& name) {
        for (size_t i : {size_t{0}, wv.size() / 2, wv.size() - 1}) {
          double fd = fd_grad(w, &wv[i], tokens, targets);
          double bp = gv[i];
          double rel = std::fabs(bp - fd) / std::max({1e-6, std::fabs(bp), std::fabs(fd)});
          INFO(name, "[", i, "] bp=", bp, " fd=", fd);
          CHECK(rel <= 1e-4);
        }
      };
      probe(g.tok_emb, w.tok_emb, "tok_emb");
      probe(g.pos_emb, w.pos_emb, "pos_emb");
      probe(g.lm_head, w.lm_head, "lm_head");
      probe_vec(g.final_gain, w.final_gain, "final_gain");
      if (norm == NormKind::LAYERNORM) probe_vec(g.final_bias, w.final_bias, "final_bias");
      for (uint32_t l = 0; l < cfg.num_layers; l++) {
        auto& gl = g.layers[l];
        auto& wl = w.layers[l];
        probe(gl.wq, wl.wq, "wq");
        probe(gl.wk, wl.wk, "wk");
        probe(gl.wv, wl.wv, "wv");
        probe(gl.wo, wl.wo, "wo");
        probe(gl.w1, wl.w1, "w1");
        probe(gl.w2, wl.w2, "w2");
        probe_vec(gl.norm1_gain, wl.norm1_gain, "norm1_gain");
        probe_vec(gl.norm2_gain, wl.norm2_gain, "norm2_gain");
        if (norm == NormKind::LAYERNORM) {
          probe_vec(gl.norm1_bias, wl.norm1_bias, "norm1_bias");
          probe_vec(gl.norm2_bias, wl.norm2_bias, "norm2_bias");
        }
      }
    }
  }
}

TEST_CASE("synthetic corpus is deterministic and text-like") {
  auto a = synth_corpus(5000, 42);
  auto b = synth_corpus(5000, 42);
  CHECK(a == b);
  CHECK(a.size() == 5000);
  auto c = synth_corpus(5000, 43);
  CHECK(a != c);
  for (uint32_t ch : a) CHECK(ch < 128);  // ascii
}

TEST_CASE("training: determinism, zero steps, loss decrease") {
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.dim = 16;
  cfg.num_heads = 2;
  cfg.vocab = 256;
  cfg.max_seq = 32;
  auto corpus = synth_corpus(8000, 7);

  TrainOptions opts;
  opts.steps = 0;
  opts.seed = 5;
  TrainResult r0 = train_toy(cfg, corpus, opts);
  Weights init = init_weights(cfg, 5);
  snap_to_grid(init);
  for (size_t i = 0; i < init.tok_emb.a.size(); i++)
    CHECK(r0.weights.tok_emb.a[i] == init.tok_emb.a[i]);

  opts.steps = 30;
  opts.batch = 4;
  opts.window = 16;
  TrainResult a = train_toy(cfg, corpus, opts);
  TrainResult b = train_toy(cfg, corpus, opts);
  for (size_t i = 0; i < a.weights.lm_head.a.size(); i++)
    CHECK(a.weights.lm_head.a[i] == b.weights.lm_head.a[i]);
  CHECK(a.final_loss < a.initial_loss);
}
