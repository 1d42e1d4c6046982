#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanozk/lut.hpp"
#include "nanozk/sha256.hpp"
#include "nanozk/tensor.hpp"

namespace nanozk::nn {

enum class NormKind : uint8_t { LAYERNORM = 0, RMSNORM = 1 };
enum class ActKind : uint8_t { GELU = 0, SILU = 1 };
enum class RunMode : uint8_t { EXACT = 0, LUT = 1 };

struct ModelConfig {
  uint32_t num_layers = 2;  // L
  uint32_t dim = 32;        // d
  uint32_t ff_dim = 0;      // d_ff; 0 means 4*dim
  uint32_t num_heads = 2;
  uint32_t vocab = 256;  // V; char-level byte tokenizer by default
  uint32_t max_seq = 64;
  NormKind norm_kind = NormKind::LAYERNORM;
  ActKind act_kind = ActKind::GELU;
  double norm_eps = 1e-5;
  int frac_bits = 16;
  bool newton_refine_rsqrt = false;  // optional refinement after the rsqrt lookup
  bool softmax_subtract_max = false;

  uint32_t d_ff() const { return ff_dim == 0 ? 4 * dim : ff_dim; }
  uint32_t head_dim() const { return dim / num_heads; }
  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& s);
};

// Row-major double matrix for the exact (differentiable) path.
struct Mat {
  uint32_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(uint32_t r, uint32_t c) : rows(r), cols(c), a(size_t{r} * c, 0.0) {}
  double& at(uint32_t r, uint32_t c) { return a[size_t{r} * cols + c]; }
  double at(uint32_t r, uint32_t c) const { return a[size_t{r} * cols + c]; }
  size_t size() const { return a.size(); }
};

Mat matmul(const Mat& x, const Mat& w);               // x: m*n, w: n*p
Mat matmul_tn(const Mat& x, const Mat& w);            // x^T * w, x: n*m
Mat matmul_nt(const Mat& x, const Mat& w);            // x * w^T, w: p*n

struct LayerWeights {
  Mat wq, wk, wv, wo;  // d x d
  Mat w1;              // d x d_ff
  Mat w2;              // d_ff x d
  std::vector<double> norm1_gain, norm1_bias;
  std::vector<double> norm2_gain, norm2_bias;

  size_t param_count() const;
};

struct Weights {
  ModelConfig cfg;
  Mat tok_emb;  // V x d
  Mat pos_emb;  // max_seq x d
  std::vector<LayerWeights> layers;
  std::vector<double> final_gain, final_bias;
  Mat lm_head;  // d x V

  size_t param_count() const;
};

Weights init_weights(const ModelConfig& cfg, uint64_t seed);
// Snaps every parameter onto the fixed-point grid so the exact and
// quantized pipelines share identical underlying weights.
void snap_to_grid(Weights& w);

// Quantized (code) view of the weights, the form the prover commits to.
struct QuantizedWeights {
  ModelConfig cfg;
  fx::FixedTensor tok_emb, pos_emb;
  struct Layer {
    fx::FixedTensor wq, wk, wv, wo, w1, w2;
    std::vector<int64_t> norm1_gain, norm1_bias, norm2_gain, norm2_bias;
  };
  std::vector<Layer> layers;
  std::vector<int64_t> final_gain, final_bias;
  fx::FixedTensor lm_head;
};
QuantizedWeights quantize_weights(const Weights& w);

// The four tables the quantized pipeline consumes.
struct TableSet {
  lut::LookupTable exp, gelu, silu, rsqrt;
  static TableSet build(const fx::FixedParams& params);
  const lut::LookupTable& activation(ActKind k) const {
    return k == ActKind::GELU ? gelu : silu;
  }
  std::vector<Digest> digests() const;
};

// ---- exact (double) forward with tapes for backprop ----

struct BlockTapes {
  Mat x;                                  // block input (seq x d)
  Mat n1;                                 // norm1(x)
  std::vector<double> n1_mean, n1_rstd;   // per-row norm stats
  Mat q, k, v;                            // seq x d
  std::vector<Mat> probs;                 // per head, seq x seq (causal softmax)
  Mat ctx;                                // concatenated head outputs
  Mat attn_out;                           // ctx * wo
  Mat u;                                  // x + attn_out
  Mat n2;
  std::vector<double> n2_mean, n2_rstd;
  Mat f1, g, f2;                           // FFN intermediates
  Mat out;                                // u + f2
};

struct ExactTrace {
  std::vector<uint32_t> tokens;
  Mat h0;
  std::vector<BlockTapes> blocks;
  Mat h_final;  // output of last block
  std::vector<double> fin_mean, fin_rstd;
  Mat fin_norm;
  Mat logits;  // seq x V
};

ExactTrace forward_exact(const Weights& w, const std::vector<uint32_t>& tokens);

// Single-block forward on an explicit hidden state (both modes share the
// block semantics; the exact variant is used by unit tests directly).
Mat block_forward_exact(const ModelConfig& cfg, const LayerWeights& lw, const Mat& h);

// ---- quantized (LUT) forward with proof witness ----

struct LookupPairs {
  lut::LutFn fn;
  std::vector<std::pair<uint32_t, int64_t>> pairs;  // (table index, table code)
};

struct HeadWitness {
  fx::FixedTensor qh;        // seq x d_k
  fx::FixedTensor kht;       // d_k x seq (K_h transposed: the score matmul W side)
  fx::FixedTensor scores;    // raw Q_h K_h^T product (seq x seq)
  fx::FixedTensor r_scores;  // its rescale remainder
  fx::FixedTensor probs;     // causal softmax rows (seq x seq)
  fx::FixedTensor vh;        // seq x d_k
  fx::FixedTensor ctx;       // probs * V_h (seq x d_k)
  fx::FixedTensor r_ctx;
};

struct BlockWitness {
  fx::FixedTensor x1;  // norm1 output: X side of the Q/K/V projections
  fx::FixedTensor q, k, v;
  fx::FixedTensor r_q, r_k, r_v;
  std::vector<HeadWitness> heads;
  fx::FixedTensor o;         // concatenated head contexts
  fx::FixedTensor attn_out;  // o * wo
  fx::FixedTensor r_o;
  fx::FixedTensor x2;  // norm2 output
  fx::FixedTensor f1, g, f2;
  fx::FixedTensor r_f1, r_f2;
  LookupPairs lk_norm1, lk_softmax, lk_act, lk_norm2;
};

struct LutTrace {
  std::vector<uint32_t> tokens;
  std::vector<fx::FixedTensor> h;  // h_0 .. h_L
  std::vector<BlockWitness> blocks;
  fx::FixedTensor head_x;  // final norm output (X side of the LM head matmul)
  fx::FixedTensor head_r;  // LM head rescale remainder
  LookupPairs lk_final_norm;
  fx::FixedTensor logits;  // seq x V
};

LutTrace forward_lut(const QuantizedWeights& qw, const TableSet& tables,
                     const std::vector<uint32_t>& tokens);

// Logits for either mode (rows = seq, cols = V, doubles).
Mat logits_for(const Weights& w, const QuantizedWeights& qw, const TableSet& tables,
               const std::vector<uint32_t>& tokens, RunMode mode);

// ---- perplexity ----

struct PerplexityResult {
  double ppl = 0.0;
  uint64_t n_tokens = 0;
  RunMode mode = RunMode::EXACT;
};

// Exponentiated mean NLL over the corpus, non-overlapping max_seq windows,
// log-probs in double precision from the mode's logits.
PerplexityResult perplexity(const Weights& w, const std::vector<uint32_t>& corpus,
                            RunMode mode);

// ---- weight files ----

// JSON manifest + "NZKT" binary blob; the digest binds weights and tables.
void save_weights(const Weights& w, const std::string& path_base);
Weights load_weights(const std::string& path_base);
Digest model_digest(const Weights& w, const TableSet& tables);

}  // namespace nanozk::nn
