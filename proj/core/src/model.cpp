#include "nanozk/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nanozk/rng.hpp"

namespace nanozk::nn {

using json = nlohmann::json;

void ModelConfig::validate() const {
  if (num_layers < 1) throw std::invalid_argument("need at least one layer");
  if (vocab < 2) throw std::invalid_argument("vocab must be >= 2");
  if (dim == 0 || num_heads == 0 || dim % num_heads != 0)
    throw std::invalid_argument("dim must be divisible by num_heads");
  if (max_seq < 2) throw std::invalid_argument("max_seq must be >= 2");
  fx::FixedParams{frac_bits}.validate();
}

std::string ModelConfig::to_json() const {
  json j;
  j["num_layers"] = num_layers;
  j["dim"] = dim;
  j["ff_dim"] = ff_dim;
  j["num_heads"] = num_heads;
  j["vocab"] = vocab;
  j["max_seq"] = max_seq;
  j["norm_kind"] = norm_kind == NormKind::LAYERNORM ? "layernorm" : "rmsnorm";
  j["act_kind"] = act_kind == ActKind::GELU ? "gelu" : "silu";
  j["norm_eps"] = norm_eps;
  j["frac_bits"] = frac_bits;
  j["newton_refine_rsqrt"] = newton_refine_rsqrt;
  j["softmax_subtract_max"] = softmax_subtract_max;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& s) {
  json j = json::parse(s);
  ModelConfig c;
  c.num_layers = j.at("num_layers").get<uint32_t>();
  c.dim = j.at("dim").get<uint32_t>();
  c.ff_dim = j.value("ff_dim", 0u);
  c.num_heads = j.at("num_heads").get<uint32_t>();
  c.vocab = j.at("vocab").get<uint32_t>();
  c.max_seq = j.at("max_seq").get<uint32_t>();
  c.norm_kind = j.value("norm_kind", "layernorm") == std::string("rmsnorm")
                    ? NormKind::RMSNORM
                    : NormKind::LAYERNORM;
  c.act_kind = j.value("act_kind", "gelu") == std::string("silu") ? ActKind::SILU
                                                                  : ActKind::GELU;
  c.norm_eps = j.value("norm_eps", 1e-5);
  c.frac_bits = j.value("frac_bits", 16);
  c.newton_refine_rsqrt = j.value("newton_refine_rsqrt", false);
  c.softmax_subtract_max = j.value("softmax_subtract_max", false);
  c.validate();
  return c;
}

Mat matmul(const Mat& x, const Mat& w) {
  if (x.cols != w.rows) throw std::invalid_argument("matmul shape mismatch");
  Mat y(x.rows, w.cols);
  for (uint32_t i = 0; i < x.rows; i++)
    for (uint32_t k = 0; k < x.cols; k++) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (uint32_t j = 0; j < w.cols; j++) y.at(i, j) += xv * w.at(k, j);
    }
  return y;
}

Mat matmul_tn(const Mat& x, const Mat& w) {
  if (x.rows != w.rows) throw std::invalid_argument("matmul_tn shape mismatch");
  Mat y(x.cols, w.cols);
  for (uint32_t k = 0; k < x.rows; k++)
    for (uint32_t i = 0; i < x.cols; i++) {
      double xv = x.at(k, i);
      if (xv == 0.0) continue;
      for (uint32_t j = 0; j < w.cols; j++) y.at(i, j) += xv * w.at(k, j);
    }
  return y;
}

Mat matmul_nt(const Mat& x, const Mat& w) {
  if (x.cols != w.cols) throw std::invalid_argument("matmul_nt shape mismatch");
  Mat y(x.rows, w.rows);
  for (uint32_t i = 0; i < x.rows; i++)
    for (uint32_t j = 0; j < w.rows; j++) {
      double acc = 0.0;
      for (uint32_t k = 0; k < x.cols; k++) acc += x.at(i, k) * w.at(j, k);
      y.at(i, j) = acc;
    }
  return y;
}

size_t LayerWeights::param_count() const {
  return wq.size() + wk.size() + wv.size() + wo.size() + w1.size() + w2.size() +
         norm1_gain.size() + norm1_bias.size() + norm2_gain.size() + norm2_bias.size();
}

size_t Weights::param_count() const {
  size_t n = tok_emb.size() + pos_emb.size() + final_gain.size() + final_bias.size() +
             lm_head.size();
  for (const auto& l : layers) n += l.param_count();
  return n;
}

static Mat random_mat(uint32_t r, uint32_t c, double std, SeededRng& rng) {
  Mat m(r, c);
  for (auto& v : m.a) v = std * rng.normal();
  return m;
}

Weights init_weights(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  SeededRng rng(seed, "init-weights");
  Weights w;
  w.cfg = cfg;
  // Embedding scale keeps mean-square activations inside the rsqrt table
  // range from step zero.
  w.tok_emb = random_mat(cfg.vocab, cfg.dim, 0.5, rng);
  w.pos_emb = random_mat(cfg.max_seq, cfg.dim, 0.5, rng);
  double proj_std = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  double ff_std = 1.0 / std::sqrt(static_cast<double>(cfg.d_ff()));
  w.layers.resize(cfg.num_layers);
  for (auto& l : w.layers) {
    l.wq = random_mat(cfg.dim, cfg.dim, proj_std, rng);
    l.wk = random_mat(cfg.dim, cfg.dim, proj_std, rng);
    l.wv = random_mat(cfg.dim, cfg.dim, proj_std, rng);
    l.wo = random_mat(cfg.dim, cfg.dim, 0.5 * proj_std, rng);
    l.w1 = random_mat(cfg.dim, cfg.d_ff(), proj_std, rng);
    l.w2 = random_mat(cfg.d_ff(), cfg.dim, 0.5 * ff_std, rng);
    l.norm1_gain.assign(cfg.dim, 1.0);
    l.norm1_bias.assign(cfg.dim, 0.0);
    l.norm2_gain.assign(cfg.dim, 1.0);
    l.norm2_bias.assign(cfg.dim, 0.0);
  }
  w.final_gain.assign(cfg.dim, 1.0);
  w.final_bias.assign(cfg.dim, 0.0);
  w.lm_head = random_mat(cfg.dim, cfg.vocab, proj_std, rng);
  return w;
}

static void snap_mat(Mat& m, const fx::FixedParams& p) {
  for (auto& v : m.a) v = fx::from_fixed(fx::to_fixed(v, p), p);
}
static void snap_vec(std::vector<double>& v, const fx::FixedParams& p) {
  for (auto& x : v) x = fx::from_fixed(fx::to_fixed(x, p), p);
}

void snap_to_grid(Weights& w) {
  fx::FixedParams p{w.cfg.frac_bits};
  snap_mat(w.tok_emb, p);
  snap_mat(w.pos_emb, p);
  for (auto& l : w.layers) {
    snap_mat(l.wq, p);
    snap_mat(l.wk, p);
    snap_mat(l.wv, p);
    snap_mat(l.wo, p);
    snap_mat(l.w1, p);
    snap_mat(l.w2, p);
    snap_vec(l.norm1_gain, p);
    snap_vec(l.norm1_bias, p);
    snap_vec(l.norm2_gain, p);
    snap_vec(l.norm2_bias, p);
  }
  snap_vec(w.final_gain, p);
  snap_vec(w.final_bias, p);
  snap_mat(w.lm_head, p);
}

static fx::FixedTensor quantize_mat(const Mat& m, const fx::FixedParams& p) {
  fx::FixedTensor t({m.rows, m.cols}, p);
  for (size_t i = 0; i < m.a.size(); i++) t.data[i] = fx::to_fixed(m.a[i], p);
  return t;
}
static std::vector<int64_t> quantize_vec(const std::vector<double>& v,
                                         const fx::FixedParams& p) {
  std::vector<int64_t> out(v.size());
  for (size_t i = 0; i < v.size(); i++) out[i] = fx::to_fixed(v[i], p);
  return out;
}

QuantizedWeights quantize_weights(const Weights& w) {
  fx::FixedParams p{w.cfg.frac_bits};
  QuantizedWeights q;
  q.cfg = w.cfg;
  q.tok_emb = quantize_mat(w.tok_emb, p);
  q.pos_emb = quantize_mat(w.pos_emb, p);
  q.layers.resize(w.layers.size());
  for (size_t i = 0; i < w.layers.size(); i++) {
    const auto& l = w.layers[i];
    auto& ql = q.layers[i];
    ql.wq = quantize_mat(l.wq, p);
    ql.wk = quantize_mat(l.wk, p);
    ql.wv = quantize_mat(l.wv, p);
    ql.wo = quantize_mat(l.wo, p);
    ql.w1 = quantize_mat(l.w1, p);
    ql.w2 = quantize_mat(l.w2, p);
    ql.norm1_gain = quantize_vec(l.norm1_gain, p);
    ql.norm1_bias = quantize_vec(l.norm1_bias, p);
    ql.norm2_gain = quantize_vec(l.norm2_gain, p);
    ql.norm2_bias = quantize_vec(l.norm2_bias, p);
  }
  q.final_gain = quantize_vec(w.final_gain, p);
  q.final_bias = quantize_vec(w.final_bias, p);
  q.lm_head = quantize_mat(w.lm_head, p);
  return q;
}

TableSet TableSet::build(const fx::FixedParams& params) {
  return TableSet{lut::build_table(lut::LutFn::EXP, params),
                  lut::build_table(lut::LutFn::GELU, params),
                  lut::build_table(lut::LutFn::SILU, params),
                  lut::build_table(lut::LutFn::RSQRT, params)};
}

std::vector<Digest> TableSet::digests() const {
  return {exp.digest(), gelu.digest(), silu.digest(), rsqrt.digest()};
}

// ---- exact forward ----

static void norm_row_exact(const ModelConfig& cfg, const double* x, uint32_t d,
                           const std::vector<double>& gain, const std::vector<double>& bias,
                           double* out, double* mean_out, double* rstd_out) {
  double mean = 0.0;
  if (cfg.norm_kind == NormKind::LAYERNORM) {
    for (uint32_t i = 0; i < d; i++) mean += x[i];
    mean /= d;
  }
  double var = 0.0;
  for (uint32_t i = 0; i < d; i++) {
    double c = x[i] - mean;
    var += c * c;
  }
  var /= d;
  double rstd = 1.0 / std::sqrt(var + cfg.norm_eps);
  for (uint32_t i = 0; i < d; i++) {
    double nh = (x[i] - mean) * rstd;
    out[i] = nh * gain[i] + (cfg.norm_kind == NormKind::LAYERNORM ? bias[i] : 0.0);
  }
  *mean_out = mean;
  *rstd_out = rstd;
}

static Mat norm_exact(const ModelConfig& cfg, const Mat& x, const std::vector<double>& gain,
                      const std::vector<double>& bias, std::vector<double>& means,
                      std::vector<double>& rstds) {
  Mat out(x.rows, x.cols);
  means.resize(x.rows);
  rstds.resize(x.rows);
  for (uint32_t r = 0; r < x.rows; r++)
    norm_row_exact(cfg, &x.a[size_t{r} * x.cols], x.cols, gain, bias,
                   &out.a[size_t{r} * x.cols], &means[r], &rstds[r]);
  return out;
}

static double act_exact(ActKind k, double x) {
  return k == ActKind::GELU ? lut::oracle_eval(lut::LutFn::GELU, x)
                            : lut::oracle_eval(lut::LutFn::SILU, x);
}

static BlockTapes block_forward_tapes(const ModelConfig& cfg, const LayerWeights& lw,
                                      const Mat& h) {
  if (h.cols != cfg.dim) throw std::invalid_argument("hidden width mismatch");
  uint32_t seq = h.rows, d = cfg.dim, hd = cfg.head_dim();
  BlockTapes t;
  t.x = h;
  t.n1 = norm_exact(cfg, h, lw.norm1_gain, lw.norm1_bias, t.n1_mean, t.n1_rstd);
  t.q = matmul(t.n1, lw.wq);
  t.k = matmul(t.n1, lw.wk);
  t.v = matmul(t.n1, lw.wv);
  double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  t.ctx = Mat(seq, d);
  t.probs.assign(cfg.num_heads, Mat(seq, seq));
  for (uint32_t hIdx = 0; hIdx < cfg.num_heads; hIdx++) {
    Mat& p = t.probs[hIdx];
    uint32_t off = hIdx * hd;
    for (uint32_t i = 0; i < seq; i++) {
      double maxv = -1e300;
      std::vector<double> row(i + 1);
      for (uint32_t j = 0; j <= i; j++) {
        double s = 0.0;
        for (uint32_t c = 0; c < hd; c++) s += t.q.at(i, off + c) * t.k.at(j, off + c);
        row[j] = s * scale;
        maxv = std::max(maxv, row[j]);
      }
      double denom = 0.0;
      for (uint32_t j = 0; j <= i; j++) {
        row[j] = std::exp(row[j] - maxv);
        denom += row[j];
      }
      for (uint32_t j = 0; j <= i; j++) p.at(i, j) = row[j] / denom;
      for (uint32_t j = 0; j <= i; j++)
        for (uint32_t c = 0; c < hd; c++)
          t.ctx.at(i, off + c) += p.at(i, j) * t.v.at(j, off + c);
    }
  }
  t.attn_out = matmul(t.ctx, lw.wo);
  t.u = Mat(seq, d);
  for (size_t i = 0; i < t.u.a.size(); i++) t.u.a[i] = h.a[i] + t.attn_out.a[i];
  t.n2 = norm_exact(cfg, t.u, lw.norm2_gain, lw.norm2_bias, t.n2_mean, t.n2_rstd);
  t.f1 = matmul(t.n2, lw.w1);
  t.g = Mat(seq, cfg.d_ff());
  for (size_t i = 0; i < t.f1.a.size(); i++) t.g.a[i] = act_exact(cfg.act_kind, t.f1.a[i]);
  t.f2 = matmul(t.g, lw.w2);
  t.out = Mat(seq, d);
  for (size_t i = 0; i < t.out.a.size(); i++) t.out.a[i] = t.u.a[i] + t.f2.a[i];
  return t;
}

Mat block_forward_exact(const ModelConfig& cfg, const LayerWeights& lw, const Mat& h) {
  return block_forward_tapes(cfg, lw, h).out;
}

ExactTrace forward_exact(const Weights& w, const std::vector<uint32_t>& tokens) {
  const ModelConfig& cfg = w.cfg;
  cfg.validate();
  if (tokens.empty() || tokens.size() > cfg.max_seq)
    throw std::invalid_argument("token count must be in [1, max_seq]");
  for (uint32_t t : tokens)
    if (t >= cfg.vocab) throw std::invalid_argument("token id out of vocabulary");
  uint32_t seq = static_cast<uint32_t>(tokens.size());
  ExactTrace tr;
  tr.tokens = tokens;
  tr.h0 = Mat(seq, cfg.dim);
  for (uint32_t t = 0; t < seq; t++)
    for (uint32_t c = 0; c < cfg.dim; c++)
      tr.h0.at(t, c) = w.tok_emb.at(tokens[t], c) + w.pos_emb.at(t, c);
  Mat h = tr.h0;
  tr.blocks.reserve(cfg.num_layers);
  for (uint32_t l = 0; l < cfg.num_layers; l++) {
    tr.blocks.push_back(block_forward_tapes(cfg, w.layers[l], h));
    h = tr.blocks.back().out;
  }
  tr.h_final = h;
  tr.fin_norm = norm_exact(cfg, h, w.final_gain, w.final_bias, tr.fin_mean, tr.fin_rstd);
  tr.logits = matmul(tr.fin_norm, w.lm_head);
  return tr;
}

// ---- quantized forward ----

namespace {

struct FixedNormResult {
  fx::FixedTensor out;
  LookupPairs lookups;
};

FixedNormResult norm_fixed(const ModelConfig& cfg, const fx::FixedTensor& x,
                           const std::vector<int64_t>& gain, const std::vector<int64_t>& bias,
                           const lut::LookupTable& rsqrt_table) {
  fx::FixedParams fp{cfg.frac_bits};
  uint32_t seq = x.shape[0], d = x.shape[1];
  FixedNormResult res{fx::FixedTensor({seq, d}, fp), {lut::LutFn::RSQRT, {}}};
  int64_t eps_code = fx::to_fixed(cfg.norm_eps, fp);
  for (uint32_t r = 0; r < seq; r++) {
    int64_t mean = 0;
    if (cfg.norm_kind == NormKind::LAYERNORM) {
      __int128 s = 0;
      for (uint32_t c = 0; c < d; c++) s += x.at(r, c);
      mean = fx::div_round(s, d);
    }
    __int128 acc = 0;
    for (uint32_t c = 0; c < d; c++) {
      int64_t cv = x.at(r, c) - mean;
      acc += static_cast<__int128>(cv) * cv;
    }
    // variance (or mean square) at code scale: acc / (d * 2^fb)
    int64_t var_code = fx::div_round(acc, static_cast<int64_t>(d) << cfg.frac_bits);
    int64_t arg = var_code + eps_code;
    lut::LookupHit hit = lut::lookup_code(rsqrt_table, fx::from_fixed(arg, fp));
    res.lookups.pairs.emplace_back(hit.index, hit.out_code);
    int64_t rstd = hit.out_code;
    if (cfg.newton_refine_rsqrt) rstd = lut::newton_refine_code(rstd, arg, fp);
    for (uint32_t c = 0; c < d; c++) {
      int64_t cv = x.at(r, c) - mean;
      int64_t nh = fx::fixed_mul(cv, rstd, fp);
      int64_t y = fx::fixed_mul(nh, gain[c], fp);
      if (cfg.norm_kind == NormKind::LAYERNORM) y += bias[c];
      res.out.at(r, c) = y;
    }
  }
  return res;
}

fx::FixedTensor slice_cols(const fx::FixedTensor& m, uint32_t off, uint32_t n) {
  fx::FixedTensor out({m.shape[0], n}, m.params);
  for (uint32_t r = 0; r < m.shape[0]; r++)
    for (uint32_t c = 0; c < n; c++) out.at(r, c) = m.at(r, off + c);
  return out;
}

}  // namespace

LutTrace forward_lut(const QuantizedWeights& qw, const TableSet& tables,
                     const std::vector<uint32_t>& tokens) {
  const ModelConfig& cfg = qw.cfg;
  cfg.validate();
  if (tokens.empty() || tokens.size() > cfg.max_seq)
    throw std::invalid_argument("token count must be in [1, max_seq]");
  for (uint32_t t : tokens)
    if (t >= cfg.vocab) throw std::invalid_argument("token id out of vocabulary");
  fx::FixedParams fp{cfg.frac_bits};
  uint32_t seq = static_cast<uint32_t>(tokens.size());
  uint32_t d = cfg.dim, hd = cfg.head_dim();

  LutTrace tr;
  tr.tokens = tokens;
  fx::FixedTensor h({seq, d}, fp);
  for (uint32_t t = 0; t < seq; t++)
    for (uint32_t c = 0; c < d; c++)
      h.at(t, c) = qw.tok_emb.at(tokens[t], c) + qw.pos_emb.at(t, c);
  tr.h.push_back(h);

  int64_t scale_code = fx::to_fixed(1.0 / std::sqrt(static_cast<double>(hd)), fp);
  const lut::LookupTable& act_table = tables.activation(cfg.act_kind);

  for (uint32_t l = 0; l < cfg.num_layers; l++) {
    const auto& lw = qw.layers[l];
    BlockWitness bw;
    auto n1 = norm_fixed(cfg, h, lw.norm1_gain, lw.norm1_bias, tables.rsqrt);
    bw.x1 = n1.out;
    bw.lk_norm1 = std::move(n1.lookups);
    auto qr = fx::fixed_matmul_with_remainder(bw.x1, lw.wq);
    auto kr = fx::fixed_matmul_with_remainder(bw.x1, lw.wk);
    auto vr = fx::fixed_matmul_with_remainder(bw.x1, lw.wv);
    bw.q = qr.product;
    bw.r_q = qr.remainder;
    bw.k = kr.product;
    bw.r_k = kr.remainder;
    bw.v = vr.product;
    bw.r_v = vr.remainder;

    bw.lk_softmax.fn = lut::LutFn::EXP;
    fx::FixedTensor o({seq, d}, fp);
    bw.heads.reserve(cfg.num_heads);
    for (uint32_t hIdx = 0; hIdx < cfg.num_heads; hIdx++) {
      HeadWitness hw;
      uint32_t off = hIdx * hd;
      hw.qh = slice_cols(bw.q, off, hd);
      hw.vh = slice_cols(bw.v, off, hd);
      hw.kht = fx::transpose(slice_cols(bw.k, off, hd));
      auto sc = fx::fixed_matmul_with_remainder(hw.qh, hw.kht);
      hw.scores = sc.product;
      hw.r_scores = sc.remainder;
      hw.probs = fx::FixedTensor({seq, seq}, fp);
      for (uint32_t i = 0; i < seq; i++) {
        std::vector<int64_t> row(i + 1);
        for (uint32_t j = 0; j <= i; j++)
          row[j] = fx::fixed_mul(hw.scores.at(i, j), scale_code, fp);
        lut::SoftmaxOptions so;
        so.subtract_max = cfg.softmax_subtract_max;
        auto sm = lut::softmax_codes(row, tables.exp, so);
        for (uint32_t j = 0; j <= i; j++) hw.probs.at(i, j) = sm.probs[j];
        for (auto& pr : sm.lookups) bw.lk_softmax.pairs.push_back(pr);
      }
      auto pv = fx::fixed_matmul_with_remainder(hw.probs, hw.vh);
      hw.ctx = pv.product;
      hw.r_ctx = pv.remainder;
      for (uint32_t i = 0; i < seq; i++)
        for (uint32_t c = 0; c < hd; c++) o.at(i, off + c) = hw.ctx.at(i, c);
      bw.heads.push_back(std::move(hw));
    }
    bw.o = o;
    auto ar = fx::fixed_matmul_with_remainder(bw.o, lw.wo);
    bw.attn_out = ar.product;
    bw.r_o = ar.remainder;
    fx::FixedTensor u({seq, d}, fp);
    for (size_t i = 0; i < u.data.size(); i++) u.data[i] = h.data[i] + bw.attn_out.data[i];

    auto n2 = norm_fixed(cfg, u, lw.norm2_gain, lw.norm2_bias, tables.rsqrt);
    bw.x2 = n2.out;
    bw.lk_norm2 = std::move(n2.lookups);
    auto f1r = fx::fixed_matmul_with_remainder(bw.x2, lw.w1);
    bw.f1 = f1r.product;
    bw.r_f1 = f1r.remainder;
    bw.g = fx::FixedTensor({seq, cfg.d_ff()}, fp);
    bw.lk_act.fn = act_table.fn;
    for (size_t i = 0; i < bw.f1.data.size(); i++) {
      int64_t xc = bw.f1.data[i];
      double xr = fx::from_fixed(xc, fp);
      if (xr > act_table.grid.hi) {
        bw.g.data[i] = xc;  // asymptotic upper branch: identity
      } else if (xr < act_table.grid.lo) {
        bw.g.data[i] = 0;  // asymptotic lower branch
      } else {
        lut::LookupHit hit = lut::lookup_code(act_table, xr);
        bw.lk_act.pairs.emplace_back(hit.index, hit.out_code);
        bw.g.data[i] = hit.out_code;
      }
    }
    auto f2r = fx::fixed_matmul_with_remainder(bw.g, lw.w2);
    bw.f2 = f2r.product;
    bw.r_f2 = f2r.remainder;
    fx::FixedTensor hn({seq, d}, fp);
    for (size_t i = 0; i < hn.data.size(); i++) hn.data[i] = u.data[i] + bw.f2.data[i];
    h = hn;
    tr.h.push_back(h);
    tr.blocks.push_back(std::move(bw));
  }

  auto fin = norm_fixed(cfg, h, qw.final_gain, qw.final_bias, tables.rsqrt);
  tr.head_x = fin.out;
  tr.lk_final_norm = std::move(fin.lookups);
  auto lr = fx::fixed_matmul_with_remainder(tr.head_x, qw.lm_head);
  tr.logits = lr.product;
  tr.head_r = lr.remainder;
  return tr;
}

Mat logits_for(const Weights& w, const QuantizedWeights& qw, const TableSet& tables,
               const std::vector<uint32_t>& tokens, RunMode mode) {
  if (mode == RunMode::EXACT) {
    return forward_exact(w, tokens).logits;
  }
  LutTrace tr = forward_lut(qw, tables, tokens);
  Mat m(tr.logits.shape[0], tr.logits.shape[1]);
  fx::FixedParams fp{w.cfg.frac_bits};
  for (size_t i = 0; i < tr.logits.data.size(); i++)
    m.a[i] = fx::from_fixed(tr.logits.data[i], fp);
  return m;
}

PerplexityResult perplexity(const Weights& w, const std::vector<uint32_t>& corpus,
                            RunMode mode) {
  if (corpus.size() < 2) throw std::invalid_argument("corpus must hold at least 2 tokens");
  QuantizedWeights qw;
  TableSet tables = TableSet::build(fx::FixedParams{w.cfg.frac_bits});
  if (mode == RunMode::LUT) qw = quantize_weights(w);

  double nll_sum = 0.0;
  uint64_t count = 0;
  size_t window = w.cfg.max_seq;
  for (size_t start = 0; start + 1 < corpus.size(); start += window - 1) {
    size_t len = std::min(window, corpus.size() - start);
    if (len < 2) break;
    std::vector<uint32_t> tokens(corpus.begin() + start, corpus.begin() + start + len);
    Mat logits = logits_for(w, qw, tables, tokens, mode);
    for (size_t t = 0; t + 1 < tokens.size(); t++) {
      // log-softmax in double precision
      double maxv = -1e300;
      for (uint32_t j = 0; j < logits.cols; j++) maxv = std::max(maxv, logits.at(t, j));
      double denom = 0.0;
      for (uint32_t j = 0; j < logits.cols; j++)
        denom += std::exp(logits.at(t, j) - maxv);
      double logp = logits.at(t, tokens[t + 1]) - maxv - std::log(denom);
      nll_sum -= logp;
      count++;
    }
  }
  PerplexityResult res;
  res.mode = mode;
  res.n_tokens = count;
  res.ppl = std::exp(nll_sum / static_cast<double>(count));
  return res;
}

// ---- weight files ----

static void append_tensor(Bytes& blob, json& index, const std::string& name,
                          const fx::FixedTensor& t) {
  Bytes b = t.serialize();
  json e;
  e["name"] = name;
  e["offset"] = blob.size();
  e["size"] = b.size();
  index.push_back(e);
  put_bytes(blob, b);
}

static Bytes weights_blob(const Weights& w, json& index) {
  QuantizedWeights q = quantize_weights(w);
  Bytes blob;
  append_tensor(blob, index, "tok_emb", q.tok_emb);
  append_tensor(blob, index, "pos_emb", q.pos_emb);
  fx::FixedParams fp{w.cfg.frac_bits};
  for (size_t l = 0; l < q.layers.size(); l++) {
    const auto& ql = q.layers[l];
    std::string p = "layer" + std::to_string(l) + ".";
    append_tensor(blob, index, p + "wq", ql.wq);
    append_tensor(blob, index, p + "wk", ql.wk);
    append_tensor(blob, index, p + "wv", ql.wv);
    append_tensor(blob, index, p + "wo", ql.wo);
    append_tensor(blob, index, p + "w1", ql.w1);
    append_tensor(blob, index, p + "w2", ql.w2);
    auto vec_tensor = [&](const std::vector<int64_t>& v) {
      fx::FixedTensor t({static_cast<uint32_t>(v.size())}, fp);
      t.data = v;
      return t;
    };
    append_tensor(blob, index, p + "norm1_gain", vec_tensor(ql.norm1_gain));
    append_tensor(blob, index, p + "norm1_bias", vec_tensor(ql.norm1_bias));
    append_tensor(blob, index, p + "norm2_gain", vec_tensor(ql.norm2_gain));
    append_tensor(blob, index, p + "norm2_bias", vec_tensor(ql.norm2_bias));
  }
  auto vec_tensor = [&](const std::vector<int64_t>& v) {
    fx::FixedTensor t({static_cast<uint32_t>(v.size())}, fp);
    t.data = v;
    return t;
  };
  append_tensor(blob, index, "final_gain", vec_tensor(q.final_gain));
  append_tensor(blob, index, "final_bias", vec_tensor(q.final_bias));
  append_tensor(blob, index, "lm_head", q.lm_head);
  return blob;
}

void save_weights(const Weights& w, const std::string& path_base) {
  json index = json::array();
  Bytes blob = weights_blob(w, index);
  json manifest;
  manifest["config"] = json::parse(w.cfg.to_json());
  manifest["tensors"] = index;
  manifest["blob_sha256"] = digest_hex(Sha256::of(blob));
  std::ofstream jf(path_base + ".json");
  if (!jf) throw std::runtime_error("cannot write " + path_base + ".json");
  jf << manifest.dump(2) << "\n";
  std::ofstream bf(path_base + ".bin", std::ios::binary);
  if (!bf) throw std::runtime_error("cannot write " + path_base + ".bin");
  bf.write(reinterpret_cast<const char*>(blob.data()), blob.size());
}

Weights load_weights(const std::string& path_base) {
  std::ifstream jf(path_base + ".json");
  if (!jf) throw std::runtime_error("cannot read " + path_base + ".json");
  json manifest = json::parse(jf);
  ModelConfig cfg = ModelConfig::from_json(manifest.at("config").dump());
  std::ifstream bf(path_base + ".bin", std::ios::binary);
  if (!bf) throw std::runtime_error("cannot read " + path_base + ".bin");
  Bytes blob((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());
  if (manifest.contains("blob_sha256") &&
      manifest["blob_sha256"].get<std::string>() != digest_hex(Sha256::of(blob)))
    throw std::runtime_error("weight blob digest mismatch");

  fx::FixedParams fp{cfg.frac_bits};
  auto tensor_named = [&](const std::string& name) {
    for (const auto& e : manifest.at("tensors")) {
      if (e.at("name").get<std::string>() == name) {
        size_t off = e.at("offset").get<size_t>(), sz = e.at("size").get<size_t>();
        if (off + sz > blob.size()) throw std::runtime_error("tensor out of blob bounds");
        return fx::FixedTensor::deserialize(Bytes(blob.begin() + off, blob.begin() + off + sz));
      }
    }
    throw std::runtime_error("missing tensor: " + name);
  };
  auto mat_named = [&](const std::string& name) {
    fx::FixedTensor t = tensor_named(name);
    Mat m(t.shape[0], t.shape.size() > 1 ? t.shape[1] : 1);
    for (size_t i = 0; i < t.data.size(); i++) m.a[i] = fx::from_fixed(t.data[i], fp);
    return m;
  };
  auto vec_named = [&](const std::string& name) {
    fx::FixedTensor t = tensor_named(name);
    std::vector<double> v(t.data.size());
    for (size_t i = 0; i < t.data.size(); i++) v[i] = fx::from_fixed(t.data[i], fp);
    return v;
  };

  Weights w;
  w.cfg = cfg;
  w.tok_emb = mat_named("tok_emb");
  w.pos_emb = mat_named("pos_emb");
  w.layers.resize(cfg.num_layers);
  for (uint32_t l = 0; l < cfg.num_layers; l++) {
    std::string p = "layer" + std::to_string(l) + ".";
    auto& lw = w.layers[l];
    lw.wq = mat_named(p + "wq");
    lw.wk = mat_named(p + "wk");
    lw.wv = mat_named(p + "wv");
    lw.wo = mat_named(p + "wo");
    lw.w1 = mat_named(p + "w1");
    lw.w2 = mat_named(p + "w2");
    lw.norm1_gain = vec_named(p + "norm1_gain");
    lw.norm1_bias = vec_named(p + "norm1_bias");
    lw.norm2_gain = vec_named(p + "norm2_gain");
    lw.norm2_bias = vec_named(p + "norm2_bias");
  }
  w.final_gain = vec_named("final_gain");
  w.final_bias = vec_named("final_bias");
  w.lm_head = mat_named("lm_head");
  return w;
}

Digest model_digest(const Weights& w, const TableSet& tables) {
  json index = json::array();
  Bytes blob = weights_blob(w, index);
  Sha256 h;
  h.update(std::string("nanozk-model-v1"));
  std::string cfg = w.cfg.to_json();
  h.update(cfg);
  h.update(blob);
  for (const auto& d : tables.digests()) h.update(d.data(), d.size());
  return h.finish();
}

}  // namespace nanozk::nn
