#include "nanozk/grad.hpp"

#include <cmath>
#include <stdexcept>

namespace nanozk::nn {

static double vec_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}
static double mat_sq(const Mat& m) {
  double s = 0.0;
  for (double x : m.a) s += x * x;
  return s;
}

double LayerGrads::sq_norm() const {
  return mat_sq(wq) + mat_sq(wk) + mat_sq(wv) + mat_sq(wo) + mat_sq(w1) + mat_sq(w2) +
         vec_sq(norm1_gain) + vec_sq(norm1_bias) + vec_sq(norm2_gain) + vec_sq(norm2_bias);
}

Grads Grads::zeros_like(const Weights& w) {
  Grads g;
  g.tok_emb = Mat(w.tok_emb.rows, w.tok_emb.cols);
  g.pos_emb = Mat(w.pos_emb.rows, w.pos_emb.cols);
  g.layers.resize(w.layers.size());
  for (size_t i = 0; i < w.layers.size(); i++) {
    const auto& l = w.layers[i];
    auto& gl = g.layers[i];
    gl.wq = Mat(l.wq.rows, l.wq.cols);
    gl.wk = Mat(l.wk.rows, l.wk.cols);
    gl.wv = Mat(l.wv.rows, l.wv.cols);
    gl.wo = Mat(l.wo.rows, l.wo.cols);
    gl.w1 = Mat(l.w1.rows, l.w1.cols);
    gl.w2 = Mat(l.w2.rows, l.w2.cols);
    gl.norm1_gain.assign(l.norm1_gain.size(), 0.0);
    gl.norm1_bias.assign(l.norm1_bias.size(), 0.0);
    gl.norm2_gain.assign(l.norm2_gain.size(), 0.0);
    gl.norm2_bias.assign(l.norm2_bias.size(), 0.0);
  }
  g.final_gain.assign(w.final_gain.size(), 0.0);
  g.final_bias.assign(w.final_bias.size(), 0.0);
  g.lm_head = Mat(w.lm_head.rows, w.lm_head.cols);
  return g;
}

static void axpy_mat(Mat& dst, const Mat& src, double s) {
  for (size_t i = 0; i < dst.a.size(); i++) dst.a[i] += s * src.a[i];
}
static void axpy_vec(std::vector<double>& dst, const std::vector<double>& src, double s) {
  for (size_t i = 0; i < dst.size(); i++) dst[i] += s * src[i];
}

void Grads::accumulate(const Grads& o, double s) {
  axpy_mat(tok_emb, o.tok_emb, s);
  axpy_mat(pos_emb, o.pos_emb, s);
  for (size_t i = 0; i < layers.size(); i++) {
    axpy_mat(layers[i].wq, o.layers[i].wq, s);
    axpy_mat(layers[i].wk, o.layers[i].wk, s);
    axpy_mat(layers[i].wv, o.layers[i].wv, s);
    axpy_mat(layers[i].wo, o.layers[i].wo, s);
    axpy_mat(layers[i].w1, o.layers[i].w1, s);
    axpy_mat(layers[i].w2, o.layers[i].w2, s);
    axpy_vec(layers[i].norm1_gain, o.layers[i].norm1_gain, s);
    axpy_vec(layers[i].norm1_bias, o.layers[i].norm1_bias, s);
    axpy_vec(layers[i].norm2_gain, o.layers[i].norm2_gain, s);
    axpy_vec(layers[i].norm2_bias, o.layers[i].norm2_bias, s);
  }
  axpy_vec(final_gain, o.final_gain, s);
  axpy_vec(final_bias, o.final_bias, s);
  axpy_mat(lm_head, o.lm_head, s);
}

double Grads::global_norm() const {
  double s = mat_sq(tok_emb) + mat_sq(pos_emb) + vec_sq(final_gain) + vec_sq(final_bias) +
             mat_sq(lm_head);
  for (const auto& l : layers) s += l.sq_norm();
  return std::sqrt(s);
}

void Grads::scale(double s) {
  for (auto& x : tok_emb.a) x *= s;
  for (auto& x : pos_emb.a) x *= s;
  for (auto& l : layers) {
    for (auto& x : l.wq.a) x *= s;
    for (auto& x : l.wk.a) x *= s;
    for (auto& x : l.wv.a) x *= s;
    for (auto& x : l.wo.a) x *= s;
    for (auto& x : l.w1.a) x *= s;
    for (auto& x : l.w2.a) x *= s;
    for (auto& x : l.norm1_gain) x *= s;
    for (auto& x : l.norm1_bias) x *= s;
    for (auto& x : l.norm2_gain) x *= s;
    for (auto& x : l.norm2_bias) x *= s;
  }
  for (auto& x : final_gain) x *= s;
  for (auto& x : final_bias) x *= s;
  for (auto& x : lm_head.a) x *= s;
}

namespace {

// d/dx of the activation functions.
double act_deriv(ActKind k, double x) {
  if (k == ActKind::GELU) {
    double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return cdf + x * pdf;
  }
  double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

// Backward through y = gain .* (x - mu) * rstd + bias for one row.
// dgain/dbias accumulated; returns dx.
void norm_backward_row(const ModelConfig& cfg, const double* x, const double* dy,
                       double mean, double rstd, const std::vector<double>& gain,
                       std::vector<double>& dgain, std::vector<double>& dbias, double* dx,
                       uint32_t d) {
  if (cfg.norm_kind == NormKind::LAYERNORM) {
    double sum_dyg = 0.0, sum_dyg_xhat = 0.0;
    for (uint32_t i = 0; i < d; i++) {
      double xhat = (x[i] - mean) * rstd;
      double dyg = dy[i] * gain[i];
      sum_dyg += dyg;
      sum_dyg_xhat += dyg * xhat;
      dgain[i] += dy[i] * xhat;
      dbias[i] += dy[i];
    }
    for (uint32_t i = 0; i < d; i++) {
      double xhat = (x[i] - mean) * rstd;
      double dyg = dy[i] * gain[i];
      dx[i] += rstd * (dyg - sum_dyg / d - xhat * sum_dyg_xhat / d);
    }
  } else {
    // RMSNorm: y_i = gain_i * x_i * rstd, rstd = (mean(x^2)+eps)^{-1/2}
    double sum_dyg_x = 0.0;
    for (uint32_t i = 0; i < d; i++) {
      double dyg = dy[i] * gain[i];
      sum_dyg_x += dyg * x[i];
      dgain[i] += dy[i] * x[i] * rstd;
    }
    double r3 = rstd * rstd * rstd;
    for (uint32_t i = 0; i < d; i++) {
      double dyg = dy[i] * gain[i];
      dx[i] += dyg * rstd - x[i] * r3 * sum_dyg_x / d;
    }
  }
}

void norm_backward(const ModelConfig& cfg, const Mat& x, const Mat& dy,
                   const std::vector<double>& means, const std::vector<double>& rstds,
                   const std::vector<double>& gain, std::vector<double>& dgain,
                   std::vector<double>& dbias, Mat& dx) {
  for (uint32_t r = 0; r < x.rows; r++)
    norm_backward_row(cfg, &x.a[size_t{r} * x.cols], &dy.a[size_t{r} * x.cols], means[r],
                      rstds[r], gain, dgain, dbias, &dx.a[size_t{r} * x.cols], x.cols);
}

}  // namespace

GradResult loglike_grad_with_loss(const Weights& w, const std::vector<uint32_t>& tokens,
                                  const std::vector<uint32_t>& targets) {
  if (tokens.size() != targets.size())
    throw std::invalid_argument("tokens/targets length mismatch");
  const ModelConfig& cfg = w.cfg;
  ExactTrace tr = forward_exact(w, tokens);
  uint32_t seq = static_cast<uint32_t>(tokens.size());
  uint32_t d = cfg.dim, hd = cfg.head_dim(), V = cfg.vocab;

  GradResult res;
  res.grads = Grads::zeros_like(w);
  Grads& g = res.grads;
  res.count = seq;

  // dJ/dlogits for J = sum_t log p(y_t | .)
  Mat dlogits(seq, V);
  for (uint32_t t = 0; t < seq; t++) {
    if (targets[t] >= V) throw std::invalid_argument("target out of vocabulary");
    double maxv = -1e300;
    for (uint32_t j = 0; j < V; j++) maxv = std::max(maxv, tr.logits.at(t, j));
    double denom = 0.0;
    for (uint32_t j = 0; j < V; j++) denom += std::exp(tr.logits.at(t, j) - maxv);
    for (uint32_t j = 0; j < V; j++) {
      double p = std::exp(tr.logits.at(t, j) - maxv) / denom;
      dlogits.at(t, j) = (j == targets[t] ? 1.0 : 0.0) - p;
    }
    res.sum_logp += tr.logits.at(t, targets[t]) - maxv - std::log(denom);
  }

  // LM head
  axpy_mat(g.lm_head, matmul_tn(tr.fin_norm, dlogits), 1.0);
  Mat dfin = matmul_nt(dlogits, w.lm_head);  // seq x d

  // final norm
  Mat dhL(seq, d);
  norm_backward(cfg, tr.h_final, dfin, tr.fin_mean, tr.fin_rstd, w.final_gain, g.final_gain,
                g.final_bias, dhL);

  // blocks in reverse
  Mat dout = dhL;
  double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  for (int li = static_cast<int>(cfg.num_layers) - 1; li >= 0; li--) {
    const LayerWeights& lw = w.layers[li];
    LayerGrads& gl = g.layers[li];
    const BlockTapes& t = tr.blocks[li];

    // out = u + f2
    Mat du = dout;
    Mat df2 = dout;
    // f2 = g * w2
    axpy_mat(gl.w2, matmul_tn(t.g, df2), 1.0);
    Mat dg = matmul_nt(df2, lw.w2);
    // g = act(f1)
    Mat df1(seq, cfg.d_ff());
    for (size_t i = 0; i < df1.a.size(); i++)
      df1.a[i] = dg.a[i] * act_deriv(cfg.act_kind, t.f1.a[i]);
    // f1 = n2 * w1
    axpy_mat(gl.w1, matmul_tn(t.n2, df1), 1.0);
    Mat dn2 = matmul_nt(df1, lw.w1);
    // n2 = norm(u)
    norm_backward(cfg, t.u, dn2, t.n2_mean, t.n2_rstd, lw.norm2_gain, gl.norm2_gain,
                  gl.norm2_bias, du);

    // u = x + attn_out
    Mat dx = du;
    Mat dattn = du;
    // attn_out = ctx * wo
    axpy_mat(gl.wo, matmul_tn(t.ctx, dattn), 1.0);
    Mat dctx = matmul_nt(dattn, lw.wo);

    Mat dq(seq, d), dk(seq, d), dv(seq, d);
    for (uint32_t hIdx = 0; hIdx < cfg.num_heads; hIdx++) {
      uint32_t off = hIdx * hd;
      const Mat& p = t.probs[hIdx];
      // ctx_h = p * v_h
      Mat dp(seq, seq);
      for (uint32_t i = 0; i < seq; i++)
        for (uint32_t j = 0; j <= i; j++) {
          double acc = 0.0;
          for (uint32_t c = 0; c < hd; c++) acc += dctx.at(i, off + c) * t.v.at(j, off + c);
          dp.at(i, j) = acc;
        }
      for (uint32_t j = 0; j < seq; j++)
        for (uint32_t c = 0; c < hd; c++) {
          double acc = 0.0;
          for (uint32_t i = j; i < seq; i++) acc += p.at(i, j) * dctx.at(i, off + c);
          dv.at(j, off + c) += acc;
        }
      // softmax rows: ds = p .* (dp - sum_j dp*p)
      Mat ds(seq, seq);
      for (uint32_t i = 0; i < seq; i++) {
        double dot = 0.0;
        for (uint32_t j = 0; j <= i; j++) dot += dp.at(i, j) * p.at(i, j);
        for (uint32_t j = 0; j <= i; j++)
          ds.at(i, j) = p.at(i, j) * (dp.at(i, j) - dot);
      }
      // s_ij = scale * <q_i, k_j>
      for (uint32_t i = 0; i < seq; i++)
        for (uint32_t j = 0; j <= i; j++) {
          double dsv = ds.at(i, j) * scale;
          if (dsv == 0.0) continue;
          for (uint32_t c = 0; c < hd; c++) {
            dq.at(i, off + c) += dsv * t.k.at(j, off + c);
            dk.at(j, off + c) += dsv * t.q.at(i, off + c);
          }
        }
    }
    // q = n1*wq etc.
    axpy_mat(gl.wq, matmul_tn(t.n1, dq), 1.0);
    axpy_mat(gl.wk, matmul_tn(t.n1, dk), 1.0);
    axpy_mat(gl.wv, matmul_tn(t.n1, dv), 1.0);
    Mat dn1 = matmul_nt(dq, lw.wq);
    axpy_mat(dn1, matmul_nt(dk, lw.wk), 1.0);
    axpy_mat(dn1, matmul_nt(dv, lw.wv), 1.0);
    norm_backward(cfg, t.x, dn1, t.n1_mean, t.n1_rstd, lw.norm1_gain, gl.norm1_gain,
                  gl.norm1_bias, dx);

    dout = dx;
  }

  // embeddings
  for (uint32_t tIdx = 0; tIdx < seq; tIdx++)
    for (uint32_t c = 0; c < d; c++) {
      g.tok_emb.at(tokens[tIdx], c) += dout.at(tIdx, c);
      g.pos_emb.at(tIdx, c) += dout.at(tIdx, c);
    }
  return res;
}

Grads loglike_grad(const Weights& w, const std::vector<uint32_t>& tokens,
                   const std::vector<uint32_t>& targets) {
  return loglike_grad_with_loss(w, tokens, targets).grads;
}

}  // namespace nanozk::nn
