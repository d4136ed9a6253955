#pragma once

#include "msp_dst/common/parameters.hpp"
#include "msp_dst/encoder/tokenize.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

struct EncoderConfig {
  int dim = 64;
  int heads = 4;
  int layers = 2;
  int ffn = 128;
  int max_len = 128;  // also sizes the positional table

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

// Encoder segment ids: speaker crossed with "latest turn or earlier", plus
// the state suffix. The latest turn gets its own ids so that the change
// detectors do not have to infer recency from positions.
enum EncoderSegment : int {
  kEncCls = 0,
  kEncAgentLatest = 1,
  kEncUserLatest = 2,
  kEncAgentEarlier = 3,
  kEncUserEarlier = 4,
  kEncState = 5,
  kNumEncoderSegments = 6
};

// Per position of ctx (classification token included).
std::vector<int> encoder_segments(const TokenizedContext& ctx);

// Positions count back from the newest token (newest = 0) so the latest turn
// sees the same ids however long the history is. The classification token
// takes the last row of the table.
std::vector<int> encoder_positions(int length, int max_len);

template <class S>
struct ContextEncoding {
  Vec<S> cls;     // n
  Mat<S> tokens;  // |tokens| x n, classification token excluded
};

namespace detail {

template <class S>
struct LayerNormCache {
  Mat<S> xhat;
  Vec<S> rstd;
};

template <class S>
Mat<S> layer_norm(const Mat<S>& x, const Mat<S>& g, const Mat<S>& b, LayerNormCache<S>* cache) {
  constexpr S eps = S(1e-5);
  const Vec<S> mu = x.rowwise().mean();
  Mat<S> xc = x.colwise() - mu;
  Vec<S> rstd = (xc.array().square().rowwise().mean() + eps).rsqrt().matrix();
  Mat<S> xhat = rstd.asDiagonal() * xc;
  Mat<S> y = (xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

template <class S>
Mat<S> layer_norm_backward(const Mat<S>& dy, const LayerNormCache<S>& c, const Mat<S>& g, Mat<S>& dg,
                           Mat<S>& db) {
  dg.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  db.row(0) += dy.colwise().sum();
  const Mat<S> dxhat = (dy.array().rowwise() * g.row(0).array()).matrix();
  const S inv_n = S(1) / static_cast<S>(dy.cols());
  const Vec<S> m1 = dxhat.rowwise().sum() * inv_n;
  const Vec<S> m2 = (dxhat.array() * c.xhat.array()).rowwise().sum().matrix() * inv_n;
  Mat<S> dx = dxhat.colwise() - m1;
  dx.array() -= c.xhat.array().colwise() * m2.array();
  return c.rstd.asDiagonal() * dx;
}

template <class S>
inline constexpr S kGeluK = S(0.7978845608028654);  // sqrt(2 / pi)

// Vectorised forms over a whole activation matrix; tanh dominated the profile otherwise.
template <class S>
Mat<S> gelu_tanh_term(const Mat<S>& u) {
  const auto a = u.array();
  return (kGeluK<S> * (a + S(0.044715) * a * a * a)).tanh().matrix();
}

template <class S>
Mat<S> gelu(const Mat<S>& u, const Mat<S>& t) {
  return (S(0.5) * u.array() * (S(1) + t.array())).matrix();
}

template <class S>
Mat<S> gelu_grad(const Mat<S>& u, const Mat<S>& t) {
  const auto a = u.array();
  const auto ta = t.array();
  return (S(0.5) * (S(1) + ta) +
          S(0.5) * a * (S(1) - ta * ta) * kGeluK<S> * (S(1) + S(3) * S(0.044715) * a * a))
      .matrix();
}

template <class S>
void softmax_rows(Mat<S>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

}  // namespace detail

// Pre-LN bidirectional transformer over a frozen token table plus learned
// positional and segment embeddings. Parameters live in a shared
// ParameterSet under the "encoder." prefix; the token table is
// "embedding.table".
template <class S>
class TransformerEncoder {
 public:
  struct Layer {
    int ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
  };

  struct LayerCache {
    Mat<S> x_in;
    detail::LayerNormCache<S> ln1;
    Mat<S> a, q, k, v, o;
    std::vector<Mat<S>> probs;  // per head, L x L
    Mat<S> x1;
    detail::LayerNormCache<S> ln2;
    Mat<S> c, u, t, g;  // t caches the GELU tanh term
  };

  struct Cache {
    std::vector<int> ids, segments, positions;
    std::vector<LayerCache> layers;
    Mat<S> x_last;
    detail::LayerNormCache<S> lnf;
  };

  TransformerEncoder() = default;

  // Registers the parameters (zero-valued) in `params`.
  TransformerEncoder(const EncoderConfig& cfg, int vocab_size, ParameterSet<S>& params) : cfg_(cfg) {
    cfg.validate();
    const int n = cfg.dim;
    table_ = params.add("embedding.table", vocab_size, n, /*frozen=*/true);
    pos_ = params.add("encoder.position", cfg.max_len, n);
    seg_ = params.add("encoder.segment", kNumEncoderSegments, n);
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string p = "encoder.layer" + std::to_string(l) + ".";
      Layer L{};
      L.ln1_g = params.add(p + "ln1.gain", 1, n);
      L.ln1_b = params.add(p + "ln1.bias", 1, n);
      L.wq = params.add(p + "attn.wq", n, n);
      L.bq = params.add(p + "attn.bq", 1, n);
      L.wk = params.add(p + "attn.wk", n, n);
      L.bk = params.add(p + "attn.bk", 1, n);
      L.wv = params.add(p + "attn.wv", n, n);
      L.bv = params.add(p + "attn.bv", 1, n);
      L.wo = params.add(p + "attn.wo", n, n);
      L.bo = params.add(p + "attn.bo", 1, n);
      L.ln2_g = params.add(p + "ln2.gain", 1, n);
      L.ln2_b = params.add(p + "ln2.bias", 1, n);
      L.w1 = params.add(p + "ffn.w1", n, cfg.ffn);
      L.b1 = params.add(p + "ffn.b1", 1, cfg.ffn);
      L.w2 = params.add(p + "ffn.w2", cfg.ffn, n);
      L.b2 = params.add(p + "ffn.b2", 1, n);
      layers_.push_back(L);
    }
    lnf_g_ = params.add("encoder.final_ln.gain", 1, n);
    lnf_b_ = params.add("encoder.final_ln.bias", 1, n);
  }

  const EncoderConfig& config() const { return cfg_; }
  int table_handle() const { return table_; }

  void init(ParameterSet<S>& params, std::mt19937_64& rng) const {
    const int n = cfg_.dim;
    fill_normal(params[table_].value, 1.0, rng);
    fill_normal(params[pos_].value, 0.5, rng);
    fill_normal(params[seg_].value, 0.5, rng);
    const double wn = 1.0 / std::sqrt(static_cast<double>(n));
    const double resid = 1.0 / std::sqrt(2.0 * cfg_.layers);
    for (const auto& L : layers_) {
      params[L.ln1_g].value.setOnes();
      params[L.ln2_g].value.setOnes();
      fill_normal(params[L.wq].value, wn, rng);
      fill_normal(params[L.wk].value, wn, rng);
      fill_normal(params[L.wv].value, wn, rng);
      fill_normal(params[L.wo].value, wn * resid, rng);
      fill_normal(params[L.w1].value, wn, rng);
      fill_normal(params[L.w2].value, resid / std::sqrt(static_cast<double>(cfg_.ffn)), rng);
    }
    params[lnf_g_].value.setOnes();
  }

  // Rows of the result: classification token first, then one per token.
  Mat<S> forward(const ParameterSet<S>& P, const std::vector<int>& ids, const std::vector<int>& segments,
                 Cache* cache) const {
    const int L = static_cast<int>(ids.size());
    if (L < 1 || L > cfg_.max_len) throw DimensionError("encoder input length out of range");
    if (static_cast<int>(segments.size()) != L) throw DimensionError("segment count mismatch");
    const auto& table = P[table_].value;
    const auto positions = encoder_positions(L, cfg_.max_len);
    Mat<S> x(L, cfg_.dim);
    for (int i = 0; i < L; ++i) {
      const int id = ids[static_cast<std::size_t>(i)];
      if (id < 0 || id >= table.rows()) throw std::out_of_range("token id outside the vocabulary");
      x.row(i) = table.row(id) + P[pos_].value.row(positions[static_cast<std::size_t>(i)]) +
                 P[seg_].value.row(segments[static_cast<std::size_t>(i)]);
    }
    if (cache) {
      cache->ids = ids;
      cache->segments = segments;
      cache->positions = positions;
      cache->layers.assign(layers_.size(), {});
    }
    const int dh = cfg_.dim / cfg_.heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& W = layers_[l];
      LayerCache local;
      LayerCache& c = cache ? cache->layers[l] : local;
      c.x_in = x;
      c.a = detail::layer_norm(x, P[W.ln1_g].value, P[W.ln1_b].value, &c.ln1);
      c.q = (c.a * P[W.wq].value).rowwise() + P[W.bq].value.row(0);
      c.k = (c.a * P[W.wk].value).rowwise() + P[W.bk].value.row(0);
      c.v = (c.a * P[W.wv].value).rowwise() + P[W.bv].value.row(0);
      c.o.resize(L, cfg_.dim);
      c.probs.resize(static_cast<std::size_t>(cfg_.heads));
      for (int h = 0; h < cfg_.heads; ++h) {
        Mat<S>& pr = c.probs[static_cast<std::size_t>(h)];
        pr.noalias() = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose();
        pr *= scale;
        detail::softmax_rows(pr);
        c.o.middleCols(h * dh, dh).noalias() = pr * c.v.middleCols(h * dh, dh);
      }
      c.x1 = x + ((c.o * P[W.wo].value).rowwise() + P[W.bo].value.row(0));
      c.c = detail::layer_norm(c.x1, P[W.ln2_g].value, P[W.ln2_b].value, &c.ln2);
      c.u = (c.c * P[W.w1].value).rowwise() + P[W.b1].value.row(0);
      c.t = detail::gelu_tanh_term(c.u);
      c.g = detail::gelu(c.u, c.t);
      x = c.x1 + ((c.g * P[W.w2].value).rowwise() + P[W.b2].value.row(0));
    }
    if (cache) {
      cache->x_last = x;
      return detail::layer_norm(x, P[lnf_g_].value, P[lnf_b_].value, &cache->lnf);
    }
    return detail::layer_norm(x, P[lnf_g_].value, P[lnf_b_].value, static_cast<detail::LayerNormCache<S>*>(nullptr));
  }

  ContextEncoding<S> encode(const ParameterSet<S>& P, const TokenizedContext& ctx, Cache* cache = nullptr) const {
    Mat<S> h = forward(P, ctx.ids, encoder_segments(ctx), cache);
    ContextEncoding<S> out;
    out.cls = h.row(0).transpose();
    out.tokens = h.bottomRows(h.rows() - 1);
    return out;
  }

  // Accumulates parameter gradients given dLoss/dOutput (same layout as forward).
  void backward(ParameterSet<S>& P, const Cache& cache, const Mat<S>& dout) const {
    Mat<S> dx = detail::layer_norm_backward(dout, cache.lnf, P[lnf_g_].value, P[lnf_g_].grad, P[lnf_b_].grad);
    const int dh = cfg_.dim / cfg_.heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    const int L = static_cast<int>(dout.rows());
    for (std::size_t li = layers_.size(); li-- > 0;) {
      const Layer& W = layers_[li];
      const LayerCache& c = cache.layers[li];
      // feed-forward branch
      P[W.w2].grad.noalias() += c.g.transpose() * dx;
      P[W.b2].grad.row(0) += dx.colwise().sum();
      Mat<S> du = dx * P[W.w2].value.transpose();
      du.array() *= detail::gelu_grad(c.u, c.t).array();
      P[W.w1].grad.noalias() += c.c.transpose() * du;
      P[W.b1].grad.row(0) += du.colwise().sum();
      const Mat<S> dc = du * P[W.w1].value.transpose();
      Mat<S> dx1 = dx + detail::layer_norm_backward(dc, c.ln2, P[W.ln2_g].value, P[W.ln2_g].grad, P[W.ln2_b].grad);
      // attention branch
      P[W.wo].grad.noalias() += c.o.transpose() * dx1;
      P[W.bo].grad.row(0) += dx1.colwise().sum();
      const Mat<S> dO = dx1 * P[W.wo].value.transpose();
      Mat<S> dq(L, cfg_.dim), dk(L, cfg_.dim), dv(L, cfg_.dim);
      for (int h = 0; h < cfg_.heads; ++h) {
        const Mat<S>& pr = c.probs[static_cast<std::size_t>(h)];
        const auto dOh = dO.middleCols(h * dh, dh);
        Mat<S> dp = dOh * c.v.middleCols(h * dh, dh).transpose();
        dv.middleCols(h * dh, dh).noalias() = pr.transpose() * dOh;
        const Vec<S> rowdot = (dp.array() * pr.array()).rowwise().sum().matrix();
        Mat<S> ds = (pr.array() * (dp.colwise() - rowdot).array()).matrix() * scale;
        dq.middleCols(h * dh, dh).noalias() = ds * c.k.middleCols(h * dh, dh);
        dk.middleCols(h * dh, dh).noalias() = ds.transpose() * c.q.middleCols(h * dh, dh);
      }
      P[W.wq].grad.noalias() += c.a.transpose() * dq;
      P[W.bq].grad.row(0) += dq.colwise().sum();
      P[W.wk].grad.noalias() += c.a.transpose() * dk;
      P[W.bk].grad.row(0) += dk.colwise().sum();
      P[W.wv].grad.noalias() += c.a.transpose() * dv;
      P[W.bv].grad.row(0) += dv.colwise().sum();
      Mat<S> da = dq * P[W.wq].value.transpose();
      da.noalias() += dk * P[W.wk].value.transpose();
      da.noalias() += dv * P[W.wv].value.transpose();
      dx = dx1 + detail::layer_norm_backward(da, c.ln1, P[W.ln1_g].value, P[W.ln1_g].grad, P[W.ln1_b].grad);
    }
    for (int i = 0; i < L; ++i) {
      P[pos_].grad.row(cache.positions[static_cast<std::size_t>(i)]) += dx.row(i);
      P[seg_].grad.row(cache.segments[static_cast<std::size_t>(i)]) += dx.row(i);
      if (!P[table_].frozen) P[table_].grad.row(cache.ids[static_cast<std::size_t>(i)]) += dx.row(i);
    }
  }

 private:
  EncoderConfig cfg_;
  int table_ = -1, pos_ = -1, seg_ = -1, lnf_g_ = -1, lnf_b_ = -1;
  std::vector<Layer> layers_;
};

}  // namespace msp
