#include "reference_encoder.hpp"

#include <cmath>

namespace hapstack::testing {
namespace {

using Matrix = std::vector<std::vector<double>>;

double at(const Tensor& t, std::size_t r, std::size_t c) { return t.data[r * t.shape[1] + c]; }
double at(const Tensor& t, std::size_t i) { return t.data[i]; }

Matrix dense(const Matrix& x, const Tensor& w, const Tensor& b) {
  const std::size_t in = w.shape[0];
  const std::size_t out = w.shape[1];
  Matrix y(x.size(), std::vector<double>(out));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < out; ++j) {
      double s = at(b, j);
      for (std::size_t k = 0; k < in; ++k) s += x[i][k] * at(w, k, j);
      y[i][j] = s;
    }
  }
  return y;
}

void normalize(Matrix& x, const Tensor& gamma, const Tensor& beta, double eps) {
  for (auto& row : x) {
    double mean = 0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    double var = 0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = (row[c] - mean) / std::sqrt(var + eps) * at(gamma, c) + at(beta, c);
    }
  }
}

}  // namespace

ReferenceOutput reference_forward(const TokenizedSequence& seq, const ModelWeights& w,
                                  const EncoderConfig& cfg) {
  const std::size_t n = seq.ids.size();
  const std::size_t hsz = cfg.hidden_size;
  const std::size_t heads = cfg.num_heads;
  const std::size_t dh = hsz / heads;

  Matrix x(n, std::vector<double>(hsz));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t d = 0; d < hsz; ++d) {
      x[t][d] = at(w.token_embedding, static_cast<std::size_t>(seq.ids[t]), d) +
                at(w.position_embedding, t, d);
    }
  }
  normalize(x, w.embedding_norm_gamma, w.embedding_norm_beta, cfg.layernorm_epsilon);

  ReferenceOutput out;
  for (const LayerWeights& L : w.layers) {
    const Matrix q = dense(x, L.query_weight, L.query_bias);
    const Matrix k = dense(x, L.key_weight, L.key_bias);
    const Matrix v = dense(x, L.value_weight, L.value_bias);
    Matrix ctx(n, std::vector<double>(hsz, 0.0));
    std::vector<std::vector<std::vector<double>>> layer_attn(heads, Matrix(n, std::vector<double>(n, 0.0)));
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> score(n, 0.0);
        double best = -1e300;
        for (std::size_t j = 0; j < n; ++j) {
          if (!seq.attention_mask[j]) continue;
          double dot = 0;
          for (std::size_t d = 0; d < dh; ++d) dot += q[i][h * dh + d] * k[j][h * dh + d];
          score[j] = dot / std::sqrt(static_cast<double>(dh));
          if (score[j] > best) best = score[j];
        }
        double z = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (seq.attention_mask[j]) z += std::exp(score[j] - best);
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double p = seq.attention_mask[j] ? std::exp(score[j] - best) / z : 0.0;
          layer_attn[h][i][j] = p;
          for (std::size_t d = 0; d < dh; ++d) ctx[i][h * dh + d] += p * v[j][h * dh + d];
        }
      }
    }
    out.attentions.push_back(std::move(layer_attn));

    Matrix attn = dense(ctx, L.attention_output_weight, L.attention_output_bias);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < hsz; ++d) attn[i][d] += x[i][d];
    }
    normalize(attn, L.attention_norm_gamma, L.attention_norm_beta, cfg.layernorm_epsilon);
    x = attn;

    Matrix up = dense(x, L.ffn_up_weight, L.ffn_up_bias);
    for (auto& row : up) {
      for (double& u : row) u = 0.5 * u * (1.0 + std::erf(u / std::sqrt(2.0)));
    }
    Matrix down = dense(up, L.ffn_down_weight, L.ffn_down_bias);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < hsz; ++d) down[i][d] += x[i][d];
    }
    normalize(down, L.ffn_norm_gamma, L.ffn_norm_beta, cfg.layernorm_epsilon);
    x = down;
  }

  Matrix pooled = dense(Matrix{x[0]}, w.pooler_weight, w.pooler_bias);
  for (double& p : pooled[0]) p = std::tanh(p);
  out.logits = dense(pooled, w.classifier_weight, w.classifier_bias)[0];
  return out;
}

}  // namespace hapstack::testing
