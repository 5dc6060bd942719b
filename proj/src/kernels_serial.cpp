#include <algorithm>
#include <cmath>
#include <vector>

#include "hapstack/kernels.hpp"

namespace hapstack::kernels::serial {

void linear(std::span<const float> x, std::span<const float> w,
            std::span<const float> bias, std::span<float> y, std::size_t rows,
            std::size_t in, std::size_t out) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < out; ++j) {
      float acc = 0.0f;
      for (std::size_t k = 0; k < in; ++k) acc += x[i * in + k] * w[k * out + j];
      y[i * out + j] = acc + bias[j];
    }
  }
}

void add_inplace(std::span<float> acc, std::span<const float> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

void layer_norm(std::span<float> x, std::span<const float> gamma,
                std::span<const float> beta, std::size_t rows,
                std::size_t width, float epsilon) {
  for (std::size_t r = 0; r < rows; ++r) {
    float* row = x.data() + r * width;
    float mean = 0.0f;
    for (std::size_t c = 0; c < width; ++c) mean += row[c];
    mean /= static_cast<float>(width);
    float var = 0.0f;
    for (std::size_t c = 0; c < width; ++c) {
      const float d = row[c] - mean;
      var += d * d;
    }
    var /= static_cast<float>(width);
    const float inv = 1.0f / std::sqrt(var + epsilon);
    for (std::size_t c = 0; c < width; ++c) {
      row[c] = (row[c] - mean) * inv * gamma[c] + beta[c];
    }
  }
}

void gelu(std::span<float> x) {
  for (float& v : x) v = 0.5f * v * (1.0f + std::erf(v * 0.70710678118654752f));
}

void tanh_inplace(std::span<float> x) {
  for (float& v : x) v = std::tanh(v);
}

void attention(std::span<const float> q, std::span<const float> k,
               std::span<const float> v, std::span<const std::uint8_t> mask,
               std::size_t batch, std::size_t seq_len, std::size_t hidden,
               std::size_t heads, std::span<float> context,
               std::span<float> probs) {
  const std::size_t head_dim = hidden / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim));
  std::vector<float> p(seq_len);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < seq_len; ++i) {
        const std::size_t qi = (b * seq_len + i) * hidden + h * head_dim;
        float max_score = kMaskedScore;
        for (std::size_t j = 0; j < seq_len; ++j) {
          const std::size_t kj = (b * seq_len + j) * hidden + h * head_dim;
          float dot = 0.0f;
          for (std::size_t d = 0; d < head_dim; ++d) dot += q[qi + d] * k[kj + d];
          p[j] = dot * scale + (mask[b * seq_len + j] ? 0.0f : kMaskedScore);
          max_score = std::max(max_score, p[j]);
        }
        float sum = 0.0f;
        for (std::size_t j = 0; j < seq_len; ++j) {
          p[j] = std::exp(p[j] - max_score);
          sum += p[j];
        }
        for (std::size_t j = 0; j < seq_len; ++j) p[j] /= sum;
        for (std::size_t d = 0; d < head_dim; ++d) {
          float acc = 0.0f;
          for (std::size_t j = 0; j < seq_len; ++j) {
            acc += p[j] * v[(b * seq_len + j) * hidden + h * head_dim + d];
          }
          context[qi + d] = acc;
        }
        if (!probs.empty()) {
          std::copy(p.begin(), p.end(),
                    probs.begin() + ((b * heads + h) * seq_len + i) * seq_len);
        }
      }
    }
  }
}

}  // namespace hapstack::kernels::serial
