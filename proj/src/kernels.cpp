#include "hapstack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hapstack::kernels {
namespace {

// Register tile of the linear kernel: kTileRows output rows by kTileCols
// output columns, accumulated over the full input width. A column strip of w
// (in x kTileCols) stays hot in L2 while every row tile streams past it.
constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 64;

template <std::size_t Rows, std::size_t Cols>
inline void linear_tile(const float* x, const float* w, const float* bias,
                        float* y, std::size_t in, std::size_t out) {
  float acc[Rows][Cols] = {};
  for (std::size_t k = 0; k < in; ++k) {
    const float* wk = w + k * out;
    for (std::size_t r = 0; r < Rows; ++r) {
      const float xv = x[r * in + k];
#pragma omp simd
      for (std::size_t c = 0; c < Cols; ++c) acc[r][c] += xv * wk[c];
    }
  }
  for (std::size_t r = 0; r < Rows; ++r) {
#pragma omp simd
    for (std::size_t c = 0; c < Cols; ++c) y[r * out + c] = acc[r][c] + bias[c];
  }
}

// Edge tile with runtime extents; same per-element operation order as
// linear_tile so a row's result does not depend on where it lands in a batch.
inline void linear_edge(const float* x, const float* w, const float* bias,
                        float* y, std::size_t rows, std::size_t cols,
                        std::size_t in, std::size_t out) {
  float acc[kTileRows][kTileCols] = {};
  for (std::size_t k = 0; k < in; ++k) {
    const float* wk = w + k * out;
    for (std::size_t r = 0; r < rows; ++r) {
      const float xv = x[r * in + k];
      for (std::size_t c = 0; c < cols; ++c) acc[r][c] += xv * wk[c];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) y[r * out + c] = acc[r][c] + bias[c];
  }
}

}  // namespace

void linear(std::span<const float> x, std::span<const float> w,
            std::span<const float> bias, std::span<float> y, std::size_t rows,
            std::size_t in, std::size_t out) {
  const auto strips = static_cast<std::ptrdiff_t>((out + kTileCols - 1) / kTileCols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < strips; ++s) {
    const std::size_t col = static_cast<std::size_t>(s) * kTileCols;
    const std::size_t cols = std::min(kTileCols, out - col);
    for (std::size_t row = 0; row < rows; row += kTileRows) {
      const std::size_t nrows = std::min(kTileRows, rows - row);
      const float* xp = x.data() + row * in;
      const float* wp = w.data() + col;
      float* yp = y.data() + row * out + col;
      if (nrows == kTileRows && cols == kTileCols) {
        linear_tile<kTileRows, kTileCols>(xp, wp, bias.data() + col, yp, in, out);
      } else {
        linear_edge(xp, wp, bias.data() + col, yp, nrows, cols, in, out);
      }
    }
  }
}

void add_inplace(std::span<float> acc, std::span<const float> x) {
  const auto n = static_cast<std::ptrdiff_t>(acc.size());
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] += x[i];
}

void layer_norm(std::span<float> x, std::span<const float> gamma,
                std::span<const float> beta, std::size_t rows,
                std::size_t width, float epsilon) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    float* row = x.data() + static_cast<std::size_t>(r) * width;
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
#pragma omp simd
    for (std::size_t c = 0; c < width; ++c) {
      row[c] = (row[c] - mean) * inv * gamma[c] + beta[c];
    }
  }
}

void gelu(std::span<float> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const float v = x[i];
    x[i] = 0.5f * v * (1.0f + std::erf(v * 0.70710678118654752f));
  }
}

void tanh_inplace(std::span<float> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
}

void attention(std::span<const float> q, std::span<const float> k,
               std::span<const float> v, std::span<const std::uint8_t> mask,
               std::size_t batch, std::size_t seq_len, std::size_t hidden,
               std::size_t heads, std::span<float> context,
               std::span<float> probs) {
  const std::size_t head_dim = hidden / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim));
  const auto units = static_cast<std::ptrdiff_t>(batch * heads);
#pragma omp parallel
  {
    std::vector<float> p(seq_len);
    std::vector<float> acc(head_dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t u = 0; u < units; ++u) {
      const std::size_t b = static_cast<std::size_t>(u) / heads;
      const std::size_t h = static_cast<std::size_t>(u) % heads;
      const std::size_t base = b * seq_len * hidden + h * head_dim;
      const std::uint8_t* m = mask.data() + b * seq_len;
      for (std::size_t i = 0; i < seq_len; ++i) {
        const float* qi = q.data() + base + i * hidden;
        // Column order is sequential everywhere below: a masked column adds an
        // exact zero, so padding a sequence leaves its real rows bit-identical.
        float max_score = kMaskedScore;
        for (std::size_t j = 0; j < seq_len; ++j) {
          const float* kj = k.data() + base + j * hidden;
          float dot = 0.0f;
          for (std::size_t d = 0; d < head_dim; ++d) dot += qi[d] * kj[d];
          p[j] = dot * scale + (m[j] ? 0.0f : kMaskedScore);
          max_score = std::max(max_score, p[j]);
        }
        float sum = 0.0f;
        for (std::size_t j = 0; j < seq_len; ++j) {
          p[j] = std::exp(p[j] - max_score);
          sum += p[j];
        }
        const float inv = 1.0f / sum;
        for (std::size_t j = 0; j < seq_len; ++j) p[j] *= inv;

        std::fill(acc.begin(), acc.end(), 0.0f);
        for (std::size_t j = 0; j < seq_len; ++j) {
          const float pj = p[j];
          const float* vj = v.data() + base + j * hidden;
#pragma omp simd
          for (std::size_t d = 0; d < head_dim; ++d) acc[d] += pj * vj[d];
        }
        std::copy(acc.begin(), acc.end(), context.data() + base + i * hidden);
        if (!probs.empty()) {
          std::copy(p.begin(), p.end(),
                    probs.data() + ((b * heads + h) * seq_len + i) * seq_len);
        }
      }
    }
  }
}

}  // namespace hapstack::kernels
