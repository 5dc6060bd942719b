#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Dense kernels used by the encoder forward pass.
//
// hapstack::kernels holds the OpenMP-parallel, cache-blocked versions used in
// production. hapstack::kernels::serial holds straightforward single-threaded
// loops with the same signatures; tests check the two against each other and
// bench/ times them side by side.
//
// Parallel kernels only split work across independent output elements, never
// across a reduction, so results do not depend on the thread count.
namespace hapstack::kernels {

// Additive bias applied to masked attention columns before the row softmax.
inline constexpr float kMaskedScore = -1e9f;

// y[rows x out] = x[rows x in] * w[in x out] + bias[out]
void linear(std::span<const float> x, std::span<const float> w,
            std::span<const float> bias, std::span<float> y, std::size_t rows,
            std::size_t in, std::size_t out);

// acc += x, element-wise.
void add_inplace(std::span<float> acc, std::span<const float> x);

// Row-wise layer normalization of x[rows x width], in place.
void layer_norm(std::span<float> x, std::span<const float> gamma,
                std::span<const float> beta, std::size_t rows,
                std::size_t width, float epsilon);

// Exact (erf) gelu, in place.
void gelu(std::span<float> x);

void tanh_inplace(std::span<float> x);

// Scaled dot-product multi-head self-attention over a batch of equal-length
// sequences. q, k, v and context are [batch * seq_len x hidden]; head h owns
// columns [h * head_dim, (h + 1) * head_dim). mask is [batch * seq_len] with 1
// for real tokens. If probs is non-empty it receives the softmax weights as
// [batch][heads][seq_len][seq_len].
void attention(std::span<const float> q, std::span<const float> k,
               std::span<const float> v, std::span<const std::uint8_t> mask,
               std::size_t batch, std::size_t seq_len, std::size_t hidden,
               std::size_t heads, std::span<float> context,
               std::span<float> probs);

}  // namespace hapstack::kernels

namespace hapstack::kernels::serial {

void linear(std::span<const float> x, std::span<const float> w,
            std::span<const float> bias, std::span<float> y, std::size_t rows,
            std::size_t in, std::size_t out);
void add_inplace(std::span<float> acc, std::span<const float> x);
void layer_norm(std::span<float> x, std::span<const float> gamma,
                std::span<const float> beta, std::size_t rows,
                std::size_t width, float epsilon);
void gelu(std::span<float> x);
void tanh_inplace(std::span<float> x);
void attention(std::span<const float> q, std::span<const float> k,
               std::span<const float> v, std::span<const std::uint8_t> mask,
               std::size_t batch, std::size_t seq_len, std::size_t hidden,
               std::size_t heads, std::span<float> context,
               std::span<float> probs);

}  // namespace hapstack::kernels::serial
