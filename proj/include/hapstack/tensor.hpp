#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace hapstack {

// Dense row-major float tensor. Shape is kept alongside the data so that
// serialization and validation can check it against the model config.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims)
      : shape(std::move(dims)), data(element_count(shape), 0.0f) {}

  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::size_t b) { return a * b; });
  }

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape.front(); }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape.back(); }

  std::span<float> span() { return data; }
  std::span<const float> span() const { return data; }
  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data).subspan(r * cols(), cols());
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

}  // namespace hapstack
