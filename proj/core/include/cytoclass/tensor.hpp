#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace cyto {

/// Dense NHWC float32 tensor. Vectors (e.g. dense-layer activations) use
/// shape (N, 1, 1, C) so every layer sees the same type.
struct Tensor {
    std::array<int, 4> shape{0, 0, 0, 0}; // N, H, W, C
    std::vector<float> data;

    Tensor() = default;
    Tensor(int n, int h, int w, int c)
        : shape{n, h, w, c},
          data(static_cast<std::size_t>(n) * h * w * c, 0.0f) {}

    int n() const { return shape[0]; }
    int h() const { return shape[1]; }
    int w() const { return shape[2]; }
    int c() const { return shape[3]; }

    std::size_t size() const { return data.size(); }

    float& at(int n, int h, int w, int c) {
        return data[((static_cast<std::size_t>(n) * shape[1] + h) * shape[2] + w) * shape[3] + c];
    }
    const float& at(int n, int h, int w, int c) const {
        return data[((static_cast<std::size_t>(n) * shape[1] + h) * shape[2] + w) * shape[3] + c];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

} // namespace cyto
