#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace thermoscope {

// Dense row-major tensor; the last dimension is contiguous.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(numel_of(shape), T{}) {}

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
            n *= static_cast<std::size_t>(d);
        }
        return s.empty() ? 0 : n;
    }

    std::size_t numel() const { return v.size(); }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    T& at(int i, int j, int k) {
        return v[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    const T& at(int i, int j, int k) const {
        return v[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }

    void fill(T value) { std::fill(v.begin(), v.end(), value); }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

}  // namespace thermoscope
