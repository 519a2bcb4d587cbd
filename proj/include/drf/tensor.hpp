#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace drf {

/// Row-major n-dimensional float32 array. The carrier type for images, PSF
/// stacks and light fields throughout the library.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, float fill = 0.0f) {
        shape_ = std::move(shape);
        data_.assign(checked_size(shape_), fill);
    }

    static Tensor from_data(std::vector<std::size_t> shape, std::vector<float> data) {
        if (checked_size(shape) != data.size())
            throw std::invalid_argument("Tensor: shape does not match data size");
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    // 2D / 3D / 4D accessors, no bounds check beyond the rank assumption.
    float& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    float at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    float& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    float at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    float& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    float at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

private:
    static std::size_t checked_size(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw std::invalid_argument("Tensor: zero-sized dimension");
            n *= d;
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<std::size_t> shape_;
    std::vector<float> data_;
};

} // namespace drf
