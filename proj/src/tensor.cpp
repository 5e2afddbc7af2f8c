#include "prunekit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "prunekit/errors.hpp"

namespace prunekit {

std::size_t shape_product(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_string(std::span<const std::size_t> shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += " x ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape, float fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {
    for (std::size_t d : shape_)
        if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape_));
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    for (std::size_t d : shape_)
        if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape_));
    if (data_.size() != shape_product(shape_))
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<float> values) {
    return Tensor({rows, cols}, std::vector<float>(values));
}

Tensor Tensor::vector(std::initializer_list<float> values) {
    return Tensor({values.size()}, std::vector<float>(values));
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::size_t Tensor::count_zeros() const {
    return static_cast<std::size_t>(
        std::count_if(data_.begin(), data_.end(), [](float v) { return v == 0.0f; }));
}

bool Tensor::bit_equal(const Tensor& other) const {
    return shape_ == other.shape_ && data_.size() == other.data_.size() &&
           (data_.empty() ||
            std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

}  // namespace prunekit
