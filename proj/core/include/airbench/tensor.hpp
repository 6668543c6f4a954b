#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "airbench/errors.hpp"

namespace airbench {

// Dense row-major float tensor. Shape order for images is NCHW.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shape);
    Tensor(std::vector<int64_t> shape, std::vector<float> data);

    static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int64_t> shape, float value);

    const std::vector<int64_t>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& vec() { return data_; }
    const std::vector<float>& vec() const { return data_; }

    // Slow general accessor, mainly for tests and setup code. Kernels index
    // raw pointers directly.
    float& at(std::initializer_list<int64_t> idx);
    float at(std::initializer_list<int64_t> idx) const;

    // Fast 4-d accessor; valid only for rank-4 tensors.
    float& operator()(int64_t n, int64_t c, int64_t y, int64_t x) {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    float operator()(int64_t n, int64_t c, int64_t y, int64_t x) const {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }

    void fill(float value);
    void zero() { fill(0.0f); }
    bool all_finite() const;

    // Reinterpret as a new shape with the same element count.
    Tensor reshaped(std::vector<int64_t> shape) const;

private:
    std::vector<int64_t> shape_;
    std::vector<float> data_;
};

int64_t shape_numel(const std::vector<int64_t>& shape);
std::string shape_str(const std::vector<int64_t>& shape);

// Checkpoint archive: magic "ABT1", u32-LE tensor count, then per tensor
// u16-LE name length + UTF-8 name, u8 rank, rank x u64-LE extents, raw
// f32-LE payload. Round-trips bit-exactly.
using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_tensor_archive(const std::string& path, const NamedTensors& tensors);
NamedTensors load_tensor_archive(const std::string& path);

} // namespace airbench
