#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "scs/error.hpp"

namespace scs {

// Dense row-major tensor of rank 1..4, double precision. The last axis is
// the fastest-varying one.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
        if (shape_.empty() || shape_.size() > 4)
            throw ShapeError("tensor rank must be between 1 and 4");
        std::size_t total = 1;
        for (std::size_t d : shape_) {
            if (d == 0) throw ShapeError("tensor dimension must be positive");
            total *= d;
        }
        data_.assign(total, 0.0);
        init_strides();
    }

    Tensor(std::initializer_list<std::size_t> shape)
        : Tensor(std::vector<std::size_t>(shape)) {}

    std::size_t rank() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_[axis]; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    double& operator()(std::size_t i) { return data_[i]; }
    double operator()(std::size_t i) const { return data_[i]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * stride_[0] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * stride_[0] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[i * stride_[0] + j * stride_[1] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[i * stride_[0] + j * stride_[1] + k];
    }
    double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data_[i * stride_[0] + j * stride_[1] + k * stride_[2] + l];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[i * stride_[0] + j * stride_[1] + k * stride_[2] + l];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    void fill(double v) {
        for (double& x : data_) x = v;
    }

    Tensor& operator+=(const Tensor& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }

    Tensor& operator-=(const Tensor& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return *this;
    }

    Tensor& operator*=(double s) {
        for (double& x : data_) x *= s;
        return *this;
    }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    void init_strides() {
        // stride_[a] is the flat step of axis a; the last axis has stride 1.
        stride_ = {1, 1, 1};
        const std::size_t r = shape_.size();
        std::size_t s = 1;
        for (std::size_t a = r; a-- > 1;) {
            s *= shape_[a];
            stride_[a - 1] = s;
        }
    }

    void require_same_shape(const Tensor& other) const {
        if (!same_shape(other)) throw ShapeError("tensor shape mismatch");
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    std::vector<std::size_t> stride_{1, 1, 1};
};

inline double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("dot: tensor shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(const Tensor& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += t[i] * t[i];
    return acc;
}

inline double norm(const Tensor& t) { return std::sqrt(squared_norm(t)); }

inline double max_abs(const Tensor& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) m = std::max(m, std::fabs(t[i]));
    return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("max_abs_diff: tensor shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double squared_distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("squared_distance: tensor shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace scs
