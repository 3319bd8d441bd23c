#pragma once

#include <array>
#include <cstddef>

#include "scs/tensor.hpp"

namespace scs {

// B-frame signal stored as an (n_x, n_y, B) tensor; n = n_x * n_y pixels.
// When `normalized` is set every entry lies in [0, 1].
struct MultiFrameSignal {
    Tensor data;
    bool normalized = false;

    MultiFrameSignal() = default;
    MultiFrameSignal(std::size_t nx, std::size_t ny, std::size_t frames,
                     bool normalized_flag = false)
        : data({nx, ny, frames}), normalized(normalized_flag) {}
    explicit MultiFrameSignal(Tensor t, bool normalized_flag = false)
        : data(std::move(t)), normalized(normalized_flag) {
        if (data.rank() != 3) throw ShapeError("multi-frame signal must have rank 3");
    }

    std::size_t nx() const { return data.dim(0); }
    std::size_t ny() const { return data.dim(1); }
    std::size_t frames() const { return data.dim(2); }
    std::size_t pixels() const { return nx() * ny(); }
    std::size_t total() const { return data.size(); }

    std::array<std::size_t, 3> shape() const { return {nx(), ny(), frames()}; }

    double& at(std::size_t x, std::size_t y, std::size_t b) { return data(x, y, b); }
    double at(std::size_t x, std::size_t y, std::size_t b) const { return data(x, y, b); }
};

// Single measurement frame y with the sigma of any injected noise (0 when
// noise-free).
struct Measurement {
    Tensor data;
    double noise_sigma = 0.0;

    Measurement() = default;
    Measurement(std::size_t nx, std::size_t ny) : data({nx, ny}) {}
    explicit Measurement(Tensor t, double sigma = 0.0)
        : data(std::move(t)), noise_sigma(sigma) {
        if (data.rank() != 2) throw ShapeError("measurement must have rank 2");
    }

    std::size_t nx() const { return data.dim(0); }
    std::size_t ny() const { return data.dim(1); }
    std::size_t pixels() const { return data.size(); }
};

} // namespace scs
