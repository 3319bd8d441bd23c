#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "scs/rng.hpp"
#include "scs/signal.hpp"

namespace scs {

enum class PhantomKind { moving_square, shifting_sparse, constant };

inline PhantomKind phantom_kind_from_name(const std::string& name) {
    if (name == "moving_square") return PhantomKind::moving_square;
    if (name == "shifting_sparse") return PhantomKind::shifting_sparse;
    if (name == "constant") return PhantomKind::constant;
    throw ParamError("unknown phantom kind: " + name);
}

struct PhantomParams {
    double value = 1.0;
    double background = 0.0;
    std::size_t square_size = 0; // 0 -> min(nx, ny) / 4, at least 2
    std::size_t square_stride = 1;
    std::size_t start_x = 0;
    std::size_t start_y = 0;
    std::size_t sparsity = 4; // nonzeros per frame for shifting_sparse
};

// Test videos: a bright square translating one stride per frame, the
// shifting-sparse multi-frame model (same nonzero values at fresh random
// positions in every frame, first-frame l2 norm capped at 1), or a constant
// volume.
inline MultiFrameSignal make_phantom(PhantomKind kind, std::array<std::size_t, 3> shape,
                                     const PhantomParams& params, const RngSpec& rng) {
    const std::size_t nx = shape[0], ny = shape[1], frames = shape[2];
    if (nx == 0 || ny == 0 || frames == 0)
        throw ShapeError("make_phantom: all dimensions must be >= 1");
    MultiFrameSignal out(nx, ny, frames, true);

    switch (kind) {
    case PhantomKind::constant: {
        out.data.fill(params.value);
        return out;
    }
    case PhantomKind::moving_square: {
        std::size_t size = params.square_size;
        if (size == 0) size = std::max<std::size_t>(2, std::min(nx, ny) / 4);
        const std::size_t last_x = params.start_x + params.square_stride * (frames - 1) + size;
        if (last_x > nx || params.start_y + size > ny)
            throw ParamError("make_phantom: square leaves the frame");
        out.data.fill(params.background);
        for (std::size_t b = 0; b < frames; ++b) {
            const std::size_t ox = params.start_x + params.square_stride * b;
            for (std::size_t x = ox; x < ox + size; ++x)
                for (std::size_t y = params.start_y; y < params.start_y + size; ++y)
                    out.data(x, y, b) = params.value;
        }
        return out;
    }
    case PhantomKind::shifting_sparse: {
        const std::size_t k = params.sparsity;
        const std::size_t n = nx * ny;
        if (k == 0 || k > n) throw ParamError("make_phantom: sparsity must be in [1, n]");
        auto engine = make_engine(rng);
        std::uniform_real_distribution<double> magnitude(0.25, 1.0);
        std::vector<double> values(k);
        double sq = 0.0;
        for (double& v : values) {
            v = magnitude(engine);
            sq += v * v;
        }
        const double l2 = std::sqrt(sq);
        if (l2 > 1.0)
            for (double& v : values) v /= l2;
        std::vector<std::size_t> pool(n);
        for (std::size_t b = 0; b < frames; ++b) {
            for (std::size_t i = 0; i < n; ++i) pool[i] = i;
            for (std::size_t j = 0; j < k; ++j) {
                std::uniform_int_distribution<std::size_t> pick(j, n - 1);
                std::swap(pool[j], pool[pick(engine)]);
                const std::size_t pixel = pool[j];
                out.data(pixel / ny, pixel % ny, b) = values[j];
            }
        }
        return out;
    }
    }
    throw ParamError("make_phantom: unknown kind");
}

} // namespace scs
