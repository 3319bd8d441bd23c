// Test-only oracles kept independent of the library's operator paths: the
// sensing operator is materialized as a dense matrix in the stacked-frame
// layout [x_1; ...; x_B] and applied by explicit matrix arithmetic.
#pragma once

#include <cstddef>
#include <vector>

#include "scs/scs.hpp"

namespace oracle {

// Dense n x (n B) sensing matrix; column block i holds diag(D_i).
inline std::vector<double> dense_sensing_matrix(const scs::MaskStack& masks) {
    const std::size_t n = masks.pixels();
    const std::size_t frames = masks.frames();
    std::vector<double> H(n * n * frames, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < frames; ++i)
            H[j * (n * frames) + i * n + j] = masks.diag[j * frames + i];
    return H;
}

// Frame-major flattening matching the dense matrix layout.
inline std::vector<double> stack_frames(const scs::MultiFrameSignal& x) {
    const std::size_t n = x.pixels();
    const std::size_t frames = x.frames();
    std::vector<double> v(n * frames);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t b = 0; b < frames; ++b) v[b * n + j] = x.data[j * frames + b];
    return v;
}

inline std::vector<double> matvec(const std::vector<double>& m, const std::vector<double>& v,
                                  std::size_t rows, std::size_t cols) {
    std::vector<double> out(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[r] += m[r * cols + c] * v[c];
    return out;
}

inline std::vector<double> matvec_transposed(const std::vector<double>& m,
                                             const std::vector<double>& v, std::size_t rows,
                                             std::size_t cols) {
    std::vector<double> out(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[c] += m[r * cols + c] * v[r];
    return out;
}

// Dense H H^T (n x n).
inline std::vector<double> dense_gram(const scs::MaskStack& masks) {
    const std::size_t n = masks.pixels();
    const std::size_t cols = n * masks.frames();
    const auto H = dense_sensing_matrix(masks);
    std::vector<double> gram(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < cols; ++k) acc += H[r * cols + k] * H[c * cols + k];
            gram[r * n + c] = acc;
        }
    return gram;
}

inline scs::MultiFrameSignal random_signal(std::size_t nx, std::size_t ny, std::size_t frames,
                                           scs::RngSpec rng, double lo = -1.0, double hi = 1.0) {
    scs::MultiFrameSignal x(nx, ny, frames);
    auto engine = scs::make_engine(rng);
    std::uniform_real_distribution<double> uniform(lo, hi);
    for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = uniform(engine);
    return x;
}

} // namespace oracle
