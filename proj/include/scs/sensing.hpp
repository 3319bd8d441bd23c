#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <string>

#include "scs/rng.hpp"
#include "scs/signal.hpp"
#include "scs/tensor.hpp"

namespace scs {

enum class MaskDistribution { gaussian, bernoulli01 };

inline std::string to_string(MaskDistribution d) {
    return d == MaskDistribution::gaussian ? "gaussian" : "bernoulli01";
}

// Diagonal entries of the per-frame modulation masks plus the precomputed
// gram diagonal R_j = sum_i diag[j,i]^2 (the diagonal of H H^T). The dense
// operator is never materialized outside test oracles.
struct MaskStack {
    Tensor diag;      // (n_x, n_y, B)
    Tensor gram_diag; // (n_x, n_y)
    MaskDistribution distribution_tag = MaskDistribution::gaussian;

    std::size_t nx() const { return diag.dim(0); }
    std::size_t ny() const { return diag.dim(1); }
    std::size_t frames() const { return diag.dim(2); }
    std::size_t pixels() const { return nx() * ny(); }

    void recompute_gram() {
        gram_diag = Tensor({nx(), ny()});
        const std::size_t frame_count = frames();
        for (std::size_t x = 0; x < nx(); ++x)
            for (std::size_t y = 0; y < ny(); ++y) {
                double acc = 0.0;
                for (std::size_t b = 0; b < frame_count; ++b) {
                    const double d = diag(x, y, b);
                    acc += d * d;
                }
                gram_diag(x, y) = acc;
            }
    }

    // Max relative deviation of the stored gram diagonal from a fresh
    // recomputation.
    double gram_residual() const {
        MaskStack copy;
        copy.diag = diag;
        copy.recompute_gram();
        double worst = 0.0;
        for (std::size_t i = 0; i < gram_diag.size(); ++i) {
            const double ref = std::max(1.0, std::fabs(copy.gram_diag[i]));
            worst = std::max(worst, std::fabs(copy.gram_diag[i] - gram_diag[i]) / ref);
        }
        return worst;
    }
};

inline MaskStack generate_masks(std::array<std::size_t, 3> shape, MaskDistribution dist,
                                const RngSpec& rng) {
    if (shape[0] == 0 || shape[1] == 0 || shape[2] == 0)
        throw ShapeError("generate_masks: all dimensions must be >= 1");
    MaskStack masks;
    masks.diag = Tensor({shape[0], shape[1], shape[2]});
    masks.distribution_tag = dist;
    auto engine = make_engine(rng);
    if (dist == MaskDistribution::gaussian) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t i = 0; i < masks.diag.size(); ++i) masks.diag[i] = normal(engine);
    } else {
        std::bernoulli_distribution coin(0.5);
        for (std::size_t i = 0; i < masks.diag.size(); ++i)
            masks.diag[i] = coin(engine) ? 1.0 : 0.0;
    }
    masks.recompute_gram();
    return masks;
}

inline void require_compatible(const MaskStack& masks, const MultiFrameSignal& x) {
    if (masks.diag.shape() != x.data.shape())
        throw ShapeError("mask/signal shape mismatch");
}

inline void require_compatible(const MaskStack& masks, const Measurement& e) {
    if (masks.nx() != e.nx() || masks.ny() != e.ny())
        throw ShapeError("mask/measurement shape mismatch");
}

// y[j] = sum_i diag[j,i] * x[j,i]; the per-pixel reduction runs in fixed
// frame order so results are bit-identical across runs.
inline Measurement forward(const MaskStack& masks, const MultiFrameSignal& x) {
    require_compatible(masks, x);
    Measurement y(masks.nx(), masks.ny());
    const std::size_t frames = masks.frames();
    const double* d = masks.diag.data();
    const double* s = x.data.data();
    double* out = y.data.data();
    const std::size_t pixels = masks.pixels();
    for (std::size_t j = 0; j < pixels; ++j) {
        double acc = 0.0;
        const std::size_t base = j * frames;
        for (std::size_t b = 0; b < frames; ++b) acc += d[base + b] * s[base + b];
        out[j] = acc;
    }
    return y;
}

// (H^T e)[j,i] = diag[j,i] * e[j]
inline MultiFrameSignal adjoint(const MaskStack& masks, const Measurement& e) {
    require_compatible(masks, e);
    MultiFrameSignal x(masks.nx(), masks.ny(), masks.frames());
    const std::size_t frames = masks.frames();
    const double* d = masks.diag.data();
    const double* in = e.data.data();
    double* out = x.data.data();
    for (std::size_t j = 0; j < masks.pixels(); ++j) {
        const std::size_t base = j * frames;
        for (std::size_t b = 0; b < frames; ++b) out[base + b] = d[base + b] * in[j];
    }
    return x;
}

// out[j] = e[j] / R_j, with the pseudo-inverse convention out[j] = 0 where
// R_j < clamp_eps (binary masks can zero a pixel across all frames). The
// number of clamped pixels is reported through `clamped` when non-null.
inline Measurement gram_apply_inverse(const MaskStack& masks, const Measurement& e,
                                      double clamp_eps, std::size_t* clamped = nullptr) {
    require_compatible(masks, e);
    if (!(clamp_eps > 0.0)) throw ParamError("gram_apply_inverse: clamp_eps must be > 0");
    Measurement out(masks.nx(), masks.ny());
    std::size_t clamp_count = 0;
    const double* r = masks.gram_diag.data();
    const double* in = e.data.data();
    double* o = out.data.data();
    for (std::size_t j = 0; j < masks.pixels(); ++j) {
        if (r[j] >= clamp_eps) {
            o[j] = in[j] / r[j];
        } else {
            o[j] = 0.0;
            ++clamp_count;
        }
    }
    out.noise_sigma = e.noise_sigma;
    if (clamped) *clamped = clamp_count;
    return out;
}

inline Measurement add_noise(const Measurement& y, double sigma, const RngSpec& rng) {
    if (sigma < 0.0) throw ParamError("add_noise: sigma must be >= 0");
    Measurement out = y;
    out.noise_sigma = sigma;
    if (sigma == 0.0) return out;
    auto engine = make_engine(rng);
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += normal(engine);
    return out;
}

} // namespace scs
