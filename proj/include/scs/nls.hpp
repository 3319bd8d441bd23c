#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "scs/codec.hpp"
#include "scs/dct.hpp"
#include "scs/parallel.hpp"
#include "scs/signal.hpp"

namespace scs {

// Nonlocal-similarity codec parameters: p_x x p_y spatial blocks spanning
// all B frames, grouped with their group_size most similar blocks found
// within search_window pixels of the reference origin. keep_per_group = 0
// means the default p_x * p_y * B coefficients per group.
struct NlsParams {
    std::size_t block_w = 8;
    std::size_t block_h = 8;
    std::size_t stride = 4;
    std::size_t group_size = 16;
    std::size_t search_window = 20;
    std::size_t keep_per_group = 0;

    std::size_t keep_for(std::size_t frames) const {
        return keep_per_group == 0 ? block_w * block_h * frames : keep_per_group;
    }
};

struct NlsGroup {
    // Block origins, reference first; each block spans all frames.
    std::vector<std::array<std::uint32_t, 2>> members;
    // Surviving DCT coefficients as (flat index into the
    // block_w x block_h x B x G group tensor, value) pairs.
    std::vector<std::pair<std::uint32_t, double>> coeffs;
};

struct NlsCode {
    NlsParams params;
    std::array<std::size_t, 3> shape{}; // (n_x, n_y, B)
    std::vector<NlsGroup> groups;
};

namespace detail {

inline void validate_nls_params(const NlsParams& p) {
    if (p.block_w == 0 || p.block_h == 0) throw ParamError("nls: block dimensions must be >= 1");
    if (p.stride < 1 || p.stride > p.block_w) throw ParamError("nls: stride must be in [1, block_w]");
    if (p.group_size < 1) throw ParamError("nls: group_size must be >= 1");
}

inline std::vector<std::size_t> block_grid(std::size_t extent, std::size_t block, std::size_t stride) {
    std::vector<std::size_t> positions;
    for (std::size_t p = 0; p + block <= extent; p += stride) positions.push_back(p);
    if (positions.empty() || positions.back() != extent - block) positions.push_back(extent - block);
    return positions;
}

inline void extract_block(const MultiFrameSignal& x, std::size_t ox, std::size_t oy,
                          std::size_t bw, std::size_t bh, double* out) {
    const std::size_t frames = x.frames();
    std::size_t idx = 0;
    for (std::size_t bx = 0; bx < bw; ++bx)
        for (std::size_t by = 0; by < bh; ++by)
            for (std::size_t b = 0; b < frames; ++b) out[idx++] = x.data(ox + bx, oy + by, b);
}

inline double block_sq_distance(const double* a, const double* b, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace detail

inline NlsCode nls_encode(const NlsParams& params, const MultiFrameSignal& x) {
    detail::validate_nls_params(params);
    if (params.block_w > x.nx() || params.block_h > x.ny())
        throw ParamError("nls: block larger than frame");

    const std::size_t bw = params.block_w, bh = params.block_h, frames = x.frames();
    const std::size_t block_len = bw * bh * frames;
    const auto xs = detail::block_grid(x.nx(), bw, params.stride);
    const auto ys = detail::block_grid(x.ny(), bh, params.stride);

    // Reference blocks in raster order (rows of y, then x).
    std::vector<std::array<std::uint32_t, 2>> origins;
    origins.reserve(xs.size() * ys.size());
    for (std::size_t gy : ys)
        for (std::size_t gx : xs)
            origins.push_back({static_cast<std::uint32_t>(gx), static_cast<std::uint32_t>(gy)});

    std::vector<std::vector<double>> blocks(origins.size());
    parallel_for(origins.size(), [&](std::size_t i) {
        blocks[i].resize(block_len);
        detail::extract_block(x, origins[i][0], origins[i][1], bw, bh, blocks[i].data());
    });

    NlsCode code;
    code.params = params;
    code.shape = x.shape();
    code.groups.resize(origins.size());
    const std::size_t keep = params.keep_for(frames);

    parallel_for(origins.size(), [&](std::size_t q) {
        const auto& ref = origins[q];
        // Candidates: grid blocks whose origin lies within the search window.
        std::vector<std::pair<double, std::size_t>> candidates;
        for (std::size_t c = 0; c < origins.size(); ++c) {
            if (c == q) continue;
            const std::size_t dx = origins[c][0] > ref[0] ? origins[c][0] - ref[0] : ref[0] - origins[c][0];
            const std::size_t dy = origins[c][1] > ref[1] ? origins[c][1] - ref[1] : ref[1] - origins[c][1];
            if (dx > params.search_window || dy > params.search_window) continue;
            candidates.emplace_back(
                detail::block_sq_distance(blocks[q].data(), blocks[c].data(), block_len), c);
        }
        std::sort(candidates.begin(), candidates.end());

        NlsGroup& group = code.groups[q];
        group.members.push_back(ref); // reference always first
        const std::size_t extras = std::min(params.group_size - 1, candidates.size());
        for (std::size_t i = 0; i < extras; ++i)
            group.members.push_back(origins[candidates[i].second]);

        const std::size_t group_count = group.members.size();
        Tensor stack({bw, bh, frames, group_count});
        for (std::size_t g = 0; g < group_count; ++g) {
            const double* src =
                g == 0 ? blocks[q].data() : blocks[candidates[g - 1].second].data();
            for (std::size_t i = 0; i < block_len; ++i)
                stack[i * group_count + g] = src[i];
        }

        Tensor coeffs = keep_top_k(dct_all_axes(stack, false), keep);
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            if (coeffs[i] != 0.0)
                group.coeffs.emplace_back(static_cast<std::uint32_t>(i), coeffs[i]);
    });

    return code;
}

inline MultiFrameSignal nls_decode(const NlsParams& params, const NlsCode& code,
                                   std::array<std::size_t, 3> shape) {
    detail::validate_nls_params(params);
    if (code.shape != shape) throw DecodeError("nls: code/shape mismatch");
    const std::size_t bw = params.block_w, bh = params.block_h, frames = shape[2];
    if (bw > shape[0] || bh > shape[1]) throw DecodeError("nls: block larger than frame");

    // Per-group inverse transforms are independent; aggregation below runs
    // in group order so the result does not depend on the thread count.
    std::vector<Tensor> decoded(code.groups.size());
    parallel_for(code.groups.size(), [&](std::size_t q) {
        const NlsGroup& group = code.groups[q];
        if (group.members.empty()) throw DecodeError("nls: group without members");
        const std::size_t group_count = group.members.size();
        Tensor coeffs({bw, bh, frames, group_count});
        for (const auto& [idx, value] : group.coeffs) {
            if (idx >= coeffs.size()) throw DecodeError("nls: coefficient index out of range");
            coeffs[idx] = value;
        }
        decoded[q] = dct_all_axes(coeffs, true);
    });

    MultiFrameSignal out(shape[0], shape[1], frames);
    Tensor coverage({shape[0], shape[1]});
    for (std::size_t q = 0; q < code.groups.size(); ++q) {
        const NlsGroup& group = code.groups[q];
        const Tensor& stack = decoded[q];
        const std::size_t group_count = group.members.size();
        for (std::size_t g = 0; g < group_count; ++g) {
            const std::size_t ox = group.members[g][0];
            const std::size_t oy = group.members[g][1];
            if (ox + bw > shape[0] || oy + bh > shape[1])
                throw DecodeError("nls: member block outside frame");
            std::size_t idx = 0;
            for (std::size_t bx = 0; bx < bw; ++bx)
                for (std::size_t by = 0; by < bh; ++by)
                    for (std::size_t b = 0; b < frames; ++b)
                        out.data(ox + bx, oy + by, b) += stack[(idx++) * group_count + g];
            for (std::size_t bx = 0; bx < bw; ++bx)
                for (std::size_t by = 0; by < bh; ++by) coverage(ox + bx, oy + by) += 1.0;
        }
    }

    for (std::size_t px = 0; px < shape[0]; ++px)
        for (std::size_t py = 0; py < shape[1]; ++py) {
            const double cov = coverage(px, py);
            if (cov > 0.0)
                for (std::size_t b = 0; b < frames; ++b) out.data(px, py, b) /= cov;
        }
    return out;
}

class NlsCodec : public Codec {
public:
    // The quality knob keep_per_group may vary over solver iterations; the
    // schedule maps an iteration index to a keep count (0 = the parameter
    // default). Constant by default. A scheduled codec instance belongs to
    // one solver run at a time.
    using KeepSchedule = std::function<std::size_t(std::size_t iteration)>;

    explicit NlsCodec(NlsParams params, double rho = 2.0, KeepSchedule schedule = {})
        : params_(params), rho_(rho), schedule_(std::move(schedule)),
          current_keep_(params.keep_per_group) {
        detail::validate_nls_params(params_);
    }

    std::string name() const override { return "nls"; }

    void begin_iteration(std::size_t iteration) const override {
        if (schedule_) current_keep_ = schedule_(iteration);
    }

    MultiFrameSignal project(const MultiFrameSignal& s) const override {
        NlsParams active = params_;
        active.keep_per_group = current_keep_;
        return nls_decode(active, nls_encode(active, s), s.shape());
    }

    // Bit estimate: kept coefficients cost 32 value bits plus a flat group
    // index each; every member origin costs ceil(log2 n_x) + ceil(log2 n_y).
    double rate_bits_per_sample(const std::array<std::size_t, 3>& shape) const override {
        const auto xs = detail::block_grid(shape[0], params_.block_w, params_.stride);
        const auto ys = detail::block_grid(shape[1], params_.block_h, params_.stride);
        std::vector<std::array<std::size_t, 2>> origins;
        for (std::size_t gy : ys)
            for (std::size_t gx : xs) origins.push_back({gx, gy});
        const double pos_bits = std::ceil(std::log2(double(std::max<std::size_t>(2, shape[0])))) +
                                std::ceil(std::log2(double(std::max<std::size_t>(2, shape[1]))));
        const std::size_t keep = params_.keep_for(shape[2]);
        double bits = 0.0;
        for (std::size_t q = 0; q < origins.size(); ++q) {
            std::size_t members = 1;
            for (std::size_t c = 0; c < origins.size(); ++c) {
                if (c == q) continue;
                const std::size_t dx = origins[c][0] > origins[q][0] ? origins[c][0] - origins[q][0]
                                                                     : origins[q][0] - origins[c][0];
                const std::size_t dy = origins[c][1] > origins[q][1] ? origins[c][1] - origins[q][1]
                                                                     : origins[q][1] - origins[c][1];
                if (dx <= params_.search_window && dy <= params_.search_window) ++members;
            }
            members = std::min(members, params_.group_size);
            const std::size_t entries = params_.block_w * params_.block_h * shape[2] * members;
            const double index_bits = std::ceil(std::log2(double(entries)));
            bits += double(std::min(keep, entries)) * (32.0 + index_bits) +
                    double(members) * pos_bits;
        }
        return bits / double(shape[0] * shape[1] * shape[2]);
    }

    double amplitude_bound() const override { return rho_; }

    const NlsParams& params() const { return params_; }

private:
    NlsParams params_;
    double rho_;
    KeepSchedule schedule_;
    mutable std::size_t current_keep_;
};

} // namespace scs
