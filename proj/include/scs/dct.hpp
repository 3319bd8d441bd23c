#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "scs/tensor.hpp"

namespace scs {

enum class Basis { spatial, dct };

// Tensor plus a tag tracking whether it currently lives in the signal or
// the coefficient domain.
struct CoeffTensor {
    Tensor data;
    Basis basis_tag = Basis::spatial;
};

namespace detail {

// Orthonormal DCT-II basis for length L, row-major: basis[k*L + n].
// Row k applied to a signal gives the k-th coefficient; the transpose is
// the exact inverse.
inline const std::vector<double>& dct_basis(std::size_t len) {
    static std::map<std::size_t, std::vector<double>> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(len);
    if (it != cache.end()) return it->second;
    std::vector<double> basis(len * len);
    const double scale0 = std::sqrt(1.0 / static_cast<double>(len));
    const double scale = std::sqrt(2.0 / static_cast<double>(len));
    for (std::size_t k = 0; k < len; ++k) {
        const double s = k == 0 ? scale0 : scale;
        for (std::size_t n = 0; n < (len + 1) / 2; ++n) {
            basis[k * len + n] =
                s * std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * len));
        }
        // Mirror half carries sign (-1)^k exactly, so constant inputs cancel
        // to a structural zero in every k > 0 row.
        for (std::size_t n = (len + 1) / 2; n < len; ++n) {
            const double mirrored = basis[k * len + (len - 1 - n)];
            basis[k * len + n] = k % 2 == 0 ? mirrored : -mirrored;
        }
    }
    return cache.emplace(len, std::move(basis)).first->second;
}

inline Tensor dct_axis(const Tensor& t, std::size_t axis, bool inverse) {
    const auto& shape = t.shape();
    const std::size_t len = shape[axis];
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
    const std::size_t outer = t.size() / (len * inner);
    const std::vector<double>& basis = dct_basis(len);

    Tensor out(t.shape());
    std::vector<double> line(len);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * len * inner + i;
            for (std::size_t n = 0; n < len; ++n) line[n] = t[base + n * inner];
            for (std::size_t k = 0; k < len; ++k) {
                double acc = 0.0;
                if (!inverse) {
                    const double* row = &basis[k * len];
                    for (std::size_t n = 0; n < len; ++n) acc += row[n] * line[n];
                } else {
                    for (std::size_t n = 0; n < len; ++n) acc += basis[n * len + k] * line[n];
                }
                out[base + k * inner] = acc;
            }
        }
    }
    return out;
}

} // namespace detail

// Separable orthonormal type-II DCT applied along every axis. Preserves the
// l2 norm (Parseval).
inline Tensor dct_all_axes(const Tensor& t, bool inverse = false) {
    if (t.rank() > 4) throw ShapeError("dct: rank above 4 is unsupported");
    Tensor out = t;
    for (std::size_t a = 0; a < t.rank(); ++a) out = detail::dct_axis(out, a, inverse);
    return out;
}

inline CoeffTensor dct_forward(const CoeffTensor& t) {
    if (t.basis_tag != Basis::spatial)
        throw ParamError("dct_forward expects a spatial-domain tensor");
    return {dct_all_axes(t.data, false), Basis::dct};
}

inline CoeffTensor dct_inverse(const CoeffTensor& t) {
    if (t.basis_tag != Basis::dct)
        throw ParamError("dct_inverse expects a coefficient-domain tensor");
    return {dct_all_axes(t.data, true), Basis::spatial};
}

// Keeps the k largest-magnitude entries, zeroing the rest. Ties are broken
// deterministically: the lowest flat index is retained first.
inline Tensor keep_top_k(const Tensor& t, std::size_t k) {
    if (k >= t.size()) return t;
    Tensor out(t.shape());
    if (k == 0) return out;
    std::vector<std::size_t> order(t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto larger = [&t](std::size_t a, std::size_t b) {
        const double ma = std::fabs(t[a]);
        const double mb = std::fabs(t[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k) - 1,
                     order.end(), larger);
    for (std::size_t i = 0; i < k; ++i) out[order[i]] = t[order[i]];
    return out;
}

inline CoeffTensor keep_top_k(const CoeffTensor& t, std::size_t k) {
    return {keep_top_k(t.data, k), t.basis_tag};
}

} // namespace scs
