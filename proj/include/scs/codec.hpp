#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "scs/dct.hpp"
#include "scs/rng.hpp"
#include "scs/signal.hpp"

namespace scs {

// Rate r in bits per signal entry, worst-case per-sample squared distortion
// delta, and the amplitude bound rho with ||x||_inf <= rho/2.
struct CodecDescriptor {
    double rate_bits_per_sample = 0.0;
    double distortion_bound = 0.0;
    double amplitude_bound = 1.0;
};

struct EnumerableCodebook {
    std::vector<MultiFrameSignal> codewords;
    CodecDescriptor descriptor;
};

// A compression code exposed through its combined decode(encode(.))
// mapping; the solvers only ever need this projection.
class Codec {
public:
    virtual ~Codec() = default;
    virtual std::string name() const = 0;
    virtual MultiFrameSignal project(const MultiFrameSignal& s) const = 0;
    virtual double rate_bits_per_sample(const std::array<std::size_t, 3>& shape) const = 0;
    virtual double amplitude_bound() const = 0;
    // Non-null for codecs whose codebook can be enumerated.
    virtual const EnumerableCodebook* codebook() const { return nullptr; }
    // Called by the iterative solvers before each iteration's projection;
    // codecs with a per-iteration quality schedule hook in here.
    virtual void begin_iteration(std::size_t) const {}
};

constexpr std::size_t kCodebookGuard = std::size_t{1} << 20;

// Nearest codeword in l2; ties resolve to the lowest codeword index.
inline std::size_t nearest_codeword(const EnumerableCodebook& book, const MultiFrameSignal& s) {
    if (book.codewords.empty()) throw CodecError("empty codebook");
    std::size_t best = 0;
    double best_dist = squared_distance(s.data, book.codewords[0].data);
    for (std::size_t i = 1; i < book.codewords.size(); ++i) {
        const double d = squared_distance(s.data, book.codewords[i].data);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

class ToyCodec : public Codec {
public:
    explicit ToyCodec(EnumerableCodebook book) : book_(std::move(book)) {
        if (book_.codewords.empty()) throw CodecError("empty codebook");
    }

    std::string name() const override { return "toy"; }

    MultiFrameSignal project(const MultiFrameSignal& s) const override {
        return book_.codewords[nearest_codeword(book_, s)];
    }

    double rate_bits_per_sample(const std::array<std::size_t, 3>&) const override {
        return book_.descriptor.rate_bits_per_sample;
    }

    double amplitude_bound() const override { return book_.descriptor.amplitude_bound; }

    const EnumerableCodebook* codebook() const override { return &book_; }

private:
    EnumerableCodebook book_;
};

namespace detail {

inline double binomial_count(std::size_t n, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) c *= double(n - i) / double(i + 1);
    return c;
}

inline std::vector<std::vector<std::uint32_t>> enumerate_k_subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur(k);
    for (std::size_t i = 0; i < k; ++i) cur[i] = static_cast<std::uint32_t>(i);
    while (true) {
        out.push_back(cur);
        // next lexicographic k-combination
        std::size_t i = k;
        while (i-- > 0) {
            if (cur[i] < n - k + i) {
                ++cur[i];
                for (std::size_t j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
                break;
            }
            if (i == 0) return out;
        }
    }
}

inline std::vector<std::vector<std::uint32_t>> sample_k_subsets(std::size_t n, std::size_t k,
                                                                std::size_t count,
                                                                std::mt19937_64& engine) {
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<std::uint32_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<std::uint32_t>(i);
    while (seen.size() < count) {
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(pool[i], pool[pick(engine)]);
        }
        std::vector<std::uint32_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(subset.begin(), subset.end());
        seen.insert(std::move(subset));
    }
    return {seen.begin(), seen.end()};
}

} // namespace detail

// Enumerable codebook of k-sparse multi-frame signals: every frame takes its
// support from a per-frame support list and all frames share the same k
// values, drawn from a uniform 2^quant_bits-level grid over [-rho/2, rho/2].
// With supports_per_frame = 0 all k-subsets are enumerated; otherwise that
// many distinct supports are sampled per frame.
inline EnumerableCodebook build_quantized_sparse_codec(std::size_t nx, std::size_t ny,
                                                       std::size_t frames, std::size_t k,
                                                       unsigned quant_bits, double rho,
                                                       const RngSpec& rng,
                                                       std::size_t supports_per_frame = 0) {
    const std::size_t n = nx * ny;
    if (k == 0 || k > n) throw ParamError("sparse codec: k must be in [1, n]");
    if (quant_bits == 0 || quant_bits > 16) throw ParamError("sparse codec: quant_bits must be in [1, 16]");
    if (!(rho > 0.0)) throw ParamError("sparse codec: rho must be > 0");

    auto engine = make_engine(rng);
    const double total_subsets = detail::binomial_count(n, k);
    std::vector<std::vector<std::vector<std::uint32_t>>> supports(frames);
    std::size_t per_frame;
    if (supports_per_frame == 0 || double(supports_per_frame) >= total_subsets) {
        if (total_subsets > double(kCodebookGuard))
            throw CodebookTooLargeError("sparse codec: too many supports to enumerate");
        auto all = detail::enumerate_k_subsets(n, k);
        per_frame = all.size();
        for (auto& s : supports) s = all;
    } else {
        per_frame = supports_per_frame;
        for (auto& s : supports) s = detail::sample_k_subsets(n, k, per_frame, engine);
    }

    const std::size_t levels = std::size_t{1} << quant_bits;
    double total = std::pow(double(per_frame), double(frames)) *
                   std::pow(double(levels), double(k));
    if (total > double(kCodebookGuard))
        throw CodebookTooLargeError("sparse codec: codebook exceeds enumeration guard");
    const std::size_t count = static_cast<std::size_t>(std::llround(total));

    std::vector<double> grid(levels);
    for (std::size_t i = 0; i < levels; ++i)
        grid[i] = -rho / 2.0 + double(i) * rho / double(levels - 1);

    EnumerableCodebook book;
    book.codewords.reserve(count);
    std::vector<std::size_t> support_idx(frames, 0);
    std::vector<std::size_t> value_idx(k, 0);
    while (true) {
        MultiFrameSignal c(nx, ny, frames);
        for (std::size_t f = 0; f < frames; ++f) {
            const auto& sup = supports[f][support_idx[f]];
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t pixel = sup[j];
                c.data(pixel / ny, pixel % ny, f) = grid[value_idx[j]];
            }
        }
        book.codewords.push_back(std::move(c));

        // odometer over value slots first, then per-frame supports
        std::size_t slot = 0;
        for (; slot < k; ++slot) {
            if (++value_idx[slot] < levels) break;
            value_idx[slot] = 0;
        }
        if (slot < k) continue;
        std::size_t f = 0;
        for (; f < frames; ++f) {
            if (++support_idx[f] < per_frame) break;
            support_idx[f] = 0;
        }
        if (f == frames) break;
    }

    const double step = rho / double(levels - 1);
    book.descriptor.rate_bits_per_sample =
        std::log2(double(book.codewords.size())) / double(n * frames);
    book.descriptor.distortion_bound = double(k) * (step / 2.0) * (step / 2.0) / double(n);
    book.descriptor.amplitude_bound = rho;
    return book;
}

// Frame-set codec: one 3D DCT over the whole (n_x, n_y, B) tensor with
// hard thresholding to the `keep` largest coefficients.
class Dct3dCodec : public Codec {
public:
    Dct3dCodec(std::size_t keep, double rho = 2.0) : keep_(keep), rho_(rho) {}

    std::string name() const override { return "dct3d"; }

    MultiFrameSignal project(const MultiFrameSignal& s) const override {
        Tensor coeffs = dct_all_axes(s.data, false);
        coeffs = keep_top_k(coeffs, keep_);
        return MultiFrameSignal(dct_all_axes(coeffs, true), false);
    }

    double rate_bits_per_sample(const std::array<std::size_t, 3>& shape) const override {
        const double total = double(shape[0] * shape[1] * shape[2]);
        const double index_bits = std::ceil(std::log2(total));
        return double(std::min<std::size_t>(keep_, std::size_t(total))) * (32.0 + index_bits) / total;
    }

    double amplitude_bound() const override { return rho_; }

    std::size_t keep() const { return keep_; }

private:
    std::size_t keep_;
    double rho_;
};

inline double per_sample_distortion(const MultiFrameSignal& x, const MultiFrameSignal& xhat) {
    return squared_distance(x.data, xhat.data) / double(x.total());
}

// Worst-case per-sample distortion over the corpus plus the codec's rate
// estimate (exact log2|C|/(nB) for enumerable codecs, a bit count for the
// transform codecs).
inline std::pair<double, double> estimate_rate_distortion(
    const Codec& codec, const std::vector<MultiFrameSignal>& corpus) {
    if (corpus.empty()) throw ParamError("estimate_rate_distortion: empty corpus");
    double rate = 0.0;
    double distortion = 0.0;
    for (const auto& x : corpus) {
        rate = std::max(rate, codec.rate_bits_per_sample(x.shape()));
        distortion = std::max(distortion, per_sample_distortion(x, codec.project(x)));
    }
    return {rate, distortion};
}

// Least-squares slope of 2r against log2(1/delta); estimates the
// alpha-dimension of a code family from sampled (rate, distortion) points.
inline double fit_alpha_dimension(const std::vector<std::pair<double, double>>& rate_distortion) {
    if (rate_distortion.size() < 2)
        throw ParamError("fit_alpha_dimension: need at least two points");
    double sx = 0, sy = 0;
    for (const auto& [r, d] : rate_distortion) {
        sx += std::log2(1.0 / d);
        sy += 2.0 * r;
    }
    const double mx = sx / double(rate_distortion.size());
    const double my = sy / double(rate_distortion.size());
    double num = 0, den = 0;
    for (const auto& [r, d] : rate_distortion) {
        const double dx = std::log2(1.0 / d) - mx;
        num += dx * (2.0 * r - my);
        den += dx * dx;
    }
    if (den == 0.0) throw ParamError("fit_alpha_dimension: degenerate distortion grid");
    return num / den;
}

} // namespace scs
