#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "scs/codec.hpp"
#include "scs/sensing.hpp"
#include "scs/signal.hpp"

namespace scs {

enum class StepMode { fixed, adaptive };
enum class InitMode { zero, backprojection };

struct SolverConfig {
    double step_mu = 1.0;
    std::size_t max_iters = 150;
    double residual_tol = 1e-8;
    StepMode step_mode = StepMode::fixed;
    double clamp_eps = 1e-12; // GAP gram pseudo-inverse clamp
    InitMode init_mode = InitMode::zero;

    void validate() const {
        if (!(step_mu > 0.0)) throw ParamError("solver: step_mu must be > 0");
        if (max_iters < 1) throw ParamError("solver: max_iters must be >= 1");
        if (residual_tol < 0.0) throw ParamError("solver: residual_tol must be >= 0");
        if (!(clamp_eps > 0.0)) throw ParamError("solver: clamp_eps must be > 0");
    }
};

struct IterationRecord {
    std::size_t iter = 0;
    double residual_norm = 0.0;
    std::optional<double> error_to_reference; // (1/sqrt(nB)) ||x^t - reference||
    double chosen_mu = 0.0;
    double wall_time_s = 0.0;
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    std::size_t iterations() const { return records.size(); }
    double final_residual() const {
        return records.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : records.back().residual_norm;
    }
};

struct SolveResult {
    MultiFrameSignal xhat;
    IterationTrace trace;
};

struct CspResult {
    MultiFrameSignal xhat;
    double residual = 0.0;
    std::size_t codeword_index = 0;
};

struct StepSearchResult {
    double mu = 0.0;
    double objective = 0.0;
};

struct Metrics {
    double mse = 0.0;
    double psnr_db = 0.0;
    std::vector<double> per_frame_psnr;
};

namespace detail {

inline Measurement residual(const MaskStack& masks, const Measurement& y,
                            const MultiFrameSignal& x) {
    Measurement e = forward(masks, x);
    for (std::size_t i = 0; i < e.data.size(); ++i) e.data[i] = y.data[i] - e.data[i];
    return e;
}

inline MultiFrameSignal take_step(const MaskStack& masks, const MultiFrameSignal& x,
                                  const Measurement& e, double mu, bool precondition,
                                  double clamp_eps) {
    Measurement g = precondition ? gram_apply_inverse(masks, e, clamp_eps) : e;
    MultiFrameSignal dir = adjoint(masks, g);
    MultiFrameSignal s = x;
    for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] += mu * dir.data[i];
    s.normalized = false;
    return s;
}

inline double normalized_error(const MultiFrameSignal& x, const MultiFrameSignal& ref) {
    return std::sqrt(squared_distance(x.data, ref.data) / double(x.total()));
}

} // namespace detail

// Exhaustive minimum-residual codeword selection (the brute-force oracle).
// Ties go to the lowest codeword index.
inline CspResult csp_recover(const EnumerableCodebook& book, const MaskStack& masks,
                             const Measurement& y) {
    if (book.codewords.empty()) throw CodecError("csp: empty codebook");
    if (book.codewords.size() > kCodebookGuard)
        throw CodebookTooLargeError("csp: codebook exceeds enumeration guard");
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < book.codewords.size(); ++i) {
        const Measurement e = detail::residual(masks, y, book.codewords[i]);
        const double sq = squared_norm(e.data);
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return {book.codewords[best], std::sqrt(best_sq), best};
}

// Minimizes the post-projection measurement residual
//   || y - H g(f(x_t + mu * d)) ||_2,   d = H^T e  (or H^T R^-1 e),
// over mu in [bracket.first, bracket.second]. The objective is piecewise
// constant in mu wherever the codec switches codewords, so derivative
// methods do not apply: a 33-point coarse scan is followed by a dense sweep
// and golden-section refinement around the best cell. The sweep makes the
// search expensive relative to a fixed step, which matches how the
// step-optimized solver behaves in practice. A flat objective returns the
// bracket midpoint.
inline StepSearchResult adaptive_step_search(const Codec& codec, const MaskStack& masks,
                                             const Measurement& y, const MultiFrameSignal& x_t,
                                             std::pair<double, double> bracket,
                                             bool precondition = false, double clamp_eps = 1e-12) {
    if (!(bracket.first < bracket.second))
        throw ParamError("adaptive_step_search: bracket must satisfy lo < hi");
    const Measurement e = detail::residual(masks, y, x_t);

    auto objective = [&](double mu) {
        const MultiFrameSignal s = detail::take_step(masks, x_t, e, mu, precondition, clamp_eps);
        const Measurement r = detail::residual(masks, y, codec.project(s));
        const double value = norm(r.data);
        if (!std::isfinite(value)) throw SearchError("adaptive_step_search: non-finite objective");
        return value;
    };

    const double span = bracket.second - bracket.first;
    constexpr std::size_t kCoarsePoints = 33;
    StepSearchResult result{bracket.first, std::numeric_limits<double>::infinity()};
    double lowest = std::numeric_limits<double>::infinity();
    double highest = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kCoarsePoints; ++i) {
        const double mu = bracket.first + span * double(i) / double(kCoarsePoints - 1);
        const double value = objective(mu);
        lowest = std::min(lowest, value);
        highest = std::max(highest, value);
        if (value < result.objective) result = {mu, value};
    }
    if (highest - lowest <= 1e-12 * std::max(1.0, highest)) {
        const double mid = 0.5 * (bracket.first + bracket.second);
        return {mid, objective(mid)};
    }

    constexpr std::size_t kFinePoints = 2048;
    for (std::size_t i = 0; i < kFinePoints; ++i) {
        const double mu = bracket.first + span * (double(i) + 0.5) / double(kFinePoints);
        const double value = objective(mu);
        if (value < result.objective) result = {mu, value};
    }

    const double cell = span / double(kFinePoints);
    double a = std::max(bracket.first, result.mu - cell);
    double b = std::min(bracket.second, result.mu + cell);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double m1 = b - golden * (b - a);
    double m2 = a + golden * (b - a);
    double f1 = objective(m1), f2 = objective(m2);
    for (int it = 0; it < 40 && (b - a) > 1e-12 * std::max(1.0, std::fabs(b)); ++it) {
        if (f1 <= f2) {
            b = m2;
            m2 = m1;
            f2 = f1;
            m1 = b - golden * (b - a);
            f1 = objective(m1);
        } else {
            a = m1;
            m1 = m2;
            f1 = f2;
            m2 = a + golden * (b - a);
            f2 = objective(m2);
        }
        if (f1 < result.objective) result = {m1, f1};
        if (f2 < result.objective) result = {m2, f2};
    }
    return result;
}

namespace detail {

inline MultiFrameSignal initial_iterate(const MaskStack& masks, const Measurement& y,
                                        const SolverConfig& config) {
    if (config.init_mode == InitMode::zero)
        return MultiFrameSignal(masks.nx(), masks.ny(), masks.frames());
    return adjoint(masks, gram_apply_inverse(masks, y, config.clamp_eps));
}

// Shared CbPGD/CbGAP loop; they differ only in whether the gradient step is
// preconditioned by R^-1.
inline SolveResult iterate_solver(const Codec& codec, const MaskStack& masks,
                                  const Measurement& y, const SolverConfig& config,
                                  const MultiFrameSignal* reference, bool precondition) {
    config.validate();
    require_compatible(masks, y);
    if (reference && reference->data.shape() != masks.diag.shape())
        throw ShapeError("solver: reference shape mismatch");

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    MultiFrameSignal x = initial_iterate(masks, y, config);
    IterationTrace trace;
    for (std::size_t t = 0; t < config.max_iters; ++t) {
        codec.begin_iteration(t);
        const Measurement e = residual(masks, y, x);
        IterationRecord rec;
        rec.iter = t;
        rec.residual_norm = norm(e.data);
        if (reference) rec.error_to_reference = normalized_error(x, *reference);
        rec.chosen_mu = config.step_mu;
        rec.wall_time_s = elapsed();
        trace.records.push_back(rec);
        // The residual stop only applies once a projection has run: zero and
        // backprojection starts are measurement-consistent for GAP (H H^T
        // R^-1 = I off clamped pixels) yet carry no codec structure.
        if (rec.residual_norm <= config.residual_tol && t > 0) break;

        double mu = config.step_mu;
        if (config.step_mode == StepMode::adaptive) {
            const auto search = adaptive_step_search(
                codec, masks, y, x, {config.step_mu / 8.0, 4.0 * config.step_mu}, precondition,
                config.clamp_eps);
            // The fixed step always lies inside the bracket; never do worse.
            const MultiFrameSignal s_fixed =
                take_step(masks, x, e, config.step_mu, precondition, config.clamp_eps);
            const double fixed_obj = norm(residual(masks, y, codec.project(s_fixed)).data);
            mu = search.objective <= fixed_obj ? search.mu : config.step_mu;
            trace.records.back().chosen_mu = mu;
        }

        const MultiFrameSignal s = take_step(masks, x, e, mu, precondition, config.clamp_eps);
        x = codec.project(s);
        trace.records.back().wall_time_s = elapsed();
    }
    return {std::move(x), std::move(trace)};
}

} // namespace detail

// Algorithm: e^t = y - H x^t; s^{t+1} = x^t + mu H^T e^t; x^{t+1} = g(f(s^{t+1})).
inline SolveResult cbpgd_recover(const Codec& codec, const MaskStack& masks, const Measurement& y,
                                 const SolverConfig& config,
                                 const MultiFrameSignal* reference = nullptr) {
    return detail::iterate_solver(codec, masks, y, config, reference, false);
}

// Same loop with the Euclidean-projection step s^{t+1} = x^t + mu H^T R^-1 e^t.
inline SolveResult cbgap_recover(const Codec& codec, const MaskStack& masks, const Measurement& y,
                                 const SolverConfig& config,
                                 const MultiFrameSignal* reference = nullptr) {
    return detail::iterate_solver(codec, masks, y, config, reference, true);
}

// MSE over all samples plus PSNR with peak 1.0 (signals are normalized to
// [0, 1]); a zero-error reconstruction reports +inf.
inline Metrics compute_metrics(const MultiFrameSignal& xhat, const MultiFrameSignal& x_true) {
    if (xhat.data.shape() != x_true.data.shape())
        throw ShapeError("compute_metrics: shape mismatch");
    auto psnr = [](double mse) {
        return mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
    };
    Metrics m;
    m.mse = squared_distance(xhat.data, x_true.data) / double(x_true.total());
    m.psnr_db = psnr(m.mse);
    const std::size_t n = x_true.pixels();
    for (std::size_t b = 0; b < x_true.frames(); ++b) {
        double acc = 0.0;
        for (std::size_t px = 0; px < x_true.nx(); ++px)
            for (std::size_t py = 0; py < x_true.ny(); ++py) {
                const double d = xhat.data(px, py, b) - x_true.data(px, py, b);
                acc += d * d;
            }
        m.per_frame_psnr.push_back(psnr(acc / double(n)));
    }
    return m;
}

} // namespace scs
