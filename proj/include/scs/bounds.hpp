#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scs/codec.hpp"
#include "scs/parallel.hpp"
#include "scs/rng.hpp"
#include "scs/sensing.hpp"
#include "scs/solver.hpp"

namespace scs {

// psi_1 bound on Z^2 for Z ~ N(0,1): ||Z^2||_psi1 <= ||Z||_psi2^2 = 8/3.
constexpr double kSubExpK = 8.0 / 3.0;

struct ReportRow {
    double threshold = 0.0;
    double empirical_freq = 0.0;
    double mc_stderr = 0.0;
    double theoretical_bound = 0.0;
    bool pass = false;
};

// Empirical tail frequencies against the closed-form bound curve of one
// experiment. A row passes when empirical <= bound + 3 * stderr (the bounds
// are one-sided guarantees checked up to Monte Carlo noise).
struct TailBoundReport {
    std::string experiment;
    std::string params;
    std::vector<ReportRow> rows;

    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

struct TailExperimentSpec {
    std::size_t n = 100;
    std::vector<double> weights; // empty -> uniform 1/n
    std::size_t trials = 100000;
    std::vector<double> thresholds; // ascending
    RngSpec rng;
    double subexp_K = kSubExpK;
};

namespace detail {

inline double mc_stderr(double p, std::size_t trials) {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / double(trials));
}

inline bool row_passes(double empirical, double bound, double stderr_) {
    return empirical <= bound + 3.0 * stderr_;
}

// Tail counts of a per-trial statistic against ascending thresholds,
// evaluated over fixed contiguous chunks so the result is independent of
// the thread count. stat(engine) must depend only on its engine.
template <typename StatFn>
std::vector<std::size_t> tail_counts(std::size_t trials, const std::vector<double>& thresholds,
                                     const RngSpec& rng, StatFn&& stat) {
    const std::size_t chunks = std::min<std::size_t>(trials, 64);
    std::vector<std::vector<std::size_t>> partial(chunks,
                                                  std::vector<std::size_t>(thresholds.size(), 0));
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t lo = trials * c / chunks;
        const std::size_t hi = trials * (c + 1) / chunks;
        auto engine = make_engine(rng.offset(stream::trial_base + c));
        for (std::size_t t = lo; t < hi; ++t) {
            const double value = stat(engine);
            for (std::size_t k = 0; k < thresholds.size(); ++k)
                if (value >= thresholds[k]) ++partial[c][k];
        }
    });
    std::vector<std::size_t> total(thresholds.size(), 0);
    for (const auto& p : partial)
        for (std::size_t k = 0; k < p.size(); ++k) total[k] += p[k];
    return total;
}

} // namespace detail

// Smallest L with E[exp(X^2/L^2)] <= 2 for X ~ N(0, sigma^2), found by
// root-finding on the closed form E = sqrt(L^2/(L^2 - 2 sigma^2)); also
// returns that expectation evaluated at L = sqrt(8/3) sigma (equals 2).
inline std::pair<double, double> verify_psi2_gaussian(double sigma) {
    if (!(sigma > 0.0)) throw ParamError("verify_psi2_gaussian: sigma must be > 0");
    const double s2 = sigma * sigma;
    auto expectation = [s2](double len) {
        const double l2 = len * len;
        if (l2 <= 2.0 * s2) return std::numeric_limits<double>::infinity();
        return std::sqrt(l2 / (l2 - 2.0 * s2));
    };
    double lo = std::sqrt(2.0) * sigma;
    double hi = 4.0 * sigma;
    while (expectation(hi) > 2.0) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (expectation(mid) > 2.0 ? lo : hi) = mid;
    }
    const double psi2 = 0.5 * (lo + hi);
    const double check = expectation(std::sqrt(8.0 / 3.0) * sigma);
    return {psi2, check};
}

// exp{-min(t^2 / (4 K^2 ||w||_2^2), t / (2 K ||w||_inf))}
inline double bernstein_bound(double t, double K, double w_sq_l2, double w_linf) {
    if (t <= 0.0) return 1.0;
    const double quad = t * t / (4.0 * K * K * w_sq_l2);
    const double lin = t / (2.0 * K * w_linf);
    return std::exp(-std::min(quad, lin));
}

// min(1, 2^{nBr+1} exp(-eps^2 n / (16 K^2))), evaluated in log space.
inline double theorem1_failure_bound(std::size_t n, std::size_t frames, double rate, double eps,
                                     double K = kSubExpK) {
    const double log_p = (double(n) * double(frames) * rate + 1.0) * std::numbers::ln2 -
                         eps * eps * double(n) / (16.0 * K * K);
    return log_p >= 0.0 ? 1.0 : std::exp(log_p);
}

// min(1, 2^{nBr+1} exp(-eps^4 n / (64 K^2)))
inline double theorem2_failure_bound(std::size_t n, std::size_t frames, double rate, double eps,
                                     double K = kSubExpK) {
    const double log_p = (double(n) * double(frames) * rate + 1.0) * std::numbers::ln2 -
                         eps * eps * eps * eps * double(n) / (64.0 * K * K);
    return log_p >= 0.0 ? 1.0 : std::exp(log_p);
}

// Tail of sum_j w_j (Z_j^2 - 1) with Z_j iid N(0,1) against the Bernstein
// bound for weighted sums of centered sub-exponential variables.
inline TailBoundReport simulate_bernstein_tail(const TailExperimentSpec& spec) {
    if (spec.trials < 1) throw ParamError("bernstein: trials must be >= 1");
    std::vector<double> weights = spec.weights;
    if (weights.empty()) weights.assign(spec.n, 1.0 / double(spec.n));
    if (weights.size() != spec.n) throw ParamError("bernstein: weight count must equal n");
    for (double w : weights)
        if (!std::isfinite(w)) throw ParamError("bernstein: weights must be finite");
    std::vector<double> thresholds = spec.thresholds;
    if (thresholds.empty())
        for (int i = 0; i < 8; ++i) thresholds.push_back(0.25 * double(i));
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw ParamError("bernstein: thresholds must be ascending");
    double w_sq_l2 = 0.0, w_linf = 0.0;
    for (double w : weights) {
        w_sq_l2 += w * w;
        w_linf = std::max(w_linf, std::fabs(w));
    }

    const auto counts = detail::tail_counts(
        spec.trials, thresholds, spec.rng, [&weights](std::mt19937_64& engine) {
            std::normal_distribution<double> normal(0.0, 1.0);
            double acc = 0.0;
            for (double w : weights) {
                const double z = normal(engine);
                acc += w * (z * z - 1.0);
            }
            return acc;
        });

    TailBoundReport report;
    report.experiment = "bernstein";
    std::ostringstream params;
    params << "n=" << spec.n << ";trials=" << spec.trials << ";K=" << spec.subexp_K;
    report.params = params.str();
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        ReportRow row;
        row.threshold = thresholds[k];
        row.empirical_freq = double(counts[k]) / double(spec.trials);
        row.mc_stderr = detail::mc_stderr(row.empirical_freq, spec.trials);
        row.theoretical_bound = bernstein_bound(thresholds[k], spec.subexp_K, w_sq_l2, w_linf);
        row.pass = detail::row_passes(row.empirical_freq, row.theoretical_bound, row.mc_stderr);
        report.rows.push_back(row);
    }
    return report;
}

// Tail of |X Y| for independent X ~ N(0, sigma1^2), Y ~ N(0, sigma2^2)
// against the sub-exponential envelope 2 exp(-t / (K sigma1 sigma2)) implied
// by ||XY||_psi1 <= ||X||_psi2 ||Y||_psi2.
inline TailBoundReport simulate_psi1_product_tail(double sigma1, double sigma2,
                                                  std::vector<double> thresholds,
                                                  std::size_t trials, const RngSpec& rng) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw ParamError("psi1 product: sigmas must be > 0");
    if (thresholds.empty())
        for (int i = 1; i <= 8; ++i) thresholds.push_back(double(i) * sigma1 * sigma2);
    const auto counts = detail::tail_counts(
        trials, thresholds, rng, [sigma1, sigma2](std::mt19937_64& engine) {
            std::normal_distribution<double> n1(0.0, sigma1), n2(0.0, sigma2);
            return std::fabs(n1(engine) * n2(engine));
        });
    TailBoundReport report;
    report.experiment = "psi1-product";
    std::ostringstream params;
    params << "sigma1=" << sigma1 << ";sigma2=" << sigma2 << ";trials=" << trials;
    report.params = params.str();
    const double psi1 = kSubExpK * sigma1 * sigma2;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        ReportRow row;
        row.threshold = thresholds[k];
        row.empirical_freq = double(counts[k]) / double(trials);
        row.mc_stderr = detail::mc_stderr(row.empirical_freq, trials);
        row.theoretical_bound = std::min(1.0, 2.0 * std::exp(-thresholds[k] / psi1));
        row.pass = detail::row_passes(row.empirical_freq, row.theoretical_bound, row.mc_stderr);
        report.rows.push_back(row);
    }
    return report;
}

// Concentration events behind the exhaustive-recovery analysis: for fresh
// Gaussian masks, the per-pixel energy (1/n)||sum_i D_i (x_i - c_i)||^2 must
// stay within B rho^2 eps/2 of ||x - c||^2 / n simultaneously for every
// codeword. Violation frequency is compared against the union bound
// 2^{nBr+1} exp(-eps^2 n / (16 K^2)).
inline TailBoundReport simulate_csp_events(const EnumerableCodebook& book, MaskDistribution dist,
                                           const std::vector<double>& eps_grid, std::size_t trials,
                                           const RngSpec& rng,
                                           const MultiFrameSignal* x_fixed = nullptr) {
    if (book.codewords.empty()) throw CodecError("csp events: empty codebook");
    if (book.codewords.size() > kCodebookGuard)
        throw CodebookTooLargeError("csp events: codebook exceeds enumeration guard");
    if (eps_grid.empty()) throw ParamError("csp events: empty epsilon grid");
    for (double eps : eps_grid)
        if (!(eps > 0.0) || eps > 2.0 * kSubExpK + 1e-12)
            throw ParamError("csp events: epsilon must lie in (0, 2K]");

    const auto shape = book.codewords.front().shape();
    const std::size_t n = shape[0] * shape[1];
    const std::size_t frames = shape[2];
    const double rho = book.descriptor.amplitude_bound;
    const double rate = book.descriptor.rate_bits_per_sample;

    MultiFrameSignal x(shape[0], shape[1], frames);
    if (x_fixed) {
        x = *x_fixed;
    } else {
        auto engine = make_engine(rng.with_stream(stream::signal));
        std::uniform_real_distribution<double> uniform(-rho / 2.0, rho / 2.0);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = uniform(engine);
    }

    // Difference tensors are mask-independent; precompute once.
    std::vector<Tensor> diffs;
    std::vector<double> centers; // ||x - c||^2 / n
    diffs.reserve(book.codewords.size());
    for (const auto& c : book.codewords) {
        Tensor d = x.data;
        d -= c.data;
        centers.push_back(squared_norm(d) / double(n));
        diffs.push_back(std::move(d));
    }

    // Per-trial statistic: the smallest eps that would still cover every
    // codeword, i.e. max_c |lhs - center| / (B rho^2 / 2).
    const auto counts = detail::tail_counts(
        trials, eps_grid, rng, [&](std::mt19937_64& engine) {
            Tensor mask_diag({shape[0], shape[1], frames});
            if (dist == MaskDistribution::gaussian) {
                std::normal_distribution<double> normal(0.0, 1.0);
                for (std::size_t i = 0; i < mask_diag.size(); ++i) mask_diag[i] = normal(engine);
            } else {
                std::bernoulli_distribution coin(0.5);
                for (std::size_t i = 0; i < mask_diag.size(); ++i)
                    mask_diag[i] = coin(engine) ? 1.0 : 0.0;
            }
            double worst = 0.0;
            for (std::size_t ci = 0; ci < diffs.size(); ++ci) {
                const Tensor& d = diffs[ci];
                double energy = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    const std::size_t base = j * frames;
                    for (std::size_t b = 0; b < frames; ++b)
                        acc += mask_diag[base + b] * d[base + b];
                    energy += acc * acc;
                }
                const double dev = std::fabs(energy / double(n) - centers[ci]);
                worst = std::max(worst, dev * 2.0 / (double(frames) * rho * rho));
            }
            return worst;
        });

    TailBoundReport report;
    report.experiment = "csp-events";
    std::ostringstream params;
    params << "n=" << n << ";B=" << frames << ";codewords=" << book.codewords.size()
           << ";rate=" << rate << ";rho=" << rho << ";trials=" << trials
           << ";eps_cap=2K=16/3";
    report.params = params.str();
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        ReportRow row;
        row.threshold = eps_grid[k];
        // Violation of either one-sided event is strict ">"; the statistic
        // stored ">= eps" counts, which only over-counts at measure-zero ties.
        row.empirical_freq = double(counts[k]) / double(trials);
        row.mc_stderr = detail::mc_stderr(row.empirical_freq, trials);
        row.theoretical_bound = theorem1_failure_bound(n, frames, rate, eps_grid[k]);
        row.pass = detail::row_passes(row.empirical_freq, row.theoretical_bound, row.mc_stderr);
        report.rows.push_back(row);
    }
    return report;
}

// Noisy exhaustive recovery: y = H x + z with (1/sqrt(n))||z|| <= sigma_z
// enforced by rescaling. Violations of the error bound
// sqrt(delta) + rho eps + 2 sigma_z / sqrt(B) are compared against
// 2^{nBr+1} exp(-eps^4 n / (64 K^2)).
inline TailBoundReport run_noisy_csp_experiment(const EnumerableCodebook& book, double sigma_z,
                                                std::size_t trials, const RngSpec& rng,
                                                std::vector<double> eps_grid = {}) {
    if (book.codewords.empty()) throw CodecError("noisy csp: empty codebook");
    if (sigma_z < 0.0) throw ParamError("noisy csp: sigma_z must be >= 0");
    const double eps_cap = 2.0 * std::sqrt(kSubExpK);
    if (eps_grid.empty())
        for (int i = 1; i <= 6; ++i) eps_grid.push_back(eps_cap * double(i) / 6.0);
    for (double eps : eps_grid)
        if (!(eps > 0.0) || eps > eps_cap + 1e-12)
            throw ParamError("noisy csp: epsilon must lie in (0, 2 sqrt(K)]");

    const auto shape = book.codewords.front().shape();
    const std::size_t n = shape[0] * shape[1];
    const std::size_t frames = shape[2];
    const double rho = book.descriptor.amplitude_bound;
    const double rate = book.descriptor.rate_bits_per_sample;
    const double sqrt_delta = std::sqrt(book.descriptor.distortion_bound);

    const auto counts = detail::tail_counts(
        trials, eps_grid, rng, [&](std::mt19937_64& engine) {
            std::uniform_int_distribution<std::size_t> pick(0, book.codewords.size() - 1);
            const MultiFrameSignal& truth = book.codewords[pick(engine)];
            MaskStack masks;
            masks.diag = Tensor({shape[0], shape[1], frames});
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t i = 0; i < masks.diag.size(); ++i) masks.diag[i] = normal(engine);
            masks.recompute_gram();

            Measurement y = forward(masks, truth);
            if (sigma_z > 0.0) {
                std::normal_distribution<double> noise(0.0, sigma_z);
                Tensor z({shape[0], shape[1]});
                for (std::size_t i = 0; i < z.size(); ++i) z[i] = noise(engine);
                const double z_norm = norm(z) / std::sqrt(double(n));
                if (z_norm > sigma_z) z *= sigma_z / z_norm;
                y.data += z;
                y.noise_sigma = sigma_z;
            }

            const CspResult result = csp_recover(book, masks, y);
            const double err =
                std::sqrt(squared_distance(result.xhat.data, truth.data) / double(n * frames));
            // Smallest eps for which the Theorem-2 error bound still holds.
            return (err - sqrt_delta - 2.0 * sigma_z / std::sqrt(double(frames))) / rho;
        });

    TailBoundReport report;
    report.experiment = "csp-noisy";
    std::ostringstream params;
    params << "n=" << n << ";B=" << frames << ";codewords=" << book.codewords.size()
           << ";rate=" << rate << ";rho=" << rho << ";sigma_z=" << sigma_z
           << ";trials=" << trials;
    report.params = params.str();
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        ReportRow row;
        row.threshold = eps_grid[k];
        row.empirical_freq = double(counts[k]) / double(trials);
        row.mc_stderr = detail::mc_stderr(row.empirical_freq, trials);
        row.theoretical_bound = theorem2_failure_bound(n, frames, rate, eps_grid[k]);
        row.pass = detail::row_passes(row.empirical_freq, row.theoretical_bound, row.mc_stderr);
        report.rows.push_back(row);
    }
    return report;
}

enum class SolverKind { pgd, gap };

// Regime of the convergence theorems: Gaussian masks, an enumerable sparse
// codec at declared (rate, delta, rho), fixed step mu = 1 (PGD) or mu = B
// (GAP), and the recursion e_{t+1} <= 2 lambda e_t + 4 sqrt(delta) checked
// at every iteration with e_t > sqrt(delta). noise_sigma > 0 switches to
// the noisy variant whose right-hand side gains 2 eps_z sigma / sqrt(B).
struct ContractionExperimentSpec {
    std::size_t nx = 4, ny = 4, frames = 2;
    double rate = 0.25;
    double delta = 0.0025;
    double rho = 1.0;
    double lambda = 0.25;
    std::size_t trials = 500;
    SolverKind solver = SolverKind::pgd;
    RngSpec rng;
    double noise_sigma = 0.0;
    double eps_z = 0.25;
    std::size_t max_iters = 25;
    std::size_t sparsity = 2;
    unsigned quant_bits = 2;
};

struct ContractionResult {
    TailBoundReport report;
    double violation_rate = 0.0;
    std::size_t tested_iterations = 0;
    std::size_t recursion_violations = 0;
    double cumulative_ok_fraction = 1.0;
    bool degenerate = false;        // no iteration ever left the delta-ball
    double corollary2_epsilon = 0.0; // implied slack in the frame-count bound
    std::vector<std::vector<double>> error_traces;
};

inline EnumerableCodebook build_contraction_codebook(const ContractionExperimentSpec& spec) {
    const std::size_t n = spec.nx * spec.ny;
    const std::size_t total_samples = n * spec.frames;
    const double bits_budget = std::floor(double(total_samples) * spec.rate);
    const double value_bits = double(spec.quant_bits) * double(spec.sparsity);
    if (value_bits > bits_budget)
        throw ParamError("contraction: rate too small for the requested quantization");
    const std::size_t support_bits =
        static_cast<std::size_t>((bits_budget - value_bits) / double(spec.frames));
    std::size_t supports = support_bits >= 20 ? kCodebookGuard
                                              : (std::size_t{1} << support_bits);
    const double available = detail::binomial_count(n, spec.sparsity);
    if (double(supports) >= available) supports = 0; // enumerate all
    return build_quantized_sparse_codec(spec.nx, spec.ny, spec.frames, spec.sparsity,
                                        spec.quant_bits, spec.rho,
                                        spec.rng.with_stream(stream::codec), supports);
}

inline ContractionResult run_contraction_experiment(const ContractionExperimentSpec& spec) {
    if (!(spec.lambda > 0.0 && spec.lambda < 0.5))
        throw ParamError("contraction: lambda must lie in (0, 0.5)");
    if (!(spec.delta > 0.0 && spec.delta <= 2.0 * kSubExpK * spec.rho * spec.rho))
        throw ParamError("contraction: delta must lie in (0, 2 K rho^2]");
    if (spec.noise_sigma > 0.0 && !(spec.eps_z > 0.0 && spec.eps_z < std::sqrt(spec.rho)))
        throw ParamError("contraction: eps_z must lie in (0, sqrt(rho))");

    const EnumerableCodebook book = build_contraction_codebook(spec);
    const ToyCodec codec(book);
    const std::size_t n = spec.nx * spec.ny;
    const double rate_actual = book.descriptor.rate_bits_per_sample;
    const double sqrt_delta = std::sqrt(spec.delta);
    const double noise_term =
        spec.noise_sigma > 0.0
            ? 2.0 * spec.eps_z * spec.noise_sigma / std::sqrt(double(spec.frames))
            : 0.0;

    SolverConfig config;
    config.step_mu = spec.solver == SolverKind::pgd ? 1.0 : double(spec.frames);
    config.max_iters = spec.max_iters;
    config.residual_tol = 0.0;
    config.init_mode = InitMode::zero;

    std::vector<std::vector<double>> traces(spec.trials);
    parallel_for(spec.trials, [&](std::size_t trial) {
        const RngSpec trial_rng = spec.rng.offset(stream::trial_base + 4 * trial);
        auto engine = make_engine(trial_rng);
        std::uniform_int_distribution<std::size_t> pick(0, book.codewords.size() - 1);
        const MultiFrameSignal& truth = book.codewords[pick(engine)];
        const MaskStack masks = generate_masks({spec.nx, spec.ny, spec.frames},
                                               MaskDistribution::gaussian, trial_rng.offset(1));
        Measurement y = forward(masks, truth);
        if (spec.noise_sigma > 0.0) y = add_noise(y, spec.noise_sigma, trial_rng.offset(2));

        const SolveResult result =
            spec.solver == SolverKind::pgd
                ? cbpgd_recover(codec, masks, y, config, &truth)
                : cbgap_recover(codec, masks, y, config, &truth);
        std::vector<double>& errors = traces[trial];
        errors.reserve(result.trace.records.size());
        for (const auto& rec : result.trace.records) errors.push_back(*rec.error_to_reference);
    });

    ContractionResult out;
    out.error_traces = std::move(traces);
    std::size_t cumulative_ok = 0;
    for (const auto& errors : out.error_traces) {
        bool entered_ball = false;
        for (std::size_t t = 0; t + 1 < errors.size(); ++t) {
            if (errors[t] <= sqrt_delta) {
                entered_ball = true;
                continue;
            }
            ++out.tested_iterations;
            const double rhs = 2.0 * spec.lambda * errors[t] + 4.0 * sqrt_delta + noise_term;
            if (errors[t + 1] > rhs + 1e-12) ++out.recursion_violations;
        }
        if (!errors.empty() && errors.back() <= sqrt_delta) entered_ball = true;
        // Cumulative bound: e_T <= (2 lambda)^T e_0 + (4 sqrt(delta) + noise) / (1 - 2 lambda),
        // unless the trace entered the delta-ball first.
        if (!errors.empty()) {
            const double T = double(errors.size() - 1);
            const double bound = std::pow(2.0 * spec.lambda, T) * errors.front() +
                                 (4.0 * sqrt_delta + noise_term) / (1.0 - 2.0 * spec.lambda);
            if (entered_ball || errors.back() <= bound + 1e-12) ++cumulative_ok;
        }
    }
    out.degenerate = out.tested_iterations == 0;
    out.violation_rate = out.degenerate
                             ? 0.0
                             : double(out.recursion_violations) / double(out.tested_iterations);
    out.cumulative_ok_fraction =
        out.error_traces.empty() ? 1.0 : double(cumulative_ok) / double(out.error_traces.size());

    const double ratio = spec.delta * spec.lambda / (spec.rho * spec.rho);
    out.corollary2_epsilon =
        std::max(0.0, 100.0 * rate_actual * double(spec.frames) / (ratio * ratio) - 1.0);

    out.report.experiment = spec.noise_sigma > 0.0 ? "contraction-noisy" : "contraction";
    std::ostringstream params;
    params << "n=" << n << ";B=" << spec.frames << ";rate=" << rate_actual
           << ";delta=" << spec.delta << ";rho=" << spec.rho << ";lambda=" << spec.lambda
           << ";mu=" << config.step_mu << ";solver=" << (spec.solver == SolverKind::pgd ? "pgd" : "gap")
           << ";trials=" << spec.trials << ";codewords=" << book.codewords.size()
           << ";corollary2_eps=" << out.corollary2_epsilon;
    if (spec.noise_sigma > 0.0)
        params << ";sigma=" << spec.noise_sigma << ";eps_z=" << spec.eps_z;
    if (out.degenerate) params << ";degenerate=1";
    out.report.params = params.str();

    ReportRow recursion_row;
    recursion_row.threshold = 0.0; // per-iteration recursion
    recursion_row.empirical_freq = out.violation_rate;
    recursion_row.mc_stderr =
        detail::mc_stderr(out.violation_rate, std::max<std::size_t>(1, out.tested_iterations));
    recursion_row.theoretical_bound = 0.01;
    recursion_row.pass = out.violation_rate <= 0.01;
    out.report.rows.push_back(recursion_row);

    ReportRow cumulative_row;
    cumulative_row.threshold = 1.0; // cumulative error bound
    cumulative_row.empirical_freq = 1.0 - out.cumulative_ok_fraction;
    cumulative_row.mc_stderr =
        detail::mc_stderr(cumulative_row.empirical_freq, std::max<std::size_t>(1, spec.trials));
    cumulative_row.theoretical_bound = 0.01;
    cumulative_row.pass = cumulative_row.empirical_freq <= 0.01;
    out.report.rows.push_back(cumulative_row);
    return out;
}

// Largest frame count admitted by the corollary inequality
// B < (1/eta) log2(1/delta) / (2 r); zero means infeasible.
inline std::size_t corollary_b_frames(double delta, double rate, double eta) {
    const double bound = std::log2(1.0 / delta) / (2.0 * rate * eta);
    return bound < 1.0 ? 0 : static_cast<std::size_t>(bound);
}

// Sweep of the frame-count corollary: for each delta, B is set by
// corollary_b_frames; the exhaustive-recovery distortion is then compared
// against delta + 8 rho^2 sqrt(log2(1/delta)/eta) and the violation
// frequency against 2 exp(-n log2(1/delta) / (5 eta)).
struct CorollaryBSpec {
    double rate = 0.5;
    std::vector<double> delta_grid;
    double eta = 4.0;
    std::size_t trials = 200;
    std::size_t nx = 4, ny = 4;
    double rho = 1.0;
    std::size_t sparsity = 1;
    RngSpec rng;
};

inline TailBoundReport corollary_b_sweep(const CorollaryBSpec& spec) {
    if (spec.delta_grid.empty()) throw ParamError("corollary-b: empty delta grid");
    for (double d : spec.delta_grid)
        if (!(d > 0.0 && d < 1.0)) throw ParamError("corollary-b: delta grid must lie in (0, 1)");
    if (!(spec.eta > 0.0)) throw ParamError("corollary-b: eta must be > 0");
    const std::size_t n = spec.nx * spec.ny;

    TailBoundReport report;
    report.experiment = "corollary-b";
    std::ostringstream params;
    params << "n=" << n << ";rate=" << spec.rate << ";eta=" << spec.eta
           << ";trials=" << spec.trials << ";rho=" << spec.rho;

    for (std::size_t gi = 0; gi < spec.delta_grid.size(); ++gi) {
        const double delta = spec.delta_grid[gi];
        const double log_inv_delta = std::log2(1.0 / delta);
        const std::size_t frames = corollary_b_frames(delta, spec.rate, spec.eta);
        ReportRow row;
        row.threshold = delta;
        if (frames == 0) {
            params << ";delta=" << delta << ":infeasible";
            row.empirical_freq = 0.0;
            row.mc_stderr = 0.0;
            row.theoretical_bound = 1.0;
            row.pass = true;
            report.rows.push_back(row);
            continue;
        }

        // Codebook at rate <= spec.rate, capped so the sweep stays fast.
        const double bits_budget =
            std::min(14.0, std::floor(double(n * frames) * spec.rate));
        const unsigned quant_bits = static_cast<unsigned>(
            std::clamp(bits_budget / double(spec.sparsity) - double(frames), 1.0, 6.0));
        const std::size_t support_bits = static_cast<std::size_t>(std::max(
            0.0, (bits_budget - double(quant_bits) * double(spec.sparsity)) / double(frames)));
        std::size_t supports = std::size_t{1} << std::min<std::size_t>(support_bits, 12);
        if (double(supports) >= detail::binomial_count(n, spec.sparsity)) supports = 0;
        const EnumerableCodebook book = build_quantized_sparse_codec(
            spec.nx, spec.ny, frames, spec.sparsity, quant_bits, spec.rho,
            spec.rng.with_stream(stream::codec + gi), supports);

        const double error_bound =
            delta + 8.0 * spec.rho * spec.rho * std::sqrt(log_inv_delta / spec.eta);
        const std::vector<double> single_threshold{error_bound};
        const auto counts = detail::tail_counts(
            spec.trials, single_threshold, spec.rng.offset(100 * gi),
            [&](std::mt19937_64& engine) {
                std::uniform_int_distribution<std::size_t> pick(0, book.codewords.size() - 1);
                const MultiFrameSignal& truth = book.codewords[pick(engine)];
                MaskStack masks;
                masks.diag = Tensor({spec.nx, spec.ny, frames});
                std::normal_distribution<double> normal(0.0, 1.0);
                for (std::size_t i = 0; i < masks.diag.size(); ++i)
                    masks.diag[i] = normal(engine);
                masks.recompute_gram();
                const Measurement y = forward(masks, truth);
                const CspResult result = csp_recover(book, masks, y);
                return squared_distance(result.xhat.data, truth.data) / double(n * frames);
            });

        row.empirical_freq = double(counts[0]) / double(spec.trials);
        row.mc_stderr = detail::mc_stderr(row.empirical_freq, spec.trials);
        row.theoretical_bound =
            std::min(1.0, 2.0 * std::exp(-double(n) * log_inv_delta / (5.0 * spec.eta)));
        row.pass = detail::row_passes(row.empirical_freq, row.theoretical_bound, row.mc_stderr);
        report.rows.push_back(row);
        params << ";delta=" << delta << ":B=" << frames;
    }
    report.params = params.str();
    return report;
}

} // namespace scs
