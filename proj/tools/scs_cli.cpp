// Command-line front end: simulate snapshot measurements, run the
// compression-based solvers, evaluate reconstructions, and drive the
// bound-verification experiments.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scs/scs.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join_cmdline(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

std::string noise_level_tag(double sigma) {
    if (sigma == 0.0) return "none";
    if (sigma == 0.01) return "low";
    if (sigma == 0.1) return "medium";
    if (sigma == 0.5) return "high";
    return "custom";
}

struct SimulateOpts {
    std::string phantom;
    std::string input;
    std::size_t width = 32, height = 32, frames = 8;
    std::string mask = "gaussian";
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::size_t square_size = 0;
    std::size_t square_stride = 1;
    std::size_t sparsity = 4;
    double value = 1.0;
};

int cmd_simulate(const SimulateOpts& opt, const std::string& cmdline, unsigned threads) {
    if (opt.phantom.empty() == opt.input.empty())
        throw scs::ParamError("simulate: exactly one of --phantom/--input is required");
    if (opt.mask != "gaussian" && opt.mask != "bernoulli")
        throw scs::ParamError("simulate: --mask must be gaussian or bernoulli");
    if (opt.sigma < 0.0) throw scs::ParamError("simulate: --sigma must be >= 0");

    const scs::RngSpec base{opt.seed, 0};
    scs::MultiFrameSignal truth;
    if (!opt.phantom.empty()) {
        scs::PhantomParams params;
        params.square_size = opt.square_size;
        params.square_stride = opt.square_stride;
        params.sparsity = opt.sparsity;
        params.value = opt.value;
        truth = scs::make_phantom(scs::phantom_kind_from_name(opt.phantom),
                                  {opt.width, opt.height, opt.frames}, params,
                                  base.with_stream(scs::stream::phantom));
    } else {
        truth = scs::load_frames(opt.input);
    }

    const auto dist = opt.mask == "gaussian" ? scs::MaskDistribution::gaussian
                                             : scs::MaskDistribution::bernoulli01;
    const scs::MaskStack masks =
        scs::generate_masks(truth.shape(), dist, base.with_stream(scs::stream::masks));
    scs::Measurement y = scs::forward(masks, truth);
    if (opt.sigma > 0.0) y = scs::add_noise(y, opt.sigma, base.with_stream(scs::stream::noise));

    fs::create_directories(opt.out_dir);
    const std::string mask_path = (fs::path(opt.out_dir) / "masks.scsm").string();
    const std::string meas_path = (fs::path(opt.out_dir) / "measurement.scsy").string();
    const std::string truth_path = (fs::path(opt.out_dir) / "truth.scsx").string();
    scs::write_masks(mask_path, masks);
    scs::write_measurement(meas_path, y);
    scs::write_signal(truth_path, truth);

    scs::RunManifest manifest;
    manifest.set("kind", "simulate");
    manifest.set("created_utc", utc_timestamp());
    manifest.set("cmdline", cmdline);
    manifest.set("threads", std::to_string(threads));
    manifest.set("seed", std::to_string(opt.seed));
    manifest.set("phantom", opt.phantom.empty() ? "-" : opt.phantom);
    manifest.set("input", opt.input.empty() ? "-" : opt.input);
    manifest.set("mask_distribution", opt.mask);
    manifest.set("sigma", scs::detail::format_double(opt.sigma));
    manifest.set("noise_level", noise_level_tag(opt.sigma));
    manifest.set("n_x", std::to_string(truth.nx()));
    manifest.set("n_y", std::to_string(truth.ny()));
    manifest.set("frames", std::to_string(truth.frames()));
    manifest.set("masks", mask_path);
    manifest.set("measurement", meas_path);
    manifest.set("truth", truth_path);
    manifest.write((fs::path(opt.out_dir) / "manifest.txt").string());

    std::cout << "simulated n_x=" << truth.nx() << " n_y=" << truth.ny()
              << " B=" << truth.frames() << " sigma=" << opt.sigma
              << " mask=" << opt.mask << " -> " << opt.out_dir << "\n";
    return kExitOk;
}

struct RecoverOpts {
    std::string masks;
    std::string measurement;
    std::string truth;
    std::string codec = "nls";
    std::string solver = "gap";
    double mu = 0.0; // 0 -> solver default
    bool adaptive = false;
    std::size_t iters = 150;
    double tol = 1e-8;
    std::string init = "zero";
    std::string out_dir = "rec";
    // codec knobs
    std::size_t keep = 0;
    std::size_t block = 8;
    std::size_t stride = 4;
    std::size_t group_size = 16;
    std::size_t window = 20;
    std::size_t toy_k = 1;
    unsigned toy_bits = 2;
    std::size_t toy_supports = 4;
    double toy_rho = 2.0;
    std::uint64_t seed = 0;
};

int cmd_recover(const RecoverOpts& opt, const std::string& cmdline, unsigned threads) {
    if (opt.codec != "toy" && opt.codec != "dct3d" && opt.codec != "nls")
        throw scs::ParamError("recover: unknown codec (want toy|dct3d|nls): " + opt.codec);
    if (opt.solver != "pgd" && opt.solver != "gap" && opt.solver != "csp")
        throw scs::ParamError("recover: unknown solver (want pgd|gap|csp): " + opt.solver);
    if (opt.init != "zero" && opt.init != "backprojection")
        throw scs::ParamError("recover: --init must be zero or backprojection");
    if (opt.solver == "csp" && opt.codec != "toy")
        throw scs::ParamError("recover: csp needs the enumerable toy codec");

    const scs::MaskStack masks = scs::read_masks(opt.masks);
    const scs::Measurement y = scs::read_measurement(opt.measurement);
    scs::MultiFrameSignal truth;
    const bool have_truth = !opt.truth.empty();
    if (have_truth) truth = scs::read_signal(opt.truth);

    std::unique_ptr<scs::Codec> codec;
    scs::EnumerableCodebook book;
    if (opt.codec == "toy") {
        book = scs::build_quantized_sparse_codec(masks.nx(), masks.ny(), masks.frames(), opt.toy_k,
                                                 opt.toy_bits, opt.toy_rho,
                                                 {opt.seed, scs::stream::codec}, opt.toy_supports);
        codec = std::make_unique<scs::ToyCodec>(book);
    } else if (opt.codec == "dct3d") {
        const std::size_t total = masks.diag.size();
        codec = std::make_unique<scs::Dct3dCodec>(opt.keep == 0 ? total / 8 : opt.keep);
    } else {
        scs::NlsParams params;
        params.block_w = opt.block;
        params.block_h = opt.block;
        params.stride = opt.stride;
        params.group_size = opt.group_size;
        params.search_window = opt.window;
        params.keep_per_group = opt.keep;
        codec = std::make_unique<scs::NlsCodec>(params);
    }

    scs::SolverConfig config;
    config.max_iters = opt.iters;
    config.residual_tol = opt.tol;
    config.step_mode = opt.adaptive ? scs::StepMode::adaptive : scs::StepMode::fixed;
    config.init_mode =
        opt.init == "zero" ? scs::InitMode::zero : scs::InitMode::backprojection;
    config.step_mu = opt.mu > 0.0
                         ? opt.mu
                         : (opt.solver == "gap" ? 2.0 : 2.0 / double(masks.frames()));

    scs::SolveResult result;
    if (opt.solver == "csp") {
        const scs::CspResult csp = scs::csp_recover(book, masks, y);
        result.xhat = csp.xhat;
        scs::IterationRecord rec;
        rec.residual_norm = csp.residual;
        rec.chosen_mu = 0.0;
        if (have_truth)
            rec.error_to_reference =
                std::sqrt(scs::squared_distance(csp.xhat.data, truth.data) / double(truth.total()));
        result.trace.records.push_back(rec);
    } else if (opt.solver == "pgd") {
        result = scs::cbpgd_recover(*codec, masks, y, config, have_truth ? &truth : nullptr);
    } else {
        result = scs::cbgap_recover(*codec, masks, y, config, have_truth ? &truth : nullptr);
    }

    scs::RunManifest manifest;
    manifest.set("kind", "recover");
    manifest.set("created_utc", utc_timestamp());
    manifest.set("cmdline", cmdline);
    manifest.set("threads", std::to_string(threads));
    manifest.set("seed", std::to_string(opt.seed));
    manifest.set("masks", opt.masks);
    manifest.set("measurement", opt.measurement);
    manifest.set("truth", have_truth ? opt.truth : "-");
    manifest.set("codec", opt.codec);
    manifest.set("solver", opt.solver);
    manifest.set("mu", scs::detail::format_double(config.step_mu));
    manifest.set("adaptive", opt.adaptive ? "1" : "0");
    manifest.set("iters", std::to_string(opt.iters));
    manifest.set("residual_tol", scs::detail::format_double(opt.tol));
    manifest.set("init", opt.init);
    if (opt.codec == "nls") {
        manifest.set("block", std::to_string(opt.block));
        manifest.set("stride", std::to_string(opt.stride));
        manifest.set("group_size", std::to_string(opt.group_size));
        manifest.set("window", std::to_string(opt.window));
        manifest.set("keep", std::to_string(opt.keep));
    } else if (opt.codec == "dct3d") {
        manifest.set("keep", std::to_string(opt.keep));
    } else {
        manifest.set("toy_k", std::to_string(opt.toy_k));
        manifest.set("toy_bits", std::to_string(opt.toy_bits));
        manifest.set("toy_supports", std::to_string(opt.toy_supports));
        manifest.set("toy_rho", scs::detail::format_double(opt.toy_rho));
    }

    scs::Metrics metrics;
    if (have_truth) metrics = scs::compute_metrics(result.xhat, truth);
    scs::save_outputs(opt.out_dir, manifest, result.xhat, result.trace,
                      have_truth ? &metrics : nullptr);

    std::cout << "recovered in " << result.trace.iterations()
              << " iterations, final residual "
              << scs::detail::format_double(result.trace.final_residual());
    if (have_truth) std::cout << ", psnr_db " << scs::detail::format_double(metrics.psnr_db);
    std::cout << " -> " << opt.out_dir << "\n";
    return kExitOk;
}

struct EvaluateOpts {
    std::string recon;
    std::string truth;
    std::string out = "metrics.csv";
};

int cmd_evaluate(const EvaluateOpts& opt, const std::string& cmdline, unsigned threads) {
    const scs::MultiFrameSignal recon = scs::read_signal(opt.recon);
    const scs::MultiFrameSignal truth = scs::read_signal(opt.truth);
    const scs::Metrics metrics = scs::compute_metrics(recon, truth);
    scs::write_metrics_csv(opt.out, metrics);

    scs::RunManifest manifest;
    manifest.set("kind", "evaluate");
    manifest.set("created_utc", utc_timestamp());
    manifest.set("cmdline", cmdline);
    manifest.set("threads", std::to_string(threads));
    manifest.set("recon", opt.recon);
    manifest.set("truth", opt.truth);
    manifest.set("out", opt.out);
    manifest.write(opt.out + ".manifest");

    std::cout << "mse=" << scs::detail::format_double(metrics.mse)
              << " psnr_db=" << scs::detail::format_double(metrics.psnr_db) << "\n";
    for (std::size_t b = 0; b < metrics.per_frame_psnr.size(); ++b)
        std::cout << "frame " << b << " psnr_db="
                  << scs::detail::format_double(metrics.per_frame_psnr[b]) << "\n";
    return kExitOk;
}

struct VerifyOpts {
    std::string experiment;
    std::size_t trials = 0; // 0 -> per-experiment default
    std::uint64_t seed = 0;
    std::string out = "report.csv";
    double sigma = 1.0;
    double sigma_z = 0.1;
    std::size_t n = 100;
    std::size_t width = 8, height = 8, frames = 2;
    double delta = 0.0025;
    double lambda = 0.25;
    double rate = 0.25;
    double rho = 1.0;
    double eta = 4.0;
    double eps_z = 0.5;
    double noise_sigma = 0.0;
    std::string solver = "pgd";
};

scs::EnumerableCodebook verify_codebook(const VerifyOpts& opt) {
    // 64-codeword sparse codec over the requested frame geometry.
    return scs::build_quantized_sparse_codec(opt.width, opt.height, opt.frames, 1, 2, opt.rho,
                                             {opt.seed, scs::stream::codec}, 4);
}

int cmd_verify(const VerifyOpts& opt, const std::string& cmdline, unsigned threads) {
    const scs::RngSpec rng{opt.seed, 0};
    std::vector<scs::TailBoundReport> reports;

    if (opt.experiment == "psi2") {
        const auto [psi2, check] = scs::verify_psi2_gaussian(opt.sigma);
        const double target = std::sqrt(8.0 / 3.0) * opt.sigma;
        scs::TailBoundReport report;
        report.experiment = "psi2";
        report.params = "sigma=" + scs::detail::format_double(opt.sigma);
        report.rows.push_back({0.0, psi2, 0.0, target, std::fabs(psi2 - target) <= 1e-6});
        report.rows.push_back({1.0, check, 0.0, 2.0, std::fabs(check - 2.0) <= 1e-9});
        reports.push_back(report);
        std::cout << "psi2(sigma=" << opt.sigma << ") = " << scs::detail::format_double(psi2)
                  << " (closed form sqrt(8/3) sigma = " << scs::detail::format_double(target)
                  << "), expectation at bound = " << scs::detail::format_double(check) << "\n";
    } else if (opt.experiment == "bernstein") {
        scs::TailExperimentSpec spec;
        spec.n = opt.n;
        spec.trials = opt.trials ? opt.trials : 100000;
        spec.rng = rng;
        reports.push_back(scs::simulate_bernstein_tail(spec));
    } else if (opt.experiment == "csp-events") {
        const auto book = verify_codebook(opt);
        const std::vector<double> eps_grid{0.5, 1.0, 2.0, 4.0, 16.0 / 3.0};
        reports.push_back(scs::simulate_csp_events(book, scs::MaskDistribution::gaussian, eps_grid,
                                                   opt.trials ? opt.trials : 2000, rng));
    } else if (opt.experiment == "csp-noisy") {
        const auto book = verify_codebook(opt);
        reports.push_back(
            scs::run_noisy_csp_experiment(book, opt.sigma_z, opt.trials ? opt.trials : 500, rng));
    } else if (opt.experiment == "contraction") {
        if (opt.solver != "pgd" && opt.solver != "gap")
            throw scs::ParamError("verify contraction: --solver must be pgd or gap");
        scs::ContractionExperimentSpec spec;
        spec.nx = 4;
        spec.ny = 4;
        spec.frames = opt.frames;
        spec.rate = opt.rate;
        spec.delta = opt.delta;
        spec.rho = opt.rho;
        spec.lambda = opt.lambda;
        spec.trials = opt.trials ? opt.trials : 500;
        spec.solver = opt.solver == "pgd" ? scs::SolverKind::pgd : scs::SolverKind::gap;
        spec.rng = rng;
        spec.noise_sigma = opt.noise_sigma;
        spec.eps_z = opt.eps_z;
        const auto result = scs::run_contraction_experiment(spec);
        std::cout << "contraction violation_rate="
                  << scs::detail::format_double(result.violation_rate)
                  << " tested=" << result.tested_iterations
                  << " cumulative_ok=" << scs::detail::format_double(result.cumulative_ok_fraction)
                  << (result.degenerate ? " (degenerate)" : "") << "\n";
        reports.push_back(result.report);
    } else if (opt.experiment == "corollary-b") {
        scs::CorollaryBSpec spec;
        spec.rate = opt.rate;
        spec.eta = opt.eta;
        spec.trials = opt.trials ? opt.trials : 200;
        spec.nx = opt.width;
        spec.ny = opt.height;
        spec.rho = opt.rho;
        spec.rng = rng;
        spec.delta_grid = {std::pow(2.0, -4), std::pow(2.0, -6), std::pow(2.0, -8),
                           std::pow(2.0, -10)};
        reports.push_back(scs::corollary_b_sweep(spec));
    } else {
        throw scs::ParamError("verify: unknown experiment: " + opt.experiment);
    }

    scs::write_report_csv(opt.out, reports);

    scs::RunManifest manifest;
    manifest.set("kind", "verify");
    manifest.set("created_utc", utc_timestamp());
    manifest.set("cmdline", cmdline);
    manifest.set("threads", std::to_string(threads));
    manifest.set("experiment", opt.experiment);
    manifest.set("seed", std::to_string(opt.seed));
    manifest.set("out", opt.out);
    manifest.write(opt.out + ".manifest");

    bool all_pass = true;
    for (const auto& report : reports) {
        for (const auto& row : report.rows) {
            std::cout << report.experiment << " t=" << scs::detail::format_double(row.threshold)
                      << " empirical=" << scs::detail::format_double(row.empirical_freq)
                      << " bound=" << scs::detail::format_double(row.theoretical_bound)
                      << (row.pass ? " PASS" : " FAIL") << "\n";
            all_pass = all_pass && row.pass;
        }
    }
    std::cout << (all_pass ? "verify: PASS" : "verify: FAIL") << " -> " << opt.out << "\n";
    return all_pass ? kExitOk : kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"snapshot compressive-sensing toolkit"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "cap on worker threads (1 = serial)");

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "generate masks and a snapshot measurement");
    simulate->add_option("--phantom", sim.phantom, "moving_square|shifting_sparse|constant");
    simulate->add_option("--input", sim.input, "PGM pattern or .scsx container");
    simulate->add_option("--width", sim.width, "frame width n_x");
    simulate->add_option("--height", sim.height, "frame height n_y");
    simulate->add_option("--frames", sim.frames, "frame count B");
    simulate->add_option("--mask", sim.mask, "gaussian|bernoulli");
    simulate->add_option("--sigma", sim.sigma, "measurement noise sigma");
    simulate->add_option("--seed", sim.seed, "rng seed");
    simulate->add_option("--out-dir", sim.out_dir, "output directory");
    simulate->add_option("--square-size", sim.square_size, "moving_square edge length");
    simulate->add_option("--square-stride", sim.square_stride, "moving_square per-frame shift");
    simulate->add_option("--sparsity", sim.sparsity, "shifting_sparse nonzeros per frame");
    simulate->add_option("--value", sim.value, "phantom intensity");

    RecoverOpts rec;
    auto* recover = app.add_subcommand("recover", "run a compression-based solver");
    recover->add_option("--masks", rec.masks, "SCSM mask file")->required();
    recover->add_option("--measurement", rec.measurement, "SCSY measurement file")->required();
    recover->add_option("--truth", rec.truth, "optional SCSX ground truth");
    recover->add_option("--codec", rec.codec, "toy|dct3d|nls");
    recover->add_option("--solver", rec.solver, "pgd|gap|csp");
    recover->add_option("--mu", rec.mu, "step size (default 2/B for pgd, 2 for gap)");
    recover->add_flag("--adaptive", rec.adaptive, "per-iteration step-size search");
    recover->add_option("--iters", rec.iters, "iteration budget");
    recover->add_option("--tol", rec.tol, "residual stopping tolerance");
    recover->add_option("--init", rec.init, "zero|backprojection");
    recover->add_option("--out-dir", rec.out_dir, "output directory");
    recover->add_option("--keep", rec.keep, "kept coefficients (dct3d total / nls per group)");
    recover->add_option("--block", rec.block, "nls block edge");
    recover->add_option("--stride", rec.stride, "nls block stride");
    recover->add_option("--group-size", rec.group_size, "nls group size G");
    recover->add_option("--window", rec.window, "nls search window (pixels)");
    recover->add_option("--toy-k", rec.toy_k, "toy codec sparsity per frame");
    recover->add_option("--toy-bits", rec.toy_bits, "toy codec quantization bits");
    recover->add_option("--toy-supports", rec.toy_supports, "toy codec supports per frame");
    recover->add_option("--toy-rho", rec.toy_rho, "toy codec amplitude bound");
    recover->add_option("--seed", rec.seed, "rng seed (toy codebook)");

    EvaluateOpts eval;
    auto* evaluate = app.add_subcommand("evaluate", "PSNR of a reconstruction against truth");
    evaluate->add_option("--recon", eval.recon, "SCSX reconstruction")->required();
    evaluate->add_option("--truth", eval.truth, "SCSX ground truth")->required();
    evaluate->add_option("--out", eval.out, "per-frame metrics CSV");

    VerifyOpts ver;
    auto* verify = app.add_subcommand("verify", "bound-verification experiments");
    verify->add_option("--experiment", ver.experiment,
                       "psi2|bernstein|csp-events|csp-noisy|contraction|corollary-b")
        ->required();
    verify->add_option("--trials", ver.trials, "Monte Carlo trials (0 = default)");
    verify->add_option("--seed", ver.seed, "rng seed");
    verify->add_option("--out", ver.out, "report CSV path");
    verify->add_option("--sigma", ver.sigma, "psi2 gaussian sigma");
    verify->add_option("--sigma-z", ver.sigma_z, "noise level for csp-noisy");
    verify->add_option("--n", ver.n, "bernstein summand count");
    verify->add_option("--width", ver.width, "frame width for codec experiments");
    verify->add_option("--height", ver.height, "frame height for codec experiments");
    verify->add_option("--frames", ver.frames, "frame count B");
    verify->add_option("--delta", ver.delta, "declared codec distortion");
    verify->add_option("--lambda", ver.lambda, "contraction factor in (0, 0.5)");
    verify->add_option("--rate", ver.rate, "declared codec rate");
    verify->add_option("--rho", ver.rho, "amplitude bound");
    verify->add_option("--eta", ver.eta, "corollary-b eta");
    verify->add_option("--noise-sigma", ver.noise_sigma, "contraction measurement noise sigma");
    verify->add_option("--eps-z", ver.eps_z, "contraction noise slack eps_z in (0, sqrt(rho))");
    verify->add_option("--solver", ver.solver, "contraction solver: pgd|gap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    scs::set_thread_count(threads);
    const std::string cmdline = join_cmdline(argc, argv);
    try {
        if (*simulate) return cmd_simulate(sim, cmdline, threads);
        if (*recover) return cmd_recover(rec, cmdline, threads);
        if (*evaluate) return cmd_evaluate(eval, cmdline, threads);
        return cmd_verify(ver, cmdline, threads);
    } catch (const scs::ParamError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
