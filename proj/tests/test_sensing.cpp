#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "scs/sensing.hpp"

using namespace scs;

namespace {

// D_1 = diag(1,2,3), D_2 = diag(4,5,6) on a 3-pixel frame.
MaskStack two_frame_masks() {
    MaskStack masks;
    masks.diag = Tensor({3, 1, 2});
    for (std::size_t j = 0; j < 3; ++j) {
        masks.diag(j, 0, 0) = double(j + 1);
        masks.diag(j, 0, 1) = double(j + 4);
    }
    masks.recompute_gram();
    return masks;
}

} // namespace

TEST_CASE("generate_masks determinism and distribution support") {
    const auto a = generate_masks({1, 1, 1}, MaskDistribution::gaussian, {42, stream::masks});
    const auto b = generate_masks({1, 1, 1}, MaskDistribution::gaussian, {42, stream::masks});
    CHECK(a.diag[0] == b.diag[0]);
    const auto c = generate_masks({1, 1, 1}, MaskDistribution::gaussian, {42, stream::masks + 1});
    CHECK(a.diag[0] != c.diag[0]);

    const auto bin = generate_masks({2, 2, 3}, MaskDistribution::bernoulli01, {7, stream::masks});
    for (std::size_t i = 0; i < bin.diag.size(); ++i)
        CHECK((bin.diag[i] == 0.0 || bin.diag[i] == 1.0));

    CHECK_THROWS_AS(generate_masks({0, 2, 2}, MaskDistribution::gaussian, {1, 1}), ShapeError);
    CHECK(a.gram_residual() <= 1e-14);
}

TEST_CASE("gaussian mask sample mean concentrates near zero") {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const auto masks = generate_masks({8, 8, 4}, MaskDistribution::gaussian, {seed, 1});
        for (std::size_t i = 0; i < masks.diag.size(); ++i) sum += masks.diag[i];
        count += masks.diag.size();
    }
    CHECK(std::fabs(sum / double(count)) < 0.01);
}

TEST_CASE("forward matches the hand-computed example") {
    const MaskStack masks = two_frame_masks();
    MultiFrameSignal x(3, 1, 2);
    x.data(0, 0, 0) = 1;
    x.data(1, 0, 0) = 1;
    x.data(2, 0, 0) = 1;
    x.data(0, 0, 1) = 1;
    x.data(1, 0, 1) = 0;
    x.data(2, 0, 1) = 1;
    const Measurement y = forward(masks, x);
    CHECK(y.data(0, 0) == 5.0);
    CHECK(y.data(1, 0) == 2.0);
    CHECK(y.data(2, 0) == 9.0);
    CHECK(y.noise_sigma == 0.0);

    MultiFrameSignal zero(3, 1, 2);
    CHECK(max_abs(forward(masks, zero).data) == 0.0);

    MultiFrameSignal bad(4, 1, 2);
    CHECK_THROWS_AS(forward(masks, bad), ShapeError);
}

TEST_CASE("forward agrees with the dense matrix oracle") {
    const auto masks = generate_masks({4, 3, 2}, MaskDistribution::gaussian, {3, stream::masks});
    const auto x = oracle::random_signal(4, 3, 2, {5, 0});
    const Measurement y = forward(masks, x);
    const auto H = oracle::dense_sensing_matrix(masks);
    const auto expect = oracle::matvec(H, oracle::stack_frames(x), 12, 24);
    for (std::size_t j = 0; j < 12; ++j)
        CHECK(y.data[j] == Catch::Approx(expect[j]).epsilon(1e-12).margin(1e-14));
}

TEST_CASE("adjoint example and dense transpose oracle") {
    const MaskStack masks = two_frame_masks();
    Measurement e(3, 1);
    e.data.fill(1.0);
    const MultiFrameSignal x = adjoint(masks, e);
    CHECK(x.data(0, 0, 0) == 1.0);
    CHECK(x.data(1, 0, 0) == 2.0);
    CHECK(x.data(2, 0, 0) == 3.0);
    CHECK(x.data(0, 0, 1) == 4.0);
    CHECK(x.data(1, 0, 1) == 5.0);
    CHECK(x.data(2, 0, 1) == 6.0);

    Measurement zero(3, 1);
    CHECK(max_abs(adjoint(masks, zero).data) == 0.0);

    const auto random_masks = generate_masks({3, 3, 4}, MaskDistribution::gaussian, {9, 1});
    const auto ev = oracle::random_signal(3, 3, 1, {11, 0});
    Measurement em(3, 3);
    for (std::size_t i = 0; i < 9; ++i) em.data[i] = ev.data[i];
    const auto back = adjoint(random_masks, em);
    const auto H = oracle::dense_sensing_matrix(random_masks);
    std::vector<double> edense(9);
    for (std::size_t i = 0; i < 9; ++i) edense[i] = em.data[i];
    const auto expect = oracle::matvec_transposed(H, edense, 9, 36);
    const auto got = oracle::stack_frames(back);
    for (std::size_t i = 0; i < 36; ++i)
        CHECK(got[i] == Catch::Approx(expect[i]).epsilon(1e-12).margin(1e-14));
}

TEST_CASE("adjoint identity holds on random instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto masks = generate_masks({5, 4, 3}, MaskDistribution::gaussian, {seed, 2});
        const auto x = oracle::random_signal(5, 4, 3, {seed, 3});
        const auto noise = oracle::random_signal(5, 4, 1, {seed, 4});
        Measurement e(5, 4);
        for (std::size_t i = 0; i < e.data.size(); ++i) e.data[i] = noise.data[i];
        const double lhs = dot(forward(masks, x).data, e.data);
        const double rhs = dot(x.data, adjoint(masks, e).data);
        CHECK(std::fabs(lhs - rhs) / (norm(x.data) * norm(e.data)) < 1e-12);
    }
}

TEST_CASE("gram inverse on the hand-computed diagonal") {
    const MaskStack masks = two_frame_masks();
    CHECK(masks.gram_diag(0, 0) == 17.0);
    CHECK(masks.gram_diag(1, 0) == 29.0);
    CHECK(masks.gram_diag(2, 0) == 45.0);

    Measurement e(3, 1);
    e.data(0, 0) = 17.0;
    e.data(1, 0) = 29.0;
    e.data(2, 0) = 45.0;
    std::size_t clamped = 99;
    const Measurement out = gram_apply_inverse(masks, e, 1e-12, &clamped);
    CHECK(clamped == 0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(out.data[j] == Catch::Approx(1.0).margin(1e-15));

    CHECK_THROWS_AS(gram_apply_inverse(masks, e, 0.0), ParamError);
}

TEST_CASE("zeroed pixels follow the pseudo-inverse convention") {
    MaskStack masks;
    masks.diag = Tensor({2, 1, 2}); // pixel 0 dead across all frames
    masks.diag(1, 0, 0) = 2.0;
    masks.recompute_gram();
    Measurement e(2, 1);
    e.data(0, 0) = 7.0;
    e.data(1, 0) = 8.0;
    std::size_t clamped = 0;
    const Measurement out = gram_apply_inverse(masks, e, 1e-12, &clamped);
    CHECK(clamped == 1);
    CHECK(out.data(0, 0) == 0.0);
    CHECK(out.data(1, 0) == 2.0);
}

TEST_CASE("gaussian masks never clamp") {
    Measurement e(4, 4);
    e.data.fill(1.0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto masks = generate_masks({4, 4, 1}, MaskDistribution::gaussian, {seed, 5});
        std::size_t clamped = 0;
        gram_apply_inverse(masks, e, 1e-12, &clamped);
        CHECK(clamped == 0);
    }
}

TEST_CASE("add_noise contract") {
    Measurement y(10, 10);
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = double(i) * 0.01;

    const Measurement same = add_noise(y, 0.0, {1, stream::noise});
    CHECK(max_abs_diff(same.data, y.data) == 0.0);
    CHECK(same.noise_sigma == 0.0);

    const Measurement a = add_noise(y, 0.3, {1, stream::noise});
    const Measurement b = add_noise(y, 0.3, {1, stream::noise});
    CHECK(max_abs_diff(a.data, b.data) == 0.0);
    CHECK(a.noise_sigma == 0.3);

    CHECK_THROWS_AS(add_noise(y, -0.1, {1, 1}), ParamError);
}

TEST_CASE("add_noise empirical standard deviation") {
    Measurement y(1000, 1000);
    const Measurement noisy = add_noise(y, 0.1, {77, stream::noise});
    double sq = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < noisy.data.size(); ++i) mean += noisy.data[i];
    mean /= double(noisy.data.size());
    for (std::size_t i = 0; i < noisy.data.size(); ++i) {
        const double d = noisy.data[i] - mean;
        sq += d * d;
    }
    const double std_dev = std::sqrt(sq / double(noisy.data.size() - 1));
    CHECK(std_dev >= 0.0995);
    CHECK(std_dev <= 0.1005);
}

TEST_CASE("densified HH^T is diagonal with diagonal gram_diag") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto masks = generate_masks({8, 8, 8}, MaskDistribution::gaussian, {seed, 6});
        const auto gram = oracle::dense_gram(masks);
        const std::size_t n = masks.pixels();
        double off = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                if (r == c) {
                    CHECK(gram[r * n + c] ==
                          Catch::Approx(masks.gram_diag[r]).epsilon(1e-12).margin(1e-14));
                } else {
                    off = std::max(off, std::fabs(gram[r * n + c]));
                }
            }
        CHECK(off < 1e-12);
    }
}

TEST_CASE("dense sensing matrix has at most nB nonzeros") {
    const auto masks = generate_masks({4, 4, 3}, MaskDistribution::gaussian, {8, 7});
    const auto H = oracle::dense_sensing_matrix(masks);
    std::size_t nonzeros = 0;
    for (double v : H) nonzeros += v != 0.0;
    CHECK(nonzeros <= masks.pixels() * masks.frames());
}

TEST_CASE("forward is linear") {
    const auto masks = generate_masks({4, 4, 3}, MaskDistribution::gaussian, {13, 8});
    const auto x1 = oracle::random_signal(4, 4, 3, {13, 9});
    const auto x2 = oracle::random_signal(4, 4, 3, {13, 10});
    const double a = 1.7, b = -0.4;
    MultiFrameSignal combo(4, 4, 3);
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = a * x1.data[i] + b * x2.data[i];
    const Measurement lhs = forward(masks, combo);
    const Measurement y1 = forward(masks, x1);
    const Measurement y2 = forward(masks, x2);
    for (std::size_t i = 0; i < lhs.data.size(); ++i)
        CHECK(lhs.data[i] == Catch::Approx(a * y1.data[i] + b * y2.data[i])
                                 .epsilon(1e-12)
                                 .margin(1e-14));
}
