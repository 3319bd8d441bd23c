#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "scs/codec.hpp"

using namespace scs;

namespace {

EnumerableCodebook two_point_book() {
    EnumerableCodebook book;
    MultiFrameSignal zero(2, 1, 1);
    MultiFrameSignal ones(2, 1, 1);
    ones.data.fill(1.0);
    book.codewords = {zero, ones};
    book.descriptor = {0.5, 0.0, 2.0};
    return book;
}

} // namespace

TEST_CASE("toy projection picks the nearest codeword") {
    const ToyCodec codec(two_point_book());
    MultiFrameSignal s(2, 1, 1);
    s.data[0] = 0.9;
    s.data[1] = 0.8;
    const MultiFrameSignal p = codec.project(s);
    CHECK(p.data[0] == 1.0);
    CHECK(p.data[1] == 1.0);

    // a codeword projects to itself
    const MultiFrameSignal again = codec.project(p);
    CHECK(max_abs_diff(again.data, p.data) == 0.0);
}

TEST_CASE("empty codebook is rejected") {
    EnumerableCodebook empty;
    CHECK_THROWS_AS(ToyCodec(empty), CodecError);
    MultiFrameSignal s(1, 1, 1);
    CHECK_THROWS_AS(nearest_codeword(empty, s), CodecError);
}

TEST_CASE("toy projection is optimal and non-expansive (exhaustive scan)") {
    const auto book =
        build_quantized_sparse_codec(4, 2, 2, 2, 2, 1.0, {31, stream::codec}, 4);
    const ToyCodec codec(book);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = oracle::random_signal(4, 2, 2, {seed, 60}, -0.5, 0.5);
        const MultiFrameSignal p = codec.project(s);
        const double achieved = squared_distance(p.data, s.data);
        for (const auto& c : book.codewords)
            CHECK(achieved <= squared_distance(c.data, s.data) + 1e-15);
    }
}

TEST_CASE("quantized sparse codec enumeration") {
    // k=1, 1 bit, B=1, n=2: two supports times two levels
    const auto book = build_quantized_sparse_codec(2, 1, 1, 1, 1, 1.0, {1, 1});
    CHECK(book.codewords.size() == 4);
    CHECK(book.descriptor.rate_bits_per_sample == Catch::Approx(std::log2(4.0) / 2.0));

    for (const auto& c : book.codewords) CHECK(max_abs(c.data) <= 0.5 + 1e-15);

    // no duplicates
    for (std::size_t i = 0; i < book.codewords.size(); ++i)
        for (std::size_t j = i + 1; j < book.codewords.size(); ++j)
            CHECK(max_abs_diff(book.codewords[i].data, book.codewords[j].data) > 0.0);

    CHECK_THROWS_AS(build_quantized_sparse_codec(8, 4, 1, 8, 2, 1.0, {1, 1}),
                    CodebookTooLargeError);
    CHECK_THROWS_AS(build_quantized_sparse_codec(2, 1, 1, 3, 1, 1.0, {1, 1}), ParamError);
    CHECK_THROWS_AS(build_quantized_sparse_codec(2, 1, 1, 1, 0, 1.0, {1, 1}), ParamError);
}

TEST_CASE("sampled supports honor the requested count") {
    const auto book = build_quantized_sparse_codec(4, 3, 2, 1, 2, 1.0, {5, 2}, 4);
    CHECK(book.codewords.size() == 4 * 4 * 4); // S^B * levels^k
    CHECK(book.descriptor.rate_bits_per_sample ==
          Catch::Approx(std::log2(64.0) / 24.0));
}

TEST_CASE("rate/distortion estimation") {
    const auto book = build_quantized_sparse_codec(2, 1, 1, 1, 2, 1.0, {2, 3});
    const ToyCodec codec(book);

    // corpus of codewords: distortion zero
    const auto [rate, distortion] = estimate_rate_distortion(codec, book.codewords);
    CHECK(rate == Catch::Approx(book.descriptor.rate_bits_per_sample));
    CHECK(distortion == 0.0);

    // single zero codeword: distortion is the corpus energy per sample
    EnumerableCodebook zero_book;
    zero_book.codewords = {MultiFrameSignal(2, 1, 1)};
    zero_book.descriptor = {0.0, 0.0, 2.0};
    const ToyCodec zero_codec(zero_book);
    MultiFrameSignal x(2, 1, 1);
    x.data[0] = 0.3;
    x.data[1] = -0.4;
    const auto [zr, zd] = estimate_rate_distortion(zero_codec, {x});
    CHECK(zr == 0.0);
    CHECK(zd == Catch::Approx(squared_norm(x.data) / 2.0));

    CHECK_THROWS_AS(estimate_rate_distortion(codec, {}), ParamError);
}

TEST_CASE("alpha dimension of the sparse family matches k/(nB)") {
    // family over 4x2 frames, B=2, k=1, all supports, quantization sweep
    const std::size_t nx = 4, ny = 2, frames = 2, k = 1;
    const double alpha_true = double(k) / double(nx * ny * frames);

    // class members: shared value, arbitrary per-frame supports
    std::vector<MultiFrameSignal> corpus;
    auto engine = make_engine({99, 0});
    std::uniform_real_distribution<double> value(-0.5, 0.5);
    std::uniform_int_distribution<std::size_t> pixel(0, nx * ny - 1);
    for (int i = 0; i < 200; ++i) {
        MultiFrameSignal x(nx, ny, frames);
        const double v = value(engine);
        for (std::size_t b = 0; b < frames; ++b) {
            const std::size_t p = pixel(engine);
            x.data(p / ny, p % ny, b) = v;
        }
        corpus.push_back(std::move(x));
    }

    std::vector<std::pair<double, double>> points;
    for (unsigned q = 3; q <= 8; ++q) {
        const auto book = build_quantized_sparse_codec(nx, ny, frames, k, q, 1.0, {1, 1});
        const ToyCodec codec(book);
        points.push_back(estimate_rate_distortion(codec, corpus));
    }
    const double alpha = fit_alpha_dimension(points);
    CHECK(std::fabs(alpha - alpha_true) / alpha_true <= 0.2);
}

TEST_CASE("dct3d codec is a projection") {
    const Dct3dCodec codec(20);
    const auto x = oracle::random_signal(4, 4, 3, {41, 0});
    const MultiFrameSignal once = codec.project(x);
    const MultiFrameSignal twice = codec.project(once);
    CHECK(max_abs_diff(once.data, twice.data) < 1e-12);

    // keeping everything reproduces the input
    const Dct3dCodec lossless(4 * 4 * 3);
    CHECK(max_abs_diff(lossless.project(x).data, x.data) < 1e-12);
}
