#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "scs/dct.hpp"
#include "scs/tensor.hpp"

using namespace scs;

TEST_CASE("tensor shape validation") {
    CHECK_THROWS_AS(Tensor(std::vector<std::size_t>{}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 0, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor({1, 2, 3, 4, 5}), ShapeError);
    Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    t(1, 2, 3) = 5.0;
    CHECK(t[1 * 12 + 2 * 4 + 3] == 5.0);
}

TEST_CASE("dct of a constant block has a single DC coefficient") {
    const double c = 0.7;
    CoeffTensor t{Tensor({4, 4, 2, 2}), Basis::spatial};
    t.data.fill(c);
    const CoeffTensor f = dct_forward(t);
    CHECK(f.basis_tag == Basis::dct);
    CHECK(f.data[0] == Catch::Approx(8.0 * c).epsilon(1e-13));
    for (std::size_t i = 1; i < f.data.size(); ++i) CHECK(std::fabs(f.data[i]) < 1e-12);
}

TEST_CASE("two-point dct closed form") {
    const double a = 3.0, b = -1.0;
    CoeffTensor t{Tensor({2}), Basis::spatial};
    t.data[0] = a;
    t.data[1] = b;
    const CoeffTensor f = dct_forward(t);
    CHECK(f.data[0] == Catch::Approx((a + b) / std::sqrt(2.0)).margin(1e-14));
    CHECK(f.data[1] == Catch::Approx((a - b) / std::sqrt(2.0)).margin(1e-14));
}

TEST_CASE("dct round trip and Parseval for ranks 1 to 4") {
    const std::vector<std::vector<std::size_t>> shapes{{7}, {5, 6}, {4, 3, 5}, {3, 4, 2, 5}};
    for (std::size_t si = 0; si < shapes.size(); ++si) {
        Tensor t(shapes[si]);
        auto engine = make_engine({17 + si, 0});
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(engine);

        const Tensor f = dct_all_axes(t, false);
        CHECK(norm(f) == Catch::Approx(norm(t)).epsilon(1e-12));
        const Tensor back = dct_all_axes(f, true);
        CHECK(max_abs_diff(back, t) < 1e-12);
    }
}

TEST_CASE("dct inverse of a DC coefficient is a constant block") {
    CoeffTensor f{Tensor({8, 8, 4, 4}), Basis::dct};
    const double v = 2.5;
    f.data[0] = v;
    const CoeffTensor back = dct_inverse(f);
    CHECK(back.basis_tag == Basis::spatial);
    for (std::size_t i = 0; i < back.data.size(); ++i)
        CHECK(back.data[i] == Catch::Approx(v / 32.0).margin(1e-14));

    CoeffTensor zero{Tensor({3, 3}), Basis::dct};
    const CoeffTensor z = dct_inverse(zero);
    CHECK(max_abs(z.data) == 0.0);
}

TEST_CASE("dct basis tag misuse is rejected") {
    CoeffTensor spatial{Tensor({4}), Basis::spatial};
    CHECK_THROWS_AS(dct_inverse(spatial), ParamError);
    CoeffTensor coeff{Tensor({4}), Basis::dct};
    CHECK_THROWS_AS(dct_forward(coeff), ParamError);
}

TEST_CASE("keep_top_k magnitude selection and ties") {
    Tensor t({4});
    t[0] = 3.0;
    t[1] = -5.0;
    t[2] = 1.0;
    t[3] = 0.5;
    const Tensor kept = keep_top_k(t, 2);
    CHECK(kept[0] == 3.0);
    CHECK(kept[1] == -5.0);
    CHECK(kept[2] == 0.0);
    CHECK(kept[3] == 0.0);

    CHECK(max_abs(keep_top_k(t, 0)) == 0.0);
    CHECK(max_abs_diff(keep_top_k(t, 9), t) == 0.0);

    Tensor ties({3});
    ties[0] = 1.0;
    ties[1] = -1.0;
    ties[2] = 1.0;
    const Tensor tied = keep_top_k(ties, 2);
    CHECK(tied[0] == 1.0);
    CHECK(tied[1] == -1.0);
    CHECK(tied[2] == 0.0);
}

TEST_CASE("keep_top_k is an idempotent projection") {
    Tensor t({3, 4});
    auto engine = make_engine({23, 0});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal(engine);
    const Tensor once = keep_top_k(t, 5);
    const Tensor twice = keep_top_k(once, 5);
    CHECK(max_abs_diff(once, twice) == 0.0);
}

TEST_CASE("keep_top_k is the l2-best k-sparse approximation") {
    // Exhaustive scan over all k-subsets of a 12-entry tensor.
    Tensor t({12});
    auto engine = make_engine({29, 0});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal(engine);

    for (std::size_t k = 1; k <= 4; ++k) {
        const Tensor kept = keep_top_k(t, k);
        Tensor diff = t;
        diff -= kept;
        const double achieved = squared_norm(diff);

        double best = std::numeric_limits<double>::infinity();
        std::vector<bool> select(t.size(), false);
        std::fill(select.begin(), select.begin() + static_cast<std::ptrdiff_t>(k), true);
        do {
            double residual = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i)
                if (!select[i]) residual += t[i] * t[i];
            best = std::min(best, residual);
        } while (std::prev_permutation(select.begin(), select.end()));
        CHECK(achieved <= best + 1e-12);
    }
}
