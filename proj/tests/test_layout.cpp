#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cdt/layout.hpp"

using namespace cdt;

namespace {

// random zero-diagonal factor pair
CausalFactors<double> random_factors(int g, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto f = CausalFactors<double>::zero(g);
    for (int k = 0; k < g; ++k)
        for (int j = 0; j < g; ++j)
            if (j != k) {
                f.a0(k, j) = dist(gen);
                f.a1(k, j) = dist(gen);
            }
    return f;
}

} // namespace

TEST_CASE("layout dimensions") {
    CHECK(layout_for(GraphSpec::with_default_labels(4)).dim() == 24);
    CHECK(layout_for(GraphSpec::with_default_labels(2)).dim() == 4);
    CHECK(layout_for(GraphSpec::with_default_labels(6)).dim() == 60);
    CHECK_THROWS_AS(layout_for(GraphSpec::with_default_labels(1)), validation_error);
    CHECK_THROWS_AS(layout_for(GraphSpec::with_default_labels(0)), validation_error);
}

TEST_CASE("G=2 canonical order") {
    const auto layout = layout_for(GraphSpec::with_default_labels(2));
    CHECK(layout.index_of({0, 1, FactorKind::instantaneous}) == 0);
    CHECK(layout.index_of({0, 1, FactorKind::lagged}) == 1);
    CHECK(layout.index_of({1, 0, FactorKind::instantaneous}) == 2);
    CHECK(layout.index_of({1, 0, FactorKind::lagged}) == 3);
}

TEST_CASE("layout bijection for G in 2..6") {
    for (int g = 2; g <= 6; ++g) {
        const auto layout = layout_for(GraphSpec::with_default_labels(g));
        for (int i = 0; i < layout.dim(); ++i) {
            const FactorId id = layout.factor_of(i);
            CHECK(id.target != id.source);
            CHECK(layout.index_of(id) == i);
        }
    }
}

TEST_CASE("self effects are excluded from the index map") {
    const auto layout = layout_for(GraphSpec::with_default_labels(3));
    CHECK_THROWS_AS(layout.index_of({1, 1, FactorKind::instantaneous}), validation_error);
    CHECK_THROWS_AS(layout.factor_of(-1), validation_error);
    CHECK_THROWS_AS(layout.factor_of(layout.dim()), validation_error);
}

TEST_CASE("pack G=2 hand example") {
    const auto layout = layout_for(GraphSpec::with_default_labels(2));
    CausalFactors<double> f;
    f.a0 = Eigen::MatrixXd{{0.0, 0.5}, {0.2, 0.0}};
    f.a1 = Eigen::MatrixXd{{0.0, 0.1}, {0.3, 0.0}};
    const Eigen::VectorXd x = pack(f, layout);
    CHECK(x.size() == 4);
    CHECK(x[0] == 0.5);
    CHECK(x[1] == 0.1);
    CHECK(x[2] == 0.2);
    CHECK(x[3] == 0.3);

    const auto back = unpack(x, layout);
    CHECK(back.a0 == f.a0);
    CHECK(back.a1 == f.a1);
}

TEST_CASE("pack of zero factors is the zero vector") {
    const auto layout = layout_for(GraphSpec::with_default_labels(4));
    CHECK(pack(CausalFactors<double>::zero(4), layout).isZero(0.0));
    const auto f = unpack(Eigen::VectorXd::Zero(24).eval(), layout);
    CHECK(f.a0.isZero(0.0));
    CHECK(f.a1.isZero(0.0));
}

TEST_CASE("pack rejects nonzero diagonals and size mismatches") {
    const auto layout = layout_for(GraphSpec::with_default_labels(2));
    auto f = CausalFactors<double>::zero(2);
    f.a0(0, 0) = 1e-9;
    CHECK_THROWS_AS(pack(f, layout), validation_error);
    CHECK_THROWS_AS(pack(CausalFactors<double>::zero(3), layout), validation_error);
    const Eigen::VectorXd wrong = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(unpack(wrong, layout), validation_error);
}

TEST_CASE("pack/unpack round trip is exact") {
    std::mt19937_64 gen(11);
    for (int g = 2; g <= 5; ++g) {
        const auto layout = layout_for(GraphSpec::with_default_labels(g));
        for (int rep = 0; rep < 20; ++rep) {
            const auto f = random_factors(g, gen);
            const Eigen::VectorXd x = pack(f, layout);
            const auto back = unpack(x, layout);
            CHECK(back.a0 == f.a0);
            CHECK(back.a1 == f.a1);
            CHECK(pack(back, layout) == x);
        }
        // and in the other direction, starting from a vector
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        Eigen::VectorXd x(layout.dim());
        for (int i = 0; i < x.size(); ++i) x[i] = dist(gen);
        CHECK(pack(unpack(x, layout), layout) == x);
    }
}

TEST_CASE("build_row hand examples") {
    const Eigen::VectorXd now2 = Eigen::Vector2d(1, 2);
    const Eigen::VectorXd prev2 = Eigen::Vector2d(3, 4);
    CHECK(build_row(0, now2, prev2) == Eigen::RowVector2d(2, 4));

    Eigen::VectorXd now4(4), prev4(4);
    now4 << 1, 2, 3, 4;
    prev4 << 5, 6, 7, 8;
    Eigen::RowVectorXd expect_k0(6), expect_k2(6);
    expect_k0 << 2, 3, 4, 6, 7, 8;
    expect_k2 << 1, 2, 4, 5, 6, 8;
    CHECK(build_row(0, now4, prev4) == expect_k0);
    CHECK(build_row(2, now4, prev4) == expect_k2);

    CHECK_THROWS_AS(build_row(4, now4, prev4), validation_error);
    CHECK_THROWS_AS(build_row(0, now4, prev2), validation_error);
}

TEST_CASE("observation matrix G=2 hand example") {
    const auto layout = layout_for(GraphSpec::with_default_labels(2));
    const Eigen::VectorXd now = Eigen::Vector2d(1, 2);
    const Eigen::VectorXd prev = Eigen::Vector2d(3, 4);
    const Eigen::MatrixXd h = build_observation_matrix(now, prev, layout);
    Eigen::MatrixXd expect{{2, 4, 0, 0}, {0, 0, 1, 3}};
    CHECK(h == expect);

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    CHECK(build_observation_matrix(zero, zero, layout).isZero(0.0));
}

TEST_CASE("observation matrix block structure") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int g = 2; g <= 5; ++g) {
        const auto layout = layout_for(GraphSpec::with_default_labels(g));
        Eigen::VectorXd now(g), prev(g);
        for (int i = 0; i < g; ++i) {
            now[i] = dist(gen);
            prev[i] = dist(gen);
        }
        const Eigen::MatrixXd h = build_observation_matrix(now, prev, layout);
        for (int k = 0; k < g; ++k) {
            for (int c = 0; c < layout.dim(); ++c) {
                const bool in_block =
                    c >= layout.block_start(k) && c < layout.block_start(k) + layout.block_size();
                if (!in_block) CHECK(h(k, c) == 0.0);
            }
            CHECK(h.block(k, layout.block_start(k), 1, layout.block_size()) ==
                  build_row(k, now, prev));
        }
    }
}

// H * pack(f) must reproduce the componentwise model prediction computed
// straight from the coefficient matrices.
TEST_CASE("model consistency against direct evaluation") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    for (int g = 2; g <= 5; ++g) {
        const auto layout = layout_for(GraphSpec::with_default_labels(g));
        for (int rep = 0; rep < 25; ++rep) {
            const auto f = random_factors(g, gen);
            Eigen::VectorXd now(g), prev(g);
            for (int i = 0; i < g; ++i) {
                now[i] = dist(gen);
                prev[i] = dist(gen);
            }
            const Eigen::VectorXd predicted =
                build_observation_matrix(now, prev, layout) * pack(f, layout);
            for (int k = 0; k < g; ++k) {
                double direct = 0;
                for (int j = 0; j < g; ++j)
                    if (j != k) direct += f.a0(k, j) * now[j] + f.a1(k, j) * prev[j];
                CHECK(std::abs(predicted[k] - direct) <= 1e-12);
            }
        }
    }
}
