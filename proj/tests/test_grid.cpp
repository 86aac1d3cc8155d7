#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "phaseflow/grid.hpp"
#include "phaseflow/spectral.hpp"

using namespace phaseflow;

namespace {

Field random_field(GridPtr grid, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(grid);
    for (Complex& v : f.values()) v = Complex{u(rng), u(rng)};
    return f;
}

double rel_l2_diff(const Field& a, const Field& b) {
    return l2_distance(a, b) / a.l2_norm();
}

} // namespace

TEST_CASE("make_grid spacings and ladders") {
    auto g = make_grid(16, 16, {-1.0, 1.0}, {-1.0, 1.0});
    CHECK(g->dq == Catch::Approx(0.125));
    CHECK(g->dp == Catch::Approx(0.125));
    CHECK(g->q.front() == Catch::Approx(-1.0));
    CHECK(g->q.back() == Catch::Approx(1.0 - 0.125));  // periodic wrap, last point excluded

    // DFT ordering: slot j holds j * 2pi/L up to nq/2, then negative.
    const double base = 2.0 * std::numbers::pi / 2.0;
    CHECK(g->k[0] == 0.0);
    CHECK(g->k[1] == Catch::Approx(base));
    CHECK(g->k[8] == Catch::Approx(-8.0 * base));
    CHECK(g->k[15] == Catch::Approx(-base));
}

TEST_CASE("make_grid covers the production Duffing box") {
    auto g = make_grid(4096, 4096, {-8.0, 8.0}, {-17.0, 17.0});
    CHECK(g->nq == 4096);
    CHECK((g->q_max - g->q_min) * (g->p_max - g->p_min) >= 2.0 * 270.0);
}

TEST_CASE("make_grid rejects bad input") {
    CHECK_THROWS_AS(make_grid(10, 16, {-1.0, 1.0}, {-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(16, 12, {-1.0, 1.0}, {-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, {-1.0, 1.0}, {-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(16, 16, {1.0, -1.0}, {-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(16, 16, {-1.0, 1.0},
                              {0.0, std::numeric_limits<double>::infinity()}),
                    std::invalid_argument);
}

TEST_CASE("frequency ladder symmetry") {
    auto g = make_grid(64, 32, {-2.0, 3.0}, {-4.0, 4.0});
    for (std::size_t j = 1; j < g->nq / 2; ++j)
        CHECK(g->k[j] == Catch::Approx(-g->k[g->nq - j]));
    for (std::size_t l = 1; l < g->np / 2; ++l)
        CHECK(g->xi[l] == Catch::Approx(-g->xi[g->np - l]));
}

TEST_CASE("transform_p of a delta column is a plane wave") {
    auto g = make_grid(16, 64, {-1.0, 1.0}, {-2.0, 2.0});
    SpectralTransformer xf(g);
    Field f(g);
    const std::size_t j0 = 17;
    const double p0 = g->p[j0];
    for (std::size_t i = 0; i < g->nq; ++i) f(i, j0) = 1.0;

    Field gm = xf.transform_p(f);
    REQUIRE(gm.rep() == Rep::qxi);
    for (std::size_t l = 0; l < g->np; ++l) {
        const Complex expected = g->dp * std::polar(1.0, -p0 * g->xi[l]);
        CHECK(std::abs(gm(3, l) - expected) < 1e-13);
    }
}

TEST_CASE("transform_q of a delta row is a plane wave") {
    auto g = make_grid(64, 16, {-3.0, 5.0}, {-2.0, 2.0});
    SpectralTransformer xf(g);
    Field f(g);
    const std::size_t i0 = 40;
    for (std::size_t j = 0; j < g->np; ++j) f(i0, j) = 1.0;

    Field h = xf.transform_q(f);
    REQUIRE(h.rep() == Rep::kp);
    for (std::size_t i = 0; i < g->nq; ++i) {
        const Complex expected = g->dq * std::polar(1.0, -g->q[i0] * g->k[i]);
        CHECK(std::abs(h(i, 5) - expected) < 1e-13);
    }
}

TEST_CASE("gaussian in p transforms to gaussian in xi") {
    auto g = make_grid(16, 256, {-1.0, 1.0}, {-8.0, 8.0});
    SpectralTransformer xf(g);
    const double sigma = 0.7;
    Field f(g);
    for (std::size_t i = 0; i < g->nq; ++i)
        for (std::size_t j = 0; j < g->np; ++j)
            f(i, j) = std::exp(-0.5 * g->p[j] * g->p[j] / (sigma * sigma)) /
                      (sigma * std::sqrt(2.0 * std::numbers::pi));

    Field gm = xf.transform_p(f);
    // Continuum pair: unit-mass gaussian of width sigma -> exp(-sigma^2 xi^2/2).
    for (std::size_t l = 0; l < g->np; ++l) {
        const double expected = std::exp(-0.5 * sigma * sigma * g->xi[l] * g->xi[l]);
        CHECK(std::abs(gm(7, l) - expected) < 1e-12);
    }
}

TEST_CASE("round trips are identity to 1e-12") {
    for (std::size_t n : {16UL, 32UL, 128UL}) {
        auto g = make_grid(n, 2 * n, {-1.5, 2.5}, {-3.0, 1.0});
        SpectralTransformer xf(g);
        Field f = random_field(g, 42 + static_cast<unsigned>(n));

        Field back_p = xf.inverse_transform_p(xf.transform_p(f));
        CHECK(rel_l2_diff(back_p, f) < 1e-12);

        Field back_q = xf.inverse_transform_q(xf.transform_q(f));
        CHECK(rel_l2_diff(back_q, f) < 1e-12);
    }
}

TEST_CASE("transforms are linear") {
    auto g = make_grid(32, 32, {-1.0, 1.0}, {-1.0, 1.0});
    SpectralTransformer xf(g);
    Field f = random_field(g, 1);
    Field h = random_field(g, 2);
    const Complex alpha{0.3, -1.2}, beta{-0.7, 0.25};

    Field combo(g);
    for (std::size_t n = 0; n < combo.size(); ++n)
        combo.values()[n] = alpha * f.values()[n] + beta * h.values()[n];

    Field lhs = xf.transform_p(combo);
    Field rhs = xf.transform_p(f);
    Field rhs2 = xf.transform_p(h);
    for (std::size_t n = 0; n < lhs.size(); ++n)
        rhs.values()[n] = alpha * rhs.values()[n] + beta * rhs2.values()[n];
    CHECK(rel_l2_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("parseval identity for transform_q") {
    auto g = make_grid(64, 16, {-2.0, 2.0}, {-1.0, 1.0});
    SpectralTransformer xf(g);
    Field f = random_field(g, 99);
    Field h = xf.transform_q(f);

    // Direct summation on both sides: sum |f|^2 dq dp = (1/2pi) sum |h|^2 dk dp.
    double lhs = 0.0;
    for (const Complex& v : f.values()) lhs += std::norm(v);
    lhs *= g->cell_area();

    const double dk = 2.0 * std::numbers::pi / (g->q_max - g->q_min);
    double rhs = 0.0;
    for (const Complex& v : h.values()) rhs += std::norm(v);
    rhs *= dk * g->dp / (2.0 * std::numbers::pi);

    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("transforms demand the right representation") {
    auto g = make_grid(16, 16, {-1.0, 1.0}, {-1.0, 1.0});
    SpectralTransformer xf(g);
    Field f(g);
    f(0, 0) = 1.0;
    Field gm = xf.transform_p(f);
    CHECK_THROWS_AS(xf.transform_p(gm), std::invalid_argument);
    CHECK_THROWS_AS(xf.inverse_transform_q(gm), std::invalid_argument);
}

TEST_CASE("field algebra and normalization") {
    auto g = make_grid(32, 32, {-2.0, 2.0}, {-2.0, 2.0});
    Field f = random_field(g, 5);
    for (Complex& v : f.values()) v = std::abs(v.real()) + 0.1;
    f.normalize();
    CHECK(f.integral().real() == Catch::Approx(1.0).margin(1e-13));
    CHECK(std::abs(f.integral().imag()) < 1e-10);

    Field other(g);
    CHECK_THROWS_AS(f.check_same_grid(Field(make_grid(32, 32, {-2.0, 2.0}, {-2.0, 2.0}))),
                    std::invalid_argument);
    CHECK_NOTHROW(f.check_same_grid(other));
}
