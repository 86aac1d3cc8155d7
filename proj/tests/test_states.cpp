#include <catch2/catch_amalgamated.hpp>

#include "phaseflow/diagnostics.hpp"
#include "phaseflow/states.hpp"

using namespace phaseflow;

namespace {

const double kHbar = 0.1;
const double kSigma = std::sqrt(kHbar / 2.0);  // minimum uncertainty, sq = sp

ModelParams quantum_params() {
    ModelParams mp;
    mp.hbar = kHbar;
    return mp;
}

} // namespace

TEST_CASE("gaussian moments and normalization") {
    auto g = make_grid(256, 256, {-6.0, 6.0}, {-6.0, 6.0});
    GaussianSpec spec{1.25, -0.5, 0.4, 0.3};
    Field f = gaussian_wigner(spec, g);

    CHECK(f.integral().real() == Catch::Approx(1.0).margin(1e-10));
    CHECK(moment(f, 1, 0) == Catch::Approx(1.25).margin(1e-10));
    CHECK(moment(f, 0, 1) == Catch::Approx(-0.5).margin(1e-10));
    CHECK(moment(f, 2, 0) - 1.25 * 1.25 == Catch::Approx(0.16).margin(1e-9));
    CHECK(min_value(f) >= 0.0);
}

TEST_CASE("gaussian purity proxy at minimum uncertainty") {
    auto g = make_grid(256, 256, {-4.0, 4.0}, {-4.0, 4.0});
    const auto mp = quantum_params();
    Field f = gaussian_wigner(GaussianSpec{0.3, 0.2, kSigma, kSigma}, g);
    // 2 pi hbar * Int f^2 = 1 exactly for a pure coherent state.
    double sum_sq = 0.0;
    for (const Complex& v : f.values()) sum_sq += v.real() * v.real();
    const double purity = 2.0 * std::numbers::pi * mp.hbar * sum_sq * g->cell_area();
    CHECK(purity == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gaussian too close to the box edge is rejected") {
    auto g = make_grid(64, 64, {-2.0, 2.0}, {-2.0, 2.0});
    CHECK_THROWS_AS(gaussian_wigner(GaussianSpec{1.5, 0.0, 0.2, 0.2}, g),
                    std::invalid_argument);
    CHECK_THROWS_AS(gaussian_wigner(GaussianSpec{0.0, -1.99, 0.2, 0.2}, g),
                    std::invalid_argument);
    CHECK_NOTHROW(gaussian_wigner(GaussianSpec{0.0, 0.0, 0.2, 0.2}, g));
}

TEST_CASE("degenerate cat reduces to a single gaussian") {
    auto g = make_grid(128, 128, {-3.0, 3.0}, {-3.0, 3.0});
    const auto mp = quantum_params();
    GaussianSpec s{0.4, -0.2, kSigma, kSigma};
    Field cat = cat_state_wigner(s, s, g, mp);
    Field single = gaussian_wigner(s, g);
    CHECK(l2_distance(cat, single) / single.l2_norm() < 1e-12);
}

TEST_CASE("symmetric cat has zero mean position and interference fringes") {
    auto g = make_grid(512, 512, {-4.0, 4.0}, {-4.0, 4.0});
    const auto mp = quantum_params();
    GaussianSpec a{-1.0, 0.0, kSigma, kSigma};
    GaussianSpec b{+1.0, 0.0, kSigma, kSigma};
    Field f = cat_state_wigner(a, b, g, mp);

    CHECK(f.integral().real() == Catch::Approx(1.0).margin(1e-10));
    CHECK(moment(f, 1, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(min_value(f) < 0.0);
    CHECK(negativity(f) > 0.0);

    // Fringe wavevector along p is separation/hbar: the ridge at q=0
    // oscillates as cos(2 p / hbar), so the first trough sits at
    // p = pi*hbar/2 ~ 0.157.
    const auto mid = slice(f, 0.0);  // p ~ 0 cut not useful; inspect column q=0 instead
    (void)mid;
    const std::size_t i0 = g->nq / 2;  // q = 0 column
    const double p_trough = std::numbers::pi * mp.hbar / 2.0;
    const auto j_trough = static_cast<std::size_t>(
        std::llround((p_trough - g->p_min) / g->dp));
    CHECK(f(i0, j_trough).real() < 0.0);
}

TEST_CASE("well-separated cat extremum matches the wavepacket oracle") {
    // Independent oracle (direct Wigner transform of the two-packet
    // wavefunction, fine quadrature): min W = -2.6327475 at separation
    // 10 sigma with hbar = 0.1, i.e. 0.8271/(pi hbar) -- the envelope
    // suppresses the first fringe trough by exp(-2 pi^2/100).
    auto g = make_grid(512, 512, {-4.0, 4.0}, {-4.0, 4.0});
    const auto mp = quantum_params();
    const double half = 5.0 * kSigma;
    Field f = cat_state_wigner(GaussianSpec{-half, 0.0, kSigma, kSigma},
                               GaussianSpec{+half, 0.0, kSigma, kSigma}, g, mp);
    const double oracle_min = -2.6327474950871625;
    CHECK(min_value(f) == Catch::Approx(oracle_min).epsilon(0.025));
    // Qualitative bound: the extremum sits within 20% of the Wigner floor.
    CHECK(std::abs(min_value(f)) > 0.8 / (std::numbers::pi * mp.hbar));
    CHECK(std::abs(min_value(f)) < 1.001 / (std::numbers::pi * mp.hbar));
}

TEST_CASE("wider separation pushes the extremum to the Wigner floor") {
    // Fringes sharpen with separation, so the p-axis needs the resolution.
    auto g = make_grid(512, 1024, {-5.0, 5.0}, {-5.0, 5.0});
    const auto mp = quantum_params();
    const double half = 10.0 * kSigma;  // separation 20 sigma
    Field f = cat_state_wigner(GaussianSpec{-half, 0.0, kSigma, kSigma},
                               GaussianSpec{+half, 0.0, kSigma, kSigma}, g, mp);
    CHECK(std::abs(min_value(f)) ==
          Catch::Approx(1.0 / (std::numbers::pi * mp.hbar)).epsilon(0.10));
}

TEST_CASE("cat construction rejects inconsistent specs") {
    auto g = make_grid(128, 128, {-3.0, 3.0}, {-3.0, 3.0});
    const auto mp = quantum_params();
    GaussianSpec a{-0.5, 0.0, kSigma, kSigma};
    GaussianSpec b{+0.5, 0.0, 2.0 * kSigma, kSigma};
    CHECK_THROWS_AS(cat_state_wigner(a, b, g, mp), std::invalid_argument);

    GaussianSpec wide_a{-0.5, 0.0, 0.3, 0.3};  // not minimum uncertainty
    GaussianSpec wide_b{+0.5, 0.0, 0.3, 0.3};
    CHECK_THROWS_AS(cat_state_wigner(wide_a, wide_b, g, mp), std::invalid_argument);

    ModelParams classical = mp;
    classical.hbar = 0.0;
    CHECK_THROWS_AS(cat_state_wigner(a, a, g, classical), std::invalid_argument);
}
