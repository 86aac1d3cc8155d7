#include <catch2/catch_amalgamated.hpp>

#include "phaseflow/langevin.hpp"

using namespace phaseflow;

namespace {

/// Inverted oscillator: the linearized model at the hyperbolic point.
ModelParams inverted() {
    ModelParams mp;
    mp.B_coef = 0.0;
    mp.Lambda = 0.0;
    mp.A_coef = 10.0;  // lambda_local = sqrt(20)
    mp.D = 1e-3;
    return mp;
}

} // namespace

TEST_CASE("stable/unstable projection") {
    const double m = 1.0, lam = std::sqrt(20.0), q_eq = 0.0;
    auto at_fp = project_stable_unstable(q_eq, 0.0, m, lam, q_eq);
    CHECK(at_fp[0] == 0.0);
    CHECK(at_fp[1] == 0.0);

    // Along p = lambda m (q - q_eq) the stable component vanishes.
    const double eps = 0.3;
    auto aligned = project_stable_unstable(q_eq + eps, lam * m * eps, m, lam, q_eq);
    CHECK(aligned[1] == Catch::Approx(0.0).margin(1e-14));
    CHECK(aligned[0] > 0.0);

    // Dimensional bookkeeping: u+ u- = m lam dq^2/2 for a pure position
    // displacement and -dp^2/(2 m lam) for a pure momentum one.
    auto pos = project_stable_unstable(q_eq + eps, 0.0, m, lam, q_eq);
    CHECK(pos[0] * pos[1] == Catch::Approx(m * lam * eps * eps / 2.0).epsilon(1e-12));
    auto mom = project_stable_unstable(q_eq, eps, m, lam, q_eq);
    CHECK(mom[0] * mom[1] == Catch::Approx(-eps * eps / (2.0 * m * lam)).epsilon(1e-12));

    CHECK_THROWS_AS(project_stable_unstable(1.0, 1.0, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("noise-free ensembles have zero variance") {
    auto mp = inverted();
    mp.D = 0.0;
    EnsembleOptions opt;
    opt.n = 64;
    opt.dt = 1e-3;
    opt.t_end = 0.2;
    opt.q0 = 0.05;
    auto st = simulate_ensemble(opt, mp);
    // Identical deterministic trajectories: variances are pure summation
    // rounding, dozens of orders below any physical scale.
    for (std::size_t i = 0; i < st.times.size(); ++i) {
        CHECK(st.var_up[i] < 1e-28);
        CHECK(st.var_um[i] < 1e-28);
        CHECK(st.var_q[i] < 1e-28);
        CHECK(std::abs(st.cov_upum[i]) < 1e-28);
    }
    CHECK(st.n_aborted == 0);
}

TEST_CASE("free particle momentum variance is the Wiener 2DT") {
    ModelParams mp;
    mp.A_coef = mp.B_coef = mp.Lambda = 0.0;
    mp.D = 0.05;
    EnsembleOptions opt;
    opt.n = 10000;
    opt.dt = 1e-3;
    opt.t_end = 1.0;
    opt.seed = 11;
    auto st = simulate_ensemble(opt, mp);
    CHECK_FALSE(st.has_hyperbolic);
    for (std::size_t i = 0; i < st.times.size(); ++i) {
        const double expected = 2.0 * mp.D * st.times[i];
        CHECK(std::abs(st.var_p[i] - expected) <= 3.0 * st.se_var_p[i]);
    }
}

TEST_CASE("linearized cumulants follow the analytic laws") {
    auto mp = inverted();
    EnsembleOptions opt;
    opt.n = 20000;
    opt.dt = 1e-4;
    opt.t_end = 0.5;
    opt.seed = 5;
    opt.sample_times = {0.1, 0.2, 0.3, 0.4, 0.5};
    auto st = simulate_ensemble(opt, mp);
    REQUIRE(st.has_hyperbolic);
    CHECK(st.lambda_local == Catch::Approx(std::sqrt(20.0)));

    auto check = cumulant_check(st, mp);
    CHECK(check.sufficient);
    CHECK(check.all_pass);

    // The published covariance target at t = 0.5.
    const auto& last = check.rows.back();
    CHECK(std::string(last.name) == "cov");
    CHECK(last.expected == Catch::Approx(-1.118033988749895e-4).epsilon(1e-12));

    // Ratio consistency of the two variance laws.
    const double lam = st.lambda_local;
    for (double t : opt.sample_times) {
        const double vp = (std::exp(2.0 * lam * t) - 1.0);
        const double vm = (1.0 - std::exp(-2.0 * lam * t));
        CHECK(vp / vm == Catch::Approx(std::exp(2.0 * lam * t)).epsilon(1e-12));
    }
}

TEST_CASE("cumulants vanish at t=0") {
    auto mp = inverted();
    EnsembleOptions opt;
    opt.n = 2000;
    opt.dt = 1e-4;
    opt.t_end = 0.1;
    opt.sample_times = {0.0, 0.1};
    auto st = simulate_ensemble(opt, mp);
    CHECK(st.var_up[0] == 0.0);
    CHECK(st.var_um[0] == 0.0);
    CHECK(st.cov_upum[0] == 0.0);
}

TEST_CASE("noise-averaged means grow as e^{+-lambda t}") {
    auto mp = inverted();
    EnsembleOptions opt;
    opt.n = 20000;
    opt.dt = 1e-4;
    opt.t_end = 0.4;
    opt.seed = 21;
    opt.q0 = 0.01;
    opt.p0 = 0.0;
    opt.sample_times = {0.2, 0.4};
    auto st = simulate_ensemble(opt, mp);
    const auto u0 = project_stable_unstable(opt.q0, opt.p0, mp.m, st.lambda_local, st.q_eq);
    for (std::size_t i = 0; i < st.times.size(); ++i) {
        const double t = st.times[i];
        CHECK(std::abs(st.mean_up[i] - u0[0] * std::exp(st.lambda_local * t)) <=
              3.0 * st.se_mean_up[i] + 1e-3 * std::abs(st.mean_up[i]));
        CHECK(std::abs(st.mean_um[i] - u0[1] * std::exp(-st.lambda_local * t)) <=
              3.0 * st.se_mean_um[i] + 1e-3 * std::abs(st.mean_um[i]));
    }
}

TEST_CASE("weak convergence: halving dt moves variances by less than one se") {
    auto mp = inverted();
    EnsembleOptions opt;
    opt.n = 20000;
    opt.dt = 2e-4;
    opt.t_end = 0.4;
    opt.seed = 33;
    opt.sample_times = {0.4};
    auto coarse = simulate_ensemble(opt, mp);
    opt.dt = 1e-4;
    auto fine = simulate_ensemble(opt, mp);
    CHECK(std::abs(coarse.var_up[0] - fine.var_up[0]) <
          coarse.se_var_up[0] + fine.se_var_up[0]);
    CHECK(std::abs(coarse.var_um[0] - fine.var_um[0]) <
          coarse.se_var_um[0] + fine.se_var_um[0]);
}

TEST_CASE("identical seeds reproduce bit-identical statistics") {
    auto mp = inverted();
    EnsembleOptions opt;
    opt.n = 500;
    opt.dt = 1e-3;
    opt.t_end = 0.3;
    opt.seed = 77;
    auto a = simulate_ensemble(opt, mp);
    auto b = simulate_ensemble(opt, mp);
    CHECK(a.var_up == b.var_up);
    CHECK(a.cov_upum == b.cov_upum);
    CHECK(a.mean_q == b.mean_q);

    opt.seed = 78;
    auto c = simulate_ensemble(opt, mp);
    CHECK(a.var_up != c.var_up);
}

TEST_CASE("small ensembles are flagged insufficient") {
    auto mp = inverted();
    auto st = simulate_ensemble(200, 1e-3, 0.2, 1, mp);
    auto check = cumulant_check(st, mp);
    CHECK_FALSE(check.sufficient);
}

TEST_CASE("diverging trajectories are aborted and counted") {
    ModelParams mp;  // quartic with a catastrophic step size
    mp.D = 0.0;
    EnsembleOptions opt;
    opt.n = 8;
    opt.dt = 10.0;
    opt.t_end = 100.0;
    opt.q0 = 2.0;
    auto st = simulate_ensemble(opt, mp);
    CHECK(st.n_aborted == 8);
    CHECK(st.n_trajectories == 0);
}

TEST_CASE("lyapunov: harmonic oscillator is not chaotic") {
    ModelParams mp;
    mp.A_coef = -0.5;  // V = 0.5 q^2
    mp.B_coef = 0.0;
    mp.Lambda = 0.0;
    LyapunovOptions opt;
    opt.t_end = 500.0;
    opt.n = 4;
    opt.dt = 2e-3;
    opt.t_burn = 10.0;
    auto est = lyapunov_estimate(opt, mp);
    CHECK(std::abs(est.lambda_bar) < 0.01);
    CHECK(est.n_excluded == 0);
}

TEST_CASE("lyapunov: inverted oscillator recovers the linear rate") {
    ModelParams mp;
    mp.A_coef = 10.0;
    mp.B_coef = 0.0;
    mp.Lambda = 0.0;
    LyapunovOptions opt;
    opt.t_end = 50.0;
    opt.n = 2;
    opt.dt = 1e-3;
    opt.t_burn = 5.0;
    opt.ic_half_width_q = 0.0;  // sit exactly on the fixed point
    opt.ic_half_width_p = 0.0;
    auto est = lyapunov_estimate(opt, mp);
    CHECK(est.lambda_bar == Catch::Approx(std::sqrt(20.0)).margin(1e-6));
}

TEST_CASE("manifold: t_max below one period returns the seed segment") {
    ModelParams mp;
    auto line = trace_unstable_manifold(mp, 0.0, 1e-2);
    REQUIRE(line.size() >= 3);
    CHECK(line.multiplier > 1.0);
    // Driven saddle sits at the linear-response offset, not the origin.
    CHECK(line.q_fp == Catch::Approx(0.176).margin(5e-3));
    CHECK(line.p_fp == Catch::Approx(0.0).margin(1e-8));

    // All vertices are collinear with the eigendirection through the saddle.
    const double vx = line.q[2] - line.q_fp;
    const double vy = line.p[2] - line.p_fp;
    const double norm = std::hypot(vx, vy);
    for (std::size_t i = 1; i < line.size(); ++i) {
        const double wx = line.q[i] - line.q_fp;
        const double wy = line.p[i] - line.p_fp;
        const double cross = std::abs(vx * wy - vy * wx) / norm;
        CHECK(cross < 1e-9);
        CHECK(std::hypot(wx, wy) <= 1e-6 * std::sqrt(mp.area) * 1.0001);
    }
    CHECK(std::is_sorted(line.arc_time.begin(), line.arc_time.end()));
}

TEST_CASE("manifold: undriven trace lies on the separatrix contour") {
    ModelParams mp;
    mp.Lambda = 0.0;
    auto line = trace_unstable_manifold(mp, 5.0 * mp.drive_period(), 1e-2);
    REQUIRE(line.size() > 100);
    CHECK(std::abs(line.q_fp) < 1e-9);

    double worst = 0.0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const double q = line.q[i], p = line.p[i];
        const double pc2 = 2.0 * (mp.A_coef * q * q - mp.B_coef * q * q * q * q);
        if (pc2 < 0.0) continue;  // cannot happen on the exact contour
        if (std::abs(p) < 0.05) continue;  // vertical tangent at the turning point
        worst = std::max(worst, std::abs(std::abs(p) - std::sqrt(pc2)));
    }
    CHECK(worst < 1e-3);

    // Energy residual is a uniform version of the same statement.
    for (std::size_t i = 0; i < line.size(); ++i) {
        const double q = line.q[i], p = line.p[i];
        const double h = 0.5 * p * p + mp.B_coef * q * q * q * q - mp.A_coef * q * q;
        REQUIRE(std::abs(h) < 1e-5);
    }
}

TEST_CASE("manifold: vertex budget is enforced") {
    ModelParams mp;
    ManifoldOptions opt;
    opt.budget = 50;
    CHECK_THROWS_AS(
        trace_unstable_manifold(mp, 3.0 * mp.drive_period(), 1e-3, +1, opt),
        std::runtime_error);
}

TEST_CASE("manifold: both branches start on opposite sides") {
    ModelParams mp;
    auto plus = trace_unstable_manifold(mp, 0.0, 1e-2, +1);
    auto minus = trace_unstable_manifold(mp, 0.0, 1e-2, -1);
    const double dq_plus = plus.q[2] - plus.q_fp;
    const double dq_minus = minus.q[2] - minus.q_fp;
    CHECK(dq_plus * dq_minus < 0.0);
}
