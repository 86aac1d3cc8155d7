#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "phaseflow/model.hpp"

namespace phaseflow {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Independent RNG stream for one trajectory, derived from (seed, index) so
/// serial and parallel execution produce identical statistics.
inline std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(detail::splitmix64(seed ^ detail::splitmix64(index + 1)));
}

/// Project a phase-space displacement onto the stable (-) and unstable (+)
/// directions of a hyperbolic point: u+- = (q' +- p')/sqrt(2) with the
/// dimensional scalings q' = sqrt(lambda m) (q - q_eq), p' = p/sqrt(lambda m).
/// Both components carry dimension action^(1/2).
inline std::array<double, 2> project_stable_unstable(double q, double p, double m,
                                                     double lambda_local, double q_eq) {
    if (!(lambda_local > 0.0))
        throw std::invalid_argument("projection requires lambda_local > 0");
    const double root = std::sqrt(lambda_local * m);
    const double qs = root * (q - q_eq);
    const double ps = p / root;
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    return {(qs + ps) * inv_sqrt2, (qs - ps) * inv_sqrt2};
}

/// Time series of ensemble cumulants in (q,p) and, when the model has a
/// hyperbolic point, in the (u+,u-) frame.  Standard errors accompany every
/// statistic; all are estimated from sample moments.
struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean_q, se_mean_q;
    std::vector<double> mean_p, se_mean_p;
    std::vector<double> var_q, se_var_q;
    std::vector<double> var_p, se_var_p;
    std::vector<double> mean_up, se_mean_up;
    std::vector<double> mean_um, se_mean_um;
    std::vector<double> var_up, se_var_up;
    std::vector<double> var_um, se_var_um;
    std::vector<double> cov_upum, se_cov_upum;
    std::size_t n_trajectories = 0;  ///< trajectories that finished
    std::size_t n_aborted = 0;       ///< trajectories hitting non-finite values
    std::uint64_t seed = 0;
    bool has_hyperbolic = false;
    double lambda_local = 0.0;
    double q_eq = 0.0;
};

struct EnsembleOptions {
    std::size_t n = 10000;
    double dt = 1e-4;
    double t_end = 0.5;
    std::uint64_t seed = 1;
    double q0 = 0.0;  ///< common initial condition
    double p0 = 0.0;
    std::vector<double> sample_times;  ///< default: 5 even times ending at t_end
    /// Receives (trajectory, time, q, p) for every retained sample when set.
    std::function<void(std::size_t, double, double, double)> dump;
};

/// Euler-Maruyama unraveling of the dual Fokker-Planck equation:
///   dq = p dt/m,   dp = f(q,t) dt + sqrt(2D) dW.
/// All trajectories start from the same point; statistics are reduced in
/// trajectory order, so results are bit-identical for a fixed seed no matter
/// how the work is scheduled.
inline EnsembleStats simulate_ensemble(const EnsembleOptions& opt, const ModelParams& mp) {
    if (opt.n < 1) throw std::invalid_argument("ensemble needs at least one trajectory");
    if (!(opt.dt > 0.0) || !(opt.t_end >= opt.dt))
        throw std::invalid_argument("ensemble requires dt > 0 and t_end >= dt");

    std::vector<double> times = opt.sample_times;
    if (times.empty())
        for (int i = 1; i <= 5; ++i) times.push_back(opt.t_end * i / 5.0);

    const auto n_steps = static_cast<std::size_t>(std::llround(opt.t_end / opt.dt));
    std::vector<std::size_t> sample_idx;
    for (double tc : times) {
        auto idx = static_cast<std::size_t>(std::llround(tc / opt.dt));
        sample_idx.push_back(std::min(idx, n_steps));
    }

    const double noise_amp = std::sqrt(2.0 * mp.D * opt.dt);
    const std::size_t n_times = times.size();
    // (q,p) samples per trajectory and time; NaN marks aborted trajectories.
    std::vector<double> qs(opt.n * n_times), ps(opt.n * n_times);

    std::size_t aborted = 0;
    for (std::size_t traj = 0; traj < opt.n; ++traj) {
        auto rng = trajectory_rng(opt.seed, traj);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double q = opt.q0, p = opt.p0;
        bool dead = false;
        std::size_t next = 0;
        std::vector<std::size_t> order(sample_idx.size());
        for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return sample_idx[a] < sample_idx[b]; });

        auto record = [&](std::size_t step) {
            while (next < order.size() && sample_idx[order[next]] == step) {
                const std::size_t slot = traj * n_times + order[next];
                qs[slot] = dead ? std::numeric_limits<double>::quiet_NaN() : q;
                ps[slot] = dead ? std::numeric_limits<double>::quiet_NaN() : p;
                if (!dead && opt.dump) opt.dump(traj, times[order[next]], q, p);
                ++next;
            }
        };

        record(0);
        for (std::size_t s = 0; s < n_steps && !(dead && next == order.size()); ++s) {
            const double t = static_cast<double>(s) * opt.dt;
            const double qn = q + p * opt.dt / mp.m;
            double pn = p + force(q, t, mp) * opt.dt;
            if (mp.D > 0.0) pn += noise_amp * gauss(rng);
            q = qn;
            p = pn;
            if (!dead && (!std::isfinite(q) || !std::isfinite(p))) {
                dead = true;
                ++aborted;
            }
            record(s + 1);
        }
        record(n_steps);
    }

    EnsembleStats st;
    st.times = times;
    st.seed = opt.seed;
    st.n_aborted = aborted;
    try {
        const auto hp = linearize_hyperbolic(mp);
        st.has_hyperbolic = true;
        st.lambda_local = hp.lambda_local;
        st.q_eq = hp.q_eq;
    } catch (const std::invalid_argument&) {
        st.has_hyperbolic = false;
    }

    auto resize_all = [&](std::size_t n) {
        for (auto* v :
             {&st.mean_q, &st.se_mean_q, &st.mean_p, &st.se_mean_p, &st.var_q, &st.se_var_q,
              &st.var_p, &st.se_var_p, &st.mean_up, &st.se_mean_up, &st.mean_um,
              &st.se_mean_um, &st.var_up, &st.se_var_up, &st.var_um, &st.se_var_um,
              &st.cov_upum, &st.se_cov_upum})
            v->assign(n, 0.0);
    };
    resize_all(n_times);

    // Sample mean/variance with moment-based standard errors:
    // se(mean) = sqrt(m2/n), se(var) = sqrt((m4 - m2^2)/n).
    auto summarize = [](std::span<const double> x, double& mean, double& se_mean,
                        double& var, double& se_var) {
        const double inv = 1.0 / static_cast<double>(x.size());
        mean = 0.0;
        for (double v : x) mean += v;
        mean *= inv;
        double m2 = 0.0, m4 = 0.0;
        for (double v : x) {
            const double d = v - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 *= inv;
        m4 *= inv;
        var = m2;
        se_mean = std::sqrt(std::max(m2, 0.0) * inv);
        se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) * inv);
    };

    std::vector<double> qa(opt.n), pa(opt.n), up(opt.n), um(opt.n);
    for (std::size_t ti = 0; ti < n_times; ++ti) {
        std::size_t count = 0;
        for (std::size_t traj = 0; traj < opt.n; ++traj) {
            const double q = qs[traj * n_times + ti];
            const double p = ps[traj * n_times + ti];
            if (!std::isfinite(q) || !std::isfinite(p)) continue;
            qa[count] = q;
            pa[count] = p;
            if (st.has_hyperbolic) {
                const auto uu = project_stable_unstable(q, p, mp.m, st.lambda_local, st.q_eq);
                up[count] = uu[0];
                um[count] = uu[1];
            }
            ++count;
        }
        st.n_trajectories = count;
        if (count == 0) continue;
        const double inv = 1.0 / static_cast<double>(count);
        summarize({qa.data(), count}, st.mean_q[ti], st.se_mean_q[ti], st.var_q[ti],
                  st.se_var_q[ti]);
        summarize({pa.data(), count}, st.mean_p[ti], st.se_mean_p[ti], st.var_p[ti],
                  st.se_var_p[ti]);
        if (!st.has_hyperbolic) continue;

        summarize({up.data(), count}, st.mean_up[ti], st.se_mean_up[ti], st.var_up[ti],
                  st.se_var_up[ti]);
        summarize({um.data(), count}, st.mean_um[ti], st.se_mean_um[ti], st.var_um[ti],
                  st.se_var_um[ti]);
        double c11 = 0.0, c22 = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double a = up[i] - st.mean_up[ti];
            const double b = um[i] - st.mean_um[ti];
            c11 += a * b;
            c22 += a * a * b * b;
        }
        c11 *= inv;
        c22 *= inv;
        st.cov_upum[ti] = c11;
        st.se_cov_upum[ti] = std::sqrt(std::max(c22 - c11 * c11, 0.0) * inv);
    }
    return st;
}

/// Convenience overload matching the (n, dt, T, seed) calling convention.
inline EnsembleStats simulate_ensemble(std::size_t n, double dt, double t_end,
                                       std::uint64_t seed, const ModelParams& mp) {
    EnsembleOptions opt;
    opt.n = n;
    opt.dt = dt;
    opt.t_end = t_end;
    opt.seed = seed;
    return simulate_ensemble(opt, mp);
}

struct CumulantRow {
    double time;
    const char* name;  ///< "var_u+", "var_u-", "cov"
    double observed;
    double expected;
    double stderr_;
    bool pass;
};

struct CumulantCheck {
    std::vector<CumulantRow> rows;
    bool all_pass = true;
    bool sufficient = true;  ///< at least 1e3 trajectories
};

/// Compare measured second cumulants on the linearized model against the
///   Var(u+-) = +-(D/(2 m lambda^2))(e^{+-2 lambda t} - 1),
///   Cov(u+,u-) = -D t/(m lambda)
/// laws; each entry passes when within three standard errors.
inline CumulantCheck cumulant_check(const EnsembleStats& st, const ModelParams& mp) {
    if (!st.has_hyperbolic)
        throw std::invalid_argument("cumulant check needs a hyperbolic point");
    CumulantCheck out;
    out.sufficient = st.n_trajectories >= 1000;
    const double lam = st.lambda_local;
    const double base = mp.D / (2.0 * mp.m * lam * lam);
    for (std::size_t ti = 0; ti < st.times.size(); ++ti) {
        const double t = st.times[ti];
        const double vp = base * (std::exp(2.0 * lam * t) - 1.0);
        const double vm = -base * (std::exp(-2.0 * lam * t) - 1.0);
        const double cv = -mp.D * t / (mp.m * lam);
        auto push = [&](const char* name, double obs, double exp_, double se) {
            const bool ok = std::abs(obs - exp_) <= 3.0 * se || obs == exp_;
            out.rows.push_back({t, name, obs, exp_, se, ok});
            out.all_pass = out.all_pass && ok;
        };
        push("var_u+", st.var_up[ti], vp, st.se_var_up[ti]);
        push("var_u-", st.var_um[ti], vm, st.se_var_um[ti]);
        push("cov", st.cov_upum[ti], cv, st.se_cov_upum[ti]);
    }
    return out;
}

namespace detail {

/// One RK4 step of the flow and (optionally) its tangent map.
inline void rk4_step(double& q, double& p, double* vq, double* vp, double t, double dt,
                     const ModelParams& mp) {
    struct Deriv {
        double dq, dp, dvq, dvp;
    };
    const bool tangent = vq != nullptr;
    auto eval = [&](double qq, double pp, double vvq, double vvp, double tt) {
        Deriv d;
        d.dq = pp / mp.m;
        d.dp = force(qq, tt, mp);
        if (tangent) {
            d.dvq = vvp / mp.m;
            d.dvp = -d2V(qq, mp) * vvq;  // df/dq = -V''
        } else {
            d.dvq = d.dvp = 0.0;
        }
        return d;
    };
    const double vq0 = tangent ? *vq : 0.0;
    const double vp0 = tangent ? *vp : 0.0;
    const Deriv k1 = eval(q, p, vq0, vp0, t);
    const Deriv k2 = eval(q + 0.5 * dt * k1.dq, p + 0.5 * dt * k1.dp, vq0 + 0.5 * dt * k1.dvq,
                          vp0 + 0.5 * dt * k1.dvp, t + 0.5 * dt);
    const Deriv k3 = eval(q + 0.5 * dt * k2.dq, p + 0.5 * dt * k2.dp, vq0 + 0.5 * dt * k2.dvq,
                          vp0 + 0.5 * dt * k2.dvp, t + 0.5 * dt);
    const Deriv k4 = eval(q + dt * k3.dq, p + dt * k3.dp, vq0 + dt * k3.dvq,
                          vp0 + dt * k3.dvp, t + dt);
    const double w = dt / 6.0;
    q += w * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    p += w * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    if (tangent) {
        *vq = vq0 + w * (k1.dvq + 2.0 * k2.dvq + 2.0 * k3.dvq + k4.dvq);
        *vp = vp0 + w * (k1.dvp + 2.0 * k2.dvp + 2.0 * k3.dvp + k4.dvp);
    }
}

} // namespace detail

struct LyapunovEstimate {
    double lambda_bar = 0.0;
    double stderr_ = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;  ///< escaped the bounded region
};

struct LyapunovOptions {
    double t_end = 1000.0;
    std::size_t n = 16;
    double dt = 2e-3;
    std::uint64_t seed = 7;
    double t_burn = 20.0;     ///< transient discarded before averaging
    double q_escape = 10.0;   ///< beyond this the trajectory left the bounded region
    double ic_half_width_q = 0.5;  ///< initial conditions near the hyperbolic point
    double ic_half_width_p = 1.0;
};

/// Time-averaged largest Lyapunov exponent via tangent-vector
/// renormalization along noise-free trajectories, averaged over initial
/// conditions drawn near the hyperbolic point (inside the chaotic region).
inline LyapunovEstimate lyapunov_estimate(const LyapunovOptions& opt, const ModelParams& mp) {
    if (!(opt.t_end > opt.t_burn)) throw std::invalid_argument("t_end must exceed t_burn");
    std::vector<double> estimates;
    std::size_t excluded = 0;
    const auto n_steps = static_cast<std::size_t>(std::llround(opt.t_end / opt.dt));
    const auto burn_steps = static_cast<std::size_t>(std::llround(opt.t_burn / opt.dt));

    for (std::size_t traj = 0; traj < opt.n; ++traj) {
        auto rng = trajectory_rng(opt.seed, traj);
        std::uniform_real_distribution<double> uq(-opt.ic_half_width_q, opt.ic_half_width_q);
        std::uniform_real_distribution<double> up(-opt.ic_half_width_p, opt.ic_half_width_p);
        double q = uq(rng), p = up(rng);
        double vq = 1.0 / std::numbers::sqrt2, vp = 1.0 / std::numbers::sqrt2;
        double log_growth = 0.0;
        bool escaped = false;
        for (std::size_t s = 0; s < n_steps; ++s) {
            detail::rk4_step(q, p, &vq, &vp, static_cast<double>(s) * opt.dt, opt.dt, mp);
            const double norm = std::hypot(vq, vp);
            if (s >= burn_steps) log_growth += std::log(norm);
            vq /= norm;
            vp /= norm;
            if (std::abs(q) > opt.q_escape || !std::isfinite(q) || !std::isfinite(p)) {
                escaped = true;
                break;
            }
        }
        if (escaped) {
            ++excluded;
            continue;
        }
        estimates.push_back(log_growth / (opt.t_end - opt.t_burn));
    }

    LyapunovEstimate out;
    out.n_used = estimates.size();
    out.n_excluded = excluded;
    if (estimates.empty()) throw std::runtime_error("all trajectories escaped");
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(estimates.size());
    double var = 0.0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    if (estimates.size() > 1) var /= static_cast<double>(estimates.size() - 1);
    out.lambda_bar = mean;
    out.stderr_ = std::sqrt(var / static_cast<double>(estimates.size()));
    return out;
}

inline LyapunovEstimate lyapunov_estimate(double t_end, std::size_t n, double dt,
                                          std::uint64_t seed, const ModelParams& mp) {
    LyapunovOptions opt;
    opt.t_end = t_end;
    opt.n = n;
    opt.dt = dt;
    opt.seed = seed;
    return lyapunov_estimate(opt, mp);
}

/// Piece of an invariant manifold as an ordered vertex chain.
struct ManifoldPolyline {
    std::vector<double> q, p;
    std::vector<double> arc_time;  ///< time parameter: when the seed reaches the vertex
    double q_fp = 0.0, p_fp = 0.0; ///< originating periodic point
    double multiplier = 0.0;       ///< unstable eigenvalue of the period map
    int branch = +1;

    std::size_t size() const { return q.size(); }
};

struct ManifoldOptions {
    double epsilon = 0.0;        ///< seed displacement; 0 means 1e-6*sqrt(area)
    std::size_t map_steps = 2048;  ///< RK4 steps per drive period
    std::size_t budget = 400000;   ///< vertex cap
    std::size_t initial_per_period = 32;
};

namespace detail {

struct PeriodMap {
    const ModelParams& mp;
    double period;
    std::size_t steps;

    std::array<double, 2> operator()(std::array<double, 2> x, int repeats = 1) const {
        const double dt = period / static_cast<double>(steps);
        for (int r = 0; r < repeats; ++r)
            for (std::size_t s = 0; s < steps; ++s)
                rk4_step(x[0], x[1], nullptr, nullptr, static_cast<double>(s) * dt, dt, mp);
        return x;
    }

    /// Jacobian by central finite differences.
    std::array<double, 4> jacobian(std::array<double, 2> x, double eps = 1e-7) const {
        std::array<double, 4> j{};
        for (int c = 0; c < 2; ++c) {
            auto hi = x, lo = x;
            hi[c] += eps;
            lo[c] -= eps;
            const auto fhi = (*this)(hi);
            const auto flo = (*this)(lo);
            j[0 * 2 + c] = (fhi[0] - flo[0]) / (2.0 * eps);
            j[1 * 2 + c] = (fhi[1] - flo[1]) / (2.0 * eps);
        }
        return j;
    }
};

} // namespace detail

/// Trace the unstable manifold of the hyperbolic periodic point of the
/// stroboscopic map.  The periodic point is located by Newton refinement
/// from the undriven hyperbolic point; a seed displaced by epsilon along the
/// unstable eigendirection is carried through floor(t_max/period) map
/// iterations, and segments whose images separate beyond `resolution` are
/// subdivided (geometrically in seed displacement) until they comply.
inline ManifoldPolyline trace_unstable_manifold(const ModelParams& mp, double t_max,
                                                double resolution, int branch = +1,
                                                const ManifoldOptions& opt = {}) {
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    if (branch != 1 && branch != -1) throw std::invalid_argument("branch must be +-1");
    const double period = mp.drive_period();
    const int n_iter = std::max(0, static_cast<int>(std::floor(t_max / period + 1e-9)));
    const detail::PeriodMap map{mp, period, opt.map_steps};

    // Newton refinement of the periodic point.  The undriven hyperbolic
    // point continues to a periodic saddle orbit; its linear-response
    // position at drive phase zero seeds the iteration (a bare q_eq seed
    // lands outside the Newton basin for strong driving).
    const auto hp = linearize_hyperbolic(mp);
    const double lam2 = hp.lambda_local * hp.lambda_local;
    std::array<double, 2> x{
        hp.q_eq + mp.Lambda / (mp.m * (lam2 + mp.omega * mp.omega)), 0.0};
    bool converged = false;
    auto residual = [&](const std::array<double, 2>& y) {
        const auto fy = map(y);
        return std::array<double, 2>{fy[0] - y[0], fy[1] - y[1]};
    };
    auto g = residual(x);
    for (int it = 0; it < 100; ++it) {
        if (std::hypot(g[0], g[1]) < 1e-10) {
            converged = true;
            break;
        }
        auto j = map.jacobian(x);
        j[0] -= 1.0;  // J - I
        j[3] -= 1.0;
        const double det = j[0] * j[3] - j[1] * j[2];
        if (std::abs(det) < 1e-14)
            throw std::runtime_error("singular Jacobian in periodic-point Newton");
        const double dx = (j[3] * g[0] - j[1] * g[1]) / det;
        const double dy = (-j[2] * g[0] + j[0] * g[1]) / det;
        // Damped update: back off while the residual grows.
        double lambda_step = 1.0;
        for (int bt = 0; bt < 12; ++bt) {
            std::array<double, 2> trial{x[0] - lambda_step * dx, x[1] - lambda_step * dy};
            auto gt = residual(trial);
            if (std::hypot(gt[0], gt[1]) < std::hypot(g[0], g[1]) || bt == 11) {
                x = trial;
                g = gt;
                break;
            }
            lambda_step *= 0.5;
        }
    }
    if (!converged) throw std::runtime_error("periodic point Newton failed to converge");

    // Unstable eigenpair of the monodromy matrix.
    const auto j = map.jacobian(x);
    const double tr = j[0] + j[3];
    const double det = j[0] * j[3] - j[1] * j[2];
    const double disc = tr * tr - 4.0 * det;
    if (disc <= 0.0) throw std::runtime_error("periodic point is not hyperbolic");
    const double root = std::sqrt(disc);
    const double mu = std::abs(0.5 * (tr + root)) > std::abs(0.5 * (tr - root))
                          ? 0.5 * (tr + root)
                          : 0.5 * (tr - root);
    if (std::abs(mu) <= 1.0) throw std::runtime_error("no expanding multiplier");
    double vx, vy;
    if (std::abs(j[1]) > std::abs(j[2])) {
        vx = j[1];
        vy = mu - j[0];
    } else {
        vx = mu - j[3];
        vy = j[2];
    }
    const double vnorm = std::hypot(vx, vy);
    vx /= vnorm;
    vy /= vnorm;

    const double eps = opt.epsilon > 0.0 ? opt.epsilon : 1e-6 * std::sqrt(mp.area);
    const double log_mu = std::log(std::abs(mu));

    ManifoldPolyline line;
    line.q_fp = x[0];
    line.p_fp = x[1];
    line.multiplier = mu;
    line.branch = branch;

    // Vertices are images of seeds s in [eps*mu^-n_iter, eps] after n_iter
    // map applications; the seed displacement parametrizes the curve.
    struct Vertex {
        double s;
        std::array<double, 2> pt;
    };
    auto lift = [&](double s) {
        std::array<double, 2> seed{x[0] + branch * s * vx, x[1] + branch * s * vy};
        return Vertex{s, n_iter > 0 ? map(seed, n_iter) : seed};
    };

    std::vector<Vertex> verts;
    const std::size_t n0 = std::max<std::size_t>(2, opt.initial_per_period * (n_iter + 1));
    // Seeds span [eps*ratio, eps]; mapped n_iter times they cover the manifold
    // out to roughly eps*mu^n_iter.  With t_max below one period the seed
    // segment itself (one fundamental domain) is returned.
    const double ratio = std::exp(-log_mu * std::max(n_iter, 1));
    // Inner seeds must stay resolvable against the fixed-point coordinates.
    if (eps * ratio < 1e3 * std::numeric_limits<double>::epsilon() * std::hypot(x[0], x[1]))
        throw std::invalid_argument("t_max too large: seed displacement underflows");
    for (std::size_t i = 0; i < n0; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n0 - 1);
        verts.push_back(lift(eps * std::pow(ratio, 1.0 - f)));
    }

    // Subdivide (geometric midpoint in s) until adjacent images are closer
    // than the requested resolution.
    for (std::size_t i = 0; i + 1 < verts.size();) {
        const auto& a = verts[i];
        const auto& b = verts[i + 1];
        const double gap = std::hypot(a.pt[0] - b.pt[0], a.pt[1] - b.pt[1]);
        if (gap > resolution && b.s / a.s > 1.0 + 1e-12) {
            if (verts.size() >= opt.budget)
                throw std::runtime_error("manifold vertex budget exceeded");
            verts.insert(verts.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                         lift(std::sqrt(a.s * b.s)));
        } else {
            ++i;
        }
    }

    line.q.reserve(verts.size() + 1);
    line.p.reserve(verts.size() + 1);
    line.arc_time.reserve(verts.size() + 1);
    line.q.push_back(x[0]);
    line.p.push_back(x[1]);
    line.arc_time.push_back(0.0);
    for (const auto& v : verts) {
        line.q.push_back(v.pt[0]);
        line.p.push_back(v.pt[1]);
        // Growth time from the innermost seed to this vertex's scale.
        line.arc_time.push_back(std::log(v.s / (eps * ratio)) / log_mu * period);
    }
    return line;
}

} // namespace phaseflow
