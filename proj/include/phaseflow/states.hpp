#pragma once

#include <cmath>

#include "phaseflow/grid.hpp"
#include "phaseflow/model.hpp"

namespace phaseflow {

/// One Gaussian lobe of an initial distribution.
struct GaussianSpec {
    double q0 = 0.0;
    double p0 = 0.0;
    double sigma_q = 1.0;
    double sigma_p = 1.0;
    double weight = 1.0;

    void validate() const {
        if (!(sigma_q > 0.0) || !(sigma_p > 0.0))
            throw std::invalid_argument("gaussian widths must be positive");
        if (!(weight > 0.0)) throw std::invalid_argument("gaussian weight must be positive");
    }
};

namespace detail {

inline void require_inside(const GaussianSpec& s, const PhaseSpaceGrid& g) {
    const double rq = 5.0 * s.sigma_q;
    const double rp = 5.0 * s.sigma_p;
    if (s.q0 - rq < g.q_min || s.q0 + rq > g.q_max || s.p0 - rp < g.p_min ||
        s.p0 + rp > g.p_max)
        throw std::invalid_argument("gaussian 5-sigma ellipse exits the phase-space box");
}

} // namespace detail

/// Wigner function of a single Gaussian wavepacket,
///   f(q,p) = (2 pi sq sp)^-1 exp{-(q-q0)^2/2sq^2 - (p-p0)^2/2sp^2},
/// renormalized so the discrete integral is exactly one.
inline Field gaussian_wigner(const GaussianSpec& spec, GridPtr grid) {
    spec.validate();
    detail::require_inside(spec, *grid);
    Field f(grid);
    const auto& g = *grid;
    const double amp = 1.0 / (2.0 * std::numbers::pi * spec.sigma_q * spec.sigma_p);
    const double cq = 0.5 / (spec.sigma_q * spec.sigma_q);
    const double cp = 0.5 / (spec.sigma_p * spec.sigma_p);
    for (std::size_t i = 0; i < g.nq; ++i) {
        const double dqc = g.q[i] - spec.q0;
        for (std::size_t j = 0; j < g.np; ++j) {
            const double dpc = g.p[j] - spec.p0;
            f(i, j) = amp * std::exp(-cq * dqc * dqc - cp * dpc * dpc);
        }
    }
    f.normalize();
    return f;
}

/// Wigner function of the equal-weight coherent superposition of two Gaussian
/// wavepackets with identical widths: two lobes plus the oscillatory
/// interference ridge at their midpoint, fringe wavevector separation/hbar.
///
/// Both specs must be minimum-uncertainty (sigma_q sigma_p = hbar/2), since
/// the ridge is derived from an underlying pure state.  The result is signed;
/// it is renormalized on the grid and seeds quantum and classical runs alike.
inline Field cat_state_wigner(const GaussianSpec& a, const GaussianSpec& b, GridPtr grid,
                              const ModelParams& mp) {
    a.validate();
    b.validate();
    detail::require_inside(a, *grid);
    detail::require_inside(b, *grid);
    if (std::abs(a.sigma_q - b.sigma_q) > 1e-12 || std::abs(a.sigma_p - b.sigma_p) > 1e-12)
        throw std::invalid_argument("cat state requires equal widths");
    if (!(mp.hbar > 0.0)) throw std::invalid_argument("cat state requires hbar > 0");
    if (std::abs(a.sigma_q * a.sigma_p - 0.5 * mp.hbar) > 1e-9 * mp.hbar)
        throw std::invalid_argument("cat state requires sigma_q*sigma_p = hbar/2");

    const auto& g = *grid;
    Field f(grid);
    const double sq = a.sigma_q, sp = a.sigma_p;
    const double amp = 1.0 / (2.0 * std::numbers::pi * sq * sp);
    const double cq = 0.5 / (sq * sq);
    const double cp = 0.5 / (sp * sp);
    const double q_mid = 0.5 * (a.q0 + b.q0);
    const double p_mid = 0.5 * (a.p0 + b.p0);
    const double dq_ab = a.q0 - b.q0;
    const double dp_ab = a.p0 - b.p0;

    for (std::size_t i = 0; i < g.nq; ++i) {
        const double qa = g.q[i] - a.q0;
        const double qb = g.q[i] - b.q0;
        const double qm = g.q[i] - q_mid;
        const double eq_a = std::exp(-cq * qa * qa);
        const double eq_b = std::exp(-cq * qb * qb);
        const double eq_m = std::exp(-cq * qm * qm);
        for (std::size_t j = 0; j < g.np; ++j) {
            const double pa = g.p[j] - a.p0;
            const double pb = g.p[j] - b.p0;
            const double pm = g.p[j] - p_mid;
            const double lobes =
                eq_a * std::exp(-cp * pa * pa) + eq_b * std::exp(-cp * pb * pb);
            // Cross-Wigner of the two wavepackets (same widths), phase
            // (dp*q - dq*(p-p_mid))/hbar; twice its real part is the ridge.
            const double phase = (dp_ab * g.q[i] - dq_ab * pm) / mp.hbar;
            const double ridge = 2.0 * eq_m * std::exp(-cp * pm * pm) * std::cos(phase);
            f(i, j) = amp * (lobes + ridge);
        }
    }
    f.normalize();
    return f;
}

} // namespace phaseflow
