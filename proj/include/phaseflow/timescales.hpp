#pragma once

#include <cmath>
#include <stdexcept>

#include "phaseflow/model.hpp"

namespace phaseflow {

/// Transverse width sqrt(D t / (m lambda_bar)) smoothed over by noise as a
/// trajectory unfolds along the unstable direction.
inline double l_classical(double t, const ModelParams& mp) {
    if (!(t >= 0.0)) throw std::invalid_argument("l_classical requires t >= 0");
    return std::sqrt(mp.D * t / (mp.m * mp.lambda_bar));
}

/// Phase-space scale hbar sqrt(m lambda_bar / (D t)) below which noise has
/// filtered semiclassical interference; diverges at t = 0.  This is the
/// interference filter X ~ hbar/sqrt(Dt) rescaled by sqrt(m lambda_bar), the
/// same scaling that makes l_classical a phase-space length; it crosses
/// l_classical at t_qc where both equal sqrt(hbar).
inline double l_quantum(double t, const ModelParams& mp) {
    if (!(t > 0.0)) throw std::invalid_argument("l_quantum diverges at t = 0");
    if (!(mp.D > 0.0)) throw std::invalid_argument("l_quantum requires D > 0");
    return mp.hbar * std::sqrt(mp.m * mp.lambda_bar / (mp.D * t));
}

/// Time before which the fold-spacing formula does not yet apply (the curve
/// has not begun folding onto itself).
inline double folding_onset(const ModelParams& mp) {
    return std::log(mp.area / mp.u0_sq) / (2.0 * mp.lambda_bar);
}

/// Typical distance A/(u0 e^{lambda_bar t}) between neighboring folds of a
/// stretching curve confined to area A; u0 is the linear scale sqrt(u0_sq).
/// Meaningful only past the folding onset.
inline double fold_spacing(double t, const ModelParams& mp) {
    if (!(t >= 0.0)) throw std::invalid_argument("fold_spacing requires t >= 0");
    return mp.area / std::sqrt(mp.u0_sq) * std::exp(-mp.lambda_bar * t);
}

struct TStarResult {
    double exact = 0.0;   ///< bisection root of l_classical(t) = fold_spacing(t)
    double approx = 0.0;  ///< closed-form iterate
    double x0 = 0.0;      ///< log argument ln(2 m lambda^2 A^2 / (D u0^2))
};

/// Structure-termination time: the root of
///   sqrt(D t / (m lambda_bar)) = (A/u0) exp(-lambda_bar t)
/// found by bracketed bisection to 1e-10, together with the closed-form
/// iterate t* ~ (x0/2lambda)[1 - ln(x0)/(1+x0)].
inline TStarResult t_star(const ModelParams& mp) {
    if (!(mp.D > 0.0)) throw std::invalid_argument("t_star requires D > 0");
    TStarResult r;
    r.x0 = std::log(2.0 * mp.m * mp.lambda_bar * mp.lambda_bar * mp.area * mp.area /
                    (mp.D * mp.u0_sq));
    r.approx = r.x0 / (2.0 * mp.lambda_bar) * (1.0 - std::log(r.x0) / (1.0 + r.x0));

    auto excess = [&](double t) { return l_classical(t, mp) - fold_spacing(t, mp); };
    double lo = 0.0;
    double hi = 1.0 / mp.lambda_bar;
    const double hi_max = 1e4 / mp.lambda_bar;
    while (excess(hi) < 0.0) {
        hi *= 2.0;
        if (hi > hi_max) throw std::runtime_error("t_star: no bracket below 1e4/lambda_bar");
    }
    // l_cl grows from 0 and delta decays from A/u0 > 0, so the root in
    // (0, hi] is unique and bracketed.
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    r.exact = 0.5 * (lo + hi);
    return r;
}

/// Weak quantum-classical transition time m hbar lambda_bar / D, the crossing
/// of l_classical and l_quantum; equivalently l_cl^2 = l_q^2 = hbar there.
inline double t_qc(const ModelParams& mp) {
    if (!(mp.D > 0.0) || !(mp.hbar > 0.0))
        throw std::invalid_argument("t_qc requires D > 0 and hbar > 0");
    return mp.m * mp.hbar * mp.lambda_bar / mp.D;
}

/// Ordering of the two derived times; with weak noise the transition follows
/// the classical structure freeze-out, with strong noise it precedes it.
enum class TimescaleRegime { transition_after_freezeout, transition_before_freezeout };

struct TimescaleReport {
    TStarResult t_star;
    double t_qc = 0.0;
    double folding_onset = 0.0;
    TimescaleRegime regime = TimescaleRegime::transition_after_freezeout;
    ModelParams params;  ///< inputs the report was built from
};

inline TimescaleReport timescale_report(const ModelParams& mp) {
    TimescaleReport rep;
    rep.params = mp;
    rep.t_star = t_star(mp);
    rep.t_qc = t_qc(mp);
    rep.folding_onset = folding_onset(mp);
    rep.regime = rep.t_qc >= rep.t_star.exact
                     ? TimescaleRegime::transition_after_freezeout
                     : TimescaleRegime::transition_before_freezeout;
    return rep;
}

} // namespace phaseflow
