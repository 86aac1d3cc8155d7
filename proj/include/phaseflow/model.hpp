#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phaseflow {

/// Physical parameters of the driven quartic (Duffing) family
///
///   V(q,t) = B q^4 - A q^2 + Lambda q cos(omega t),  H = p^2/2m + V.
///
/// Every symbol used anywhere in the engine lives here; defaults are the
/// canonical strongly chaotic set.  The diffusion coefficient D relates to a
/// continuous-position-measurement coupling k_meas through D = hbar^2 k_meas;
/// D itself is the input.
struct ModelParams {
    double m = 1.0;           ///< mass
    double hbar = 0.1;        ///< action quantum (0 is allowed for classical-only use)
    double D = 1e-3;          ///< momentum diffusion coefficient (momentum^2/time)
    double A_coef = 10.0;     ///< quadratic coefficient
    double B_coef = 0.5;      ///< quartic coefficient
    double Lambda = 10.0;     ///< drive amplitude
    double omega = 6.07;      ///< drive frequency
    double lambda_bar = 0.57; ///< time-averaged Lyapunov exponent (1/time)
    double area = 270.0;      ///< bounded chaotic phase-space area (action units)
    double u0_sq = 0.1;       ///< initial coarse-grain area u0^2 (action)

    double drive_period() const { return 2.0 * std::numbers::pi / omega; }

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
        if (!(hbar >= 0.0)) throw std::invalid_argument("hbar must be nonnegative");
        if (!(D >= 0.0)) throw std::invalid_argument("D must be nonnegative");
        if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
        if (!(lambda_bar > 0.0)) throw std::invalid_argument("lambda_bar must be positive");
        if (!(area > 0.0)) throw std::invalid_argument("area must be positive");
        if (!(u0_sq > 0.0)) throw std::invalid_argument("u0_sq must be positive");
        if (!(std::isfinite(A_coef) && std::isfinite(B_coef) && std::isfinite(Lambda)))
            throw std::invalid_argument("potential coefficients must be finite");
    }
};

/// V(q,t) = B q^4 - A q^2 + Lambda q cos(omega t)
inline double potential(double q, double t, const ModelParams& mp) {
    const double q2 = q * q;
    return mp.B_coef * q2 * q2 - mp.A_coef * q2 + mp.Lambda * q * std::cos(mp.omega * t);
}

/// f(q,t) = -dV/dq = -4B q^3 + 2A q - Lambda cos(omega t)
inline double force(double q, double t, const ModelParams& mp) {
    return -4.0 * mp.B_coef * q * q * q + 2.0 * mp.A_coef * q -
           mp.Lambda * std::cos(mp.omega * t);
}

/// dV/dq at (q,t)
inline double dV(double q, double t, const ModelParams& mp) { return -force(q, t, mp); }

/// d2V/dq2 (drive-independent)
inline double d2V(double q, const ModelParams& mp) {
    return 12.0 * mp.B_coef * q * q - 2.0 * mp.A_coef;
}

/// d3V/dq3 = 24 B q.  For the quartic family all higher potential
/// derivatives vanish, so the quantum correction series ends at this term.
inline double d3V(double q, const ModelParams& mp) { return 24.0 * mp.B_coef * q; }

struct HyperbolicPoint {
    double q_eq;          ///< critical point with V'' < 0
    double lambda_local;  ///< sqrt(f'(q_eq)/m), the local instability rate
};

/// Locate the hyperbolic critical point of the undriven potential and its
/// local Lyapunov exponent, defined through m lambda^2 = df/dq (q_eq).
///
/// For the quartic family the undriven force -4Bq^3 + 2Aq has critical
/// points q = 0 and q = +-sqrt(A/2B); only q = 0 can be hyperbolic, and it
/// is exactly when A > 0.
inline HyperbolicPoint linearize_hyperbolic(const ModelParams& mp) {
    if (!(mp.A_coef > 0.0))
        throw std::invalid_argument(
            "potential has no hyperbolic critical point (requires A > 0)");
    const double q_eq = 0.0;
    const double fprime = 2.0 * mp.A_coef;  // df/dq at q_eq, equals -V''(0)
    return HyperbolicPoint{q_eq, std::sqrt(fprime / mp.m)};
}

} // namespace phaseflow
