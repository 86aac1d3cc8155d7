#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "phaseflow/grid.hpp"
#include "phaseflow/model.hpp"

namespace phaseflow {

/// Weyl-symmetrized moment <q^n p^m>: the phase-space average of the plain
/// monomial, which equals the quantum expectation of the symmetrized
/// operator.  Direct Riemann sum on the uniform periodic grid.
inline double moment(const Field& f, unsigned n, unsigned m) {
    if (n + m > 6) throw std::invalid_argument("moments supported up to total order 6");
    const auto& g = f.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nq; ++i) {
        double qn = 1.0;
        for (unsigned a = 0; a < n; ++a) qn *= g.q[i];
        double row = 0.0;
        for (std::size_t j = 0; j < g.np; ++j) {
            double pm = 1.0;
            for (unsigned b = 0; b < m; ++b) pm *= g.p[j];
            row += pm * f(i, j).real();
        }
        acc += qn * row;
    }
    const double result = acc * g.cell_area();
    if (!std::isfinite(result)) throw std::runtime_error("moment overflowed");
    return result;
}

/// Integrated negative part, integral of max(-f, 0).  Zero iff f >= 0 on the grid.
inline double negativity(const Field& f) {
    double acc = 0.0;
    for (const Complex& v : f.values()) acc += std::max(-v.real(), 0.0);
    return acc * f.grid().cell_area();
}

inline double min_value(const Field& f) {
    double lo = f.values()[0].real();
    for (const Complex& v : f.values()) lo = std::min(lo, v.real());
    return lo;
}

inline double max_abs(const Field& f) {
    double hi = 0.0;
    for (const Complex& v : f.values()) hi = std::max(hi, std::abs(v.real()));
    return hi;
}

enum class DistanceKind { L1, L2 };

inline double distance(const Field& a, const Field& b, DistanceKind kind) {
    a.check_same_grid(b);
    const auto va = a.values();
    const auto vb = b.values();
    double acc = 0.0;
    if (kind == DistanceKind::L1) {
        for (std::size_t n = 0; n < va.size(); ++n)
            acc += std::abs(va[n].real() - vb[n].real());
        return acc * a.grid().cell_area();
    }
    for (std::size_t n = 0; n < va.size(); ++n) {
        const double d = va[n].real() - vb[n].real();
        acc += d * d;
    }
    return std::sqrt(acc * a.grid().cell_area());
}

/// <H> at the field's current time: kinetic plus potential phase-space average.
inline double energy(const Field& f, const ModelParams& mp) {
    const auto& g = f.grid();
    const double t = f.time();
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nq; ++i) {
        const double v_pot = potential(g.q[i], t, mp);
        for (std::size_t j = 0; j < g.np; ++j) {
            const double h = g.p[j] * g.p[j] / (2.0 * mp.m) + v_pot;
            acc += h * f(i, j).real();
        }
    }
    return acc * g.cell_area();
}

/// Cross-section f(q, p ~ p0): nearest row below p0 blended linearly with the
/// (periodically wrapped) row above.  Returns (q_i, value) pairs.
inline std::vector<std::pair<double, double>> slice(const Field& f, double p0) {
    const auto& g = f.grid();
    if (p0 < g.p_min || p0 > g.p_max)
        throw std::invalid_argument("slice momentum outside the grid");
    const double u = (p0 - g.p_min) / g.dp;
    std::size_t j0 = std::min(static_cast<std::size_t>(u), g.np - 1);
    const double w = u - static_cast<double>(j0);
    const std::size_t j1 = (j0 + 1) % g.np;
    std::vector<std::pair<double, double>> out;
    out.reserve(g.nq);
    for (std::size_t i = 0; i < g.nq; ++i)
        out.emplace_back(g.q[i],
                         (1.0 - w) * f(i, j0).real() + w * f(i, j1).real());
    return out;
}

/// |f| mass in the outer margin band of the box; guards the periodic
/// approximation of the open domain.
inline double boundary_mass(const Field& f, double margin_fraction) {
    if (!(margin_fraction > 0.0 && margin_fraction < 0.5))
        throw std::invalid_argument("margin_fraction must lie in (0, 0.5)");
    const auto& g = f.grid();
    const auto mq = static_cast<std::size_t>(std::llround(margin_fraction * static_cast<double>(g.nq)));
    const auto mp_ = static_cast<std::size_t>(std::llround(margin_fraction * static_cast<double>(g.np)));
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nq; ++i) {
        const bool q_band = i < mq || i >= g.nq - mq;
        for (std::size_t j = 0; j < g.np; ++j) {
            if (q_band || j < mp_ || j >= g.np - mp_) acc += std::abs(f(i, j).real());
        }
    }
    return acc * g.cell_area();
}

/// Scalar observables of one field at one instant, with optional distances
/// to a twin evolution on the same grid.
struct DiagnosticsRecord {
    double time = 0.0;
    double norm = 0.0;
    double q1 = 0.0, p1 = 0.0;
    double q2 = 0.0, p2 = 0.0;
    double qp = 0.0;
    double energy = 0.0;
    double negativity = 0.0;
    double min_value = 0.0;
    double boundary_mass = 0.0;
    std::optional<double> l1;
    std::optional<double> l2;
};

inline DiagnosticsRecord make_record(const Field& f, const ModelParams& mp,
                                     double margin_fraction = 0.1,
                                     const Field* twin = nullptr) {
    DiagnosticsRecord r;
    r.time = f.time();
    r.norm = f.integral().real();
    r.q1 = moment(f, 1, 0);
    r.p1 = moment(f, 0, 1);
    r.q2 = moment(f, 2, 0);
    r.p2 = moment(f, 0, 2);
    r.qp = moment(f, 1, 1);
    r.energy = energy(f, mp);
    r.negativity = negativity(f);
    r.min_value = min_value(f);
    r.boundary_mass = boundary_mass(f, margin_fraction);
    if (twin) {
        r.l1 = distance(f, *twin, DistanceKind::L1);
        r.l2 = distance(f, *twin, DistanceKind::L2);
    }
    return r;
}

} // namespace phaseflow
