#pragma once

#include <functional>

#include "phaseflow/diagnostics.hpp"
#include "phaseflow/grid.hpp"
#include "phaseflow/model.hpp"
#include "phaseflow/spectral.hpp"

namespace phaseflow {

enum class EvolveMode { quantum, classical };

/// Streaming factor e^{-i k p dt/m}: applied in the (k,p) representation it
/// advances f(q,p) -> f(q - p dt/m, p) exactly.
inline Complex stream_multiplier(double k, double p, double dt, double m) {
    return std::polar(1.0, -k * p * dt / m);
}

/// Potential-kick factor in the (q,xi) representation.
///
/// Classical: exp{i dt xi V'(q,t)}, the exact Liouville kick.
/// Quantum:   exp{(i dt/hbar) [V(q + hbar xi/2, t) - V(q - hbar xi/2, t)]},
/// the exact Moyal kick for any potential.  For the quartic family the two
/// differ by exactly exp{i dt hbar^2 B q xi^3}.
inline Complex kick_phase(double q, double xi, double t_mid, double dt,
                          const ModelParams& mp, EvolveMode mode) {
    if (mode == EvolveMode::classical)
        return std::polar(1.0, dt * xi * dV(q, t_mid, mp));
    const double s = 0.5 * mp.hbar * xi;
    return std::polar(
        1.0, dt / mp.hbar * (potential(q + s, t_mid, mp) - potential(q - s, t_mid, mp)));
}

/// Momentum-diffusion factor e^{-D xi^2 dt}, the exact solution of
/// df/dt = D d2f/dp2 in the (q,xi) representation.
inline double diffusion_multiplier(double xi, double dt, double D) {
    return std::exp(-D * xi * xi * dt);
}

/// Split-operator stepper for the Wigner master equation (quantum mode) and
/// its dual Fokker-Planck equation (classical mode).
///
/// One step is the symmetric composition
///    half kick-and-diffuse | full stream | half kick-and-diffuse,
/// globally second-order accurate.  Kick and diffusion commute exactly (both
/// diagonal in (q,xi)) and are merged into one multiplier.  The drive term is
/// linear in q, so its kick factor depends on xi only and splits off the
/// cached time-independent part; it is evaluated at the temporal midpoint of
/// each half kick (t + dt/4 and t + 3dt/4).
///
/// All factors are unit-modulus or contractive, so the scheme is
/// unconditionally stable; dt is an accuracy choice, not a stability one.
class StepPlan {
public:
    StepPlan(GridPtr grid, const ModelParams& params, double dt, EvolveMode mode)
        : grid_(std::move(grid)),
          params_(params),
          dt_(dt),
          mode_(mode),
          transformer_(grid_) {
        params_.validate();
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
        if (mode == EvolveMode::quantum && !(params_.hbar > 0.0))
            throw std::invalid_argument("quantum mode requires hbar > 0");
        build_caches();
    }

    double dt() const { return dt_; }
    EvolveMode mode() const { return mode_; }
    const ModelParams& params() const { return params_; }
    const PhaseSpaceGrid& grid() const { return *grid_; }
    const SpectralTransformer& transformer() const { return transformer_; }

    /// Advance the field by one step from its current time.  Signals if the
    /// step changes the total mass by more than 1e-6 or produces non-finite
    /// values.
    void step(Field& f) const {
        if (f.rep() != Rep::qp)
            throw std::invalid_argument("step requires the (q,p) representation");
        const double t = f.time();
        const double mass_before = f.integral().real();

        transformer_.forward_p(f.data());
        apply_kick_diffuse(f, t + 0.25 * dt_);
        transformer_.inverse_p(f.data());

        transformer_.forward_q(f.data());
        apply_stream(f);
        transformer_.inverse_q(f.data());

        transformer_.forward_p(f.data());
        apply_kick_diffuse(f, t + 0.75 * dt_);
        transformer_.inverse_p(f.data());

        f.set_time(t + dt_);

        const double mass_after = f.integral().real();
        if (!std::isfinite(mass_after))
            throw std::runtime_error("step produced non-finite values");
        if (std::abs(mass_after - mass_before) > 1e-6)
            throw std::runtime_error("step normalization drift exceeded 1e-6");
    }

    /// L2 difference between one dt step and two dt/2 steps from the same
    /// state: a computable proxy for the cubic composition error term,
    /// scaling as dt^3.
    double estimate_splitting_error(const Field& f) const {
        StepPlan half(grid_, params_, 0.5 * dt_, mode_);
        Field one = f;
        step(one);
        Field two = f;
        half.step(two);
        half.step(two);
        return l2_distance(one, two);
    }

private:
    void build_caches() {
        const auto& g = *grid_;
        stream_.resize(g.size());
        for (std::size_t i = 0; i < g.nq; ++i)
            for (std::size_t j = 0; j < g.np; ++j)
                stream_[i * g.np + j] = stream_multiplier(g.k[i], g.p[j], dt_, params_.m);

        // Time-independent half-step kick (drive removed) merged with the
        // half-step diffusion decay.
        ModelParams undriven = params_;
        undriven.Lambda = 0.0;
        const double h = 0.5 * dt_;
        kick_diffuse_half_.resize(g.size());
        for (std::size_t i = 0; i < g.nq; ++i)
            for (std::size_t l = 0; l < g.np; ++l)
                kick_diffuse_half_[i * g.np + l] =
                    kick_phase(g.q[i], g.xi[l], 0.0, h, undriven, mode_) *
                    diffusion_multiplier(g.xi[l], h, params_.D);
    }

    void apply_kick_diffuse(Field& f, double t_mid) const {
        const auto& g = *grid_;
        Complex* data = f.data();
        if (params_.Lambda != 0.0) {
            // Drive kick: linear in q in both modes, so a pure xi phase.
            const double amp = 0.5 * dt_ * params_.Lambda * std::cos(params_.omega * t_mid);
            drive_scratch_.resize(g.np);
            for (std::size_t l = 0; l < g.np; ++l)
                drive_scratch_[l] = std::polar(1.0, amp * g.xi[l]);
            for (std::size_t i = 0; i < g.nq; ++i) {
                const Complex* cache = kick_diffuse_half_.data() + i * g.np;
                Complex* row = data + i * g.np;
                for (std::size_t l = 0; l < g.np; ++l)
                    row[l] *= cache[l] * drive_scratch_[l];
            }
        } else {
            for (std::size_t n = 0; n < g.size(); ++n) data[n] *= kick_diffuse_half_[n];
        }
    }

    void apply_stream(Field& f) const {
        Complex* data = f.data();
        for (std::size_t n = 0; n < grid_->size(); ++n) data[n] *= stream_[n];
    }

    GridPtr grid_;
    ModelParams params_;
    double dt_;
    EvolveMode mode_;
    SpectralTransformer transformer_;
    std::vector<Complex> stream_;            ///< e^{-i k p dt/m}
    std::vector<Complex> kick_diffuse_half_; ///< undriven half kick x half diffusion
    mutable std::vector<Complex> drive_scratch_;
};

/// Called at every scheduled checkpoint with the current field.
using CheckpointFn = std::function<void(const Field&)>;

struct EvolveResult {
    std::vector<DiagnosticsRecord> series;
    std::size_t steps_taken = 0;
};

/// March the field from its current time to t_end, recording diagnostics and
/// invoking the checkpoint callback at every scheduled time (snapped to the
/// nearest step boundary).  Deterministic for identical inputs.  Scheduled
/// times outside (t0, t_end] are ignored; records already made are returned
/// even if a later step fails.
inline EvolveResult evolve(Field& f, double t_end, const StepPlan& plan,
                           std::span<const double> schedule,
                           const CheckpointFn& on_checkpoint = {},
                           double boundary_margin = 0.1) {
    if (f.rep() != Rep::qp)
        throw std::invalid_argument("evolve requires the (q,p) representation");
    const double t0 = f.time();
    if (!(t_end >= t0)) throw std::invalid_argument("t_end must not precede the field time");

    const auto n_steps =
        static_cast<std::size_t>(std::llround((t_end - t0) / plan.dt()));
    std::vector<std::size_t> marks;
    marks.reserve(schedule.size());
    for (double tc : schedule) {
        const auto idx = static_cast<std::size_t>(std::llround((tc - t0) / plan.dt()));
        if (idx <= n_steps) marks.push_back(idx);
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    EvolveResult out;
    auto mark = marks.begin();
    auto emit = [&](std::size_t step_idx) {
        if (mark != marks.end() && *mark == step_idx) {
            out.series.push_back(make_record(f, plan.params(), boundary_margin));
            if (on_checkpoint) on_checkpoint(f);
            ++mark;
        }
    };

    emit(0);
    for (std::size_t s = 1; s <= n_steps; ++s) {
        plan.step(f);
        f.set_time(t0 + static_cast<double>(s) * plan.dt());  // avoid accumulation drift
        out.steps_taken = s;
        emit(s);
    }
    return out;
}

/// Evenly spaced checkpoint times covering [t0, t_end] with period `every`,
/// always including both endpoints.
inline std::vector<double> periodic_schedule(double t0, double t_end, double every) {
    if (!(every > 0.0)) throw std::invalid_argument("checkpoint period must be positive");
    std::vector<double> times;
    for (double t = t0; t < t_end + 0.5 * every; t += every) times.push_back(std::min(t, t_end));
    if (times.empty() || times.back() < t_end) times.push_back(t_end);
    return times;
}

} // namespace phaseflow
