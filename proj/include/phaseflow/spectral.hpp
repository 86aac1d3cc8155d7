#pragma once

#include <fftw3.h>

#include <mutex>

#include "phaseflow/grid.hpp"

namespace phaseflow {

namespace detail {
// FFTW plan creation mutates global planner state; execution does not.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// Forward/inverse spectral transforms along each grid axis.
///
/// Conventions (fixed here, assumed by every multiplier operator):
///   forward along p:  g(q,xi_l) = sum_j f(q,p_j) e^{-i p_j xi_l} dp
///   inverse along p:  f(q,p_j)  = (1/2pi) sum_l g(q,xi_l) e^{+i p_j xi_l} dxi
/// and the mirror image along q with (k, dq).  The forward carries the
/// Riemann measure, the inverse carries 1/(2pi) per axis, so the pair is an
/// exact discrete inverse and approximates the continuum Fourier integral.
///
/// Plans are immutable after construction and safe to share across threads;
/// the execute calls never touch planner state.
class SpectralTransformer {
public:
    explicit SpectralTransformer(GridPtr grid) : grid_(std::move(grid)) {
        const auto& g = *grid_;
        const int nq = static_cast<int>(g.nq);
        const int np = static_cast<int>(g.np);

        std::vector<Complex> scratch(g.nq * g.np);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        int n_p[1] = {np};
        fwd_p_ = fftw_plan_many_dft(1, n_p, nq, buf, nullptr, 1, np, buf, nullptr, 1, np,
                                    FFTW_FORWARD, flags);
        bwd_p_ = fftw_plan_many_dft(1, n_p, nq, buf, nullptr, 1, np, buf, nullptr, 1, np,
                                    FFTW_BACKWARD, flags);
        int n_q[1] = {nq};
        fwd_q_ = fftw_plan_many_dft(1, n_q, np, buf, nullptr, np, 1, buf, nullptr, np, 1,
                                    FFTW_FORWARD, flags);
        bwd_q_ = fftw_plan_many_dft(1, n_q, np, buf, nullptr, np, 1, buf, nullptr, np, 1,
                                    FFTW_BACKWARD, flags);
        if (!fwd_p_ || !bwd_p_ || !fwd_q_ || !bwd_q_)
            throw std::runtime_error("fftw plan creation failed");

        // Boundary phases: the ladders are anchored at p_min / q_min, not 0.
        phase_p_.resize(g.np);
        for (std::size_t l = 0; l < g.np; ++l)
            phase_p_[l] = std::polar(1.0, -g.p_min * g.xi[l]);
        phase_q_.resize(g.nq);
        for (std::size_t i = 0; i < g.nq; ++i)
            phase_q_[i] = std::polar(1.0, -g.q_min * g.k[i]);
    }

    ~SpectralTransformer() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_p_);
        fftw_destroy_plan(bwd_p_);
        fftw_destroy_plan(fwd_q_);
        fftw_destroy_plan(bwd_q_);
    }

    SpectralTransformer(const SpectralTransformer&) = delete;
    SpectralTransformer& operator=(const SpectralTransformer&) = delete;

    const PhaseSpaceGrid& grid() const { return *grid_; }

    /// f(q,p) -> g(q,xi), in place.
    void forward_p(Complex* data) const {
        exec(fwd_p_, data);
        const auto& g = *grid_;
        for (std::size_t i = 0; i < g.nq; ++i) {
            Complex* row = data + i * g.np;
            for (std::size_t l = 0; l < g.np; ++l) row[l] *= g.dp * phase_p_[l];
        }
    }

    /// g(q,xi) -> f(q,p), in place.  Exact inverse of forward_p.
    void inverse_p(Complex* data) const {
        const auto& g = *grid_;
        const double scale = 1.0 / (static_cast<double>(g.np) * g.dp);
        for (std::size_t i = 0; i < g.nq; ++i) {
            Complex* row = data + i * g.np;
            for (std::size_t l = 0; l < g.np; ++l) row[l] *= scale * std::conj(phase_p_[l]);
        }
        exec(bwd_p_, data);
    }

    /// f(q,p) -> h(k,p), in place.
    void forward_q(Complex* data) const {
        exec(fwd_q_, data);
        const auto& g = *grid_;
        for (std::size_t i = 0; i < g.nq; ++i) {
            const Complex w = g.dq * phase_q_[i];
            Complex* row = data + i * g.np;
            for (std::size_t j = 0; j < g.np; ++j) row[j] *= w;
        }
    }

    /// h(k,p) -> f(q,p), in place.  Exact inverse of forward_q.
    void inverse_q(Complex* data) const {
        const auto& g = *grid_;
        const double scale = 1.0 / (static_cast<double>(g.nq) * g.dq);
        for (std::size_t i = 0; i < g.nq; ++i) {
            const Complex w = scale * std::conj(phase_q_[i]);
            Complex* row = data + i * g.np;
            for (std::size_t j = 0; j < g.np; ++j) row[j] *= w;
        }
        exec(bwd_q_, data);
    }

    // Field-level wrappers with representation bookkeeping.

    Field transform_p(const Field& f) const {
        require(f, Rep::qp);
        Field g = f;
        forward_p(g.data());
        g.set_rep(Rep::qxi);
        return g;
    }

    Field inverse_transform_p(const Field& g) const {
        require(g, Rep::qxi);
        Field f = g;
        inverse_p(f.data());
        f.set_rep(Rep::qp);
        return f;
    }

    Field transform_q(const Field& f) const {
        require(f, Rep::qp);
        Field h = f;
        forward_q(h.data());
        h.set_rep(Rep::kp);
        return h;
    }

    Field inverse_transform_q(const Field& h) const {
        require(h, Rep::kp);
        Field f = h;
        inverse_q(f.data());
        f.set_rep(Rep::qp);
        return f;
    }

private:
    static void require(const Field& f, Rep expected) {
        if (f.rep() != expected)
            throw std::invalid_argument("field is in the wrong representation");
    }

    static void exec(fftw_plan plan, Complex* data) {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(plan, p, p);
    }

    GridPtr grid_;
    fftw_plan fwd_p_ = nullptr, bwd_p_ = nullptr;
    fftw_plan fwd_q_ = nullptr, bwd_q_ = nullptr;
    std::vector<Complex> phase_p_;  ///< e^{-i p_min xi_l}
    std::vector<Complex> phase_q_;  ///< e^{-i q_min k_i}
};

} // namespace phaseflow
