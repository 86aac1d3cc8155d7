#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phaseflow {

using Complex = std::complex<double>;

/// Uniform periodic discretization of the (q,p) rectangle together with the
/// spectral frequency ladders conjugate to each axis.
///
/// Sampling is periodic-wrap: q_i = q_min + i*dq for i in [0,nq), the point
/// q_max itself is excluded.  The ladders follow standard DFT ordering, so
/// slot j holds frequency j*(2pi/L) for j < n/2 and (j-n)*(2pi/L) above.
struct PhaseSpaceGrid {
    std::size_t nq = 0;
    std::size_t np = 0;
    double q_min = 0.0, q_max = 0.0;
    double p_min = 0.0, p_max = 0.0;
    double dq = 0.0, dp = 0.0;
    std::vector<double> q;   ///< sample positions, size nq
    std::vector<double> p;   ///< sample momenta, size np
    std::vector<double> k;   ///< frequencies conjugate to q (1/length), DFT order
    std::vector<double> xi;  ///< frequencies conjugate to p (1/momentum), DFT order

    std::size_t size() const { return nq * np; }
    double cell_area() const { return dq * dp; }
};

using GridPtr = std::shared_ptr<const PhaseSpaceGrid>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::vector<double> dft_ladder(std::size_t n, double length) {
    std::vector<double> freq(n);
    const double base = 2.0 * std::numbers::pi / length;
    for (std::size_t j = 0; j < n; ++j) {
        const auto sj = static_cast<std::ptrdiff_t>(j);
        const auto sn = static_cast<std::ptrdiff_t>(n);
        freq[j] = base * static_cast<double>(j < n / 2 ? sj : sj - sn);
    }
    return freq;
}

} // namespace detail

inline GridPtr make_grid(std::size_t nq, std::size_t np,
                         std::pair<double, double> q_bounds,
                         std::pair<double, double> p_bounds) {
    if (!detail::is_pow2(nq) || nq < 16 || !detail::is_pow2(np) || np < 16)
        throw std::invalid_argument("grid sizes must be powers of two >= 16, got " +
                                    std::to_string(nq) + " x " + std::to_string(np));
    auto [q_min, q_max] = q_bounds;
    auto [p_min, p_max] = p_bounds;
    if (!(std::isfinite(q_min) && std::isfinite(q_max) && std::isfinite(p_min) &&
          std::isfinite(p_max)))
        throw std::invalid_argument("grid bounds must be finite");
    if (!(q_max > q_min) || !(p_max > p_min))
        throw std::invalid_argument("grid bounds must satisfy max > min");

    auto g = std::make_shared<PhaseSpaceGrid>();
    g->nq = nq;
    g->np = np;
    g->q_min = q_min;
    g->q_max = q_max;
    g->p_min = p_min;
    g->p_max = p_max;
    g->dq = (q_max - q_min) / static_cast<double>(nq);
    g->dp = (p_max - p_min) / static_cast<double>(np);
    g->q.resize(nq);
    for (std::size_t i = 0; i < nq; ++i) g->q[i] = q_min + static_cast<double>(i) * g->dq;
    g->p.resize(np);
    for (std::size_t j = 0; j < np; ++j) g->p[j] = p_min + static_cast<double>(j) * g->dp;
    g->k = detail::dft_ladder(nq, q_max - q_min);
    g->xi = detail::dft_ladder(np, p_max - p_min);
    return g;
}

/// Which representation a Field currently holds.  Transforms move between
/// them; pointwise multiplier operators are each diagonal in exactly one.
enum class Rep {
    qp,   ///< f(q,p), the physical representation
    qxi,  ///< g(q,xi): Fourier along p (kick and diffusion are diagonal here)
    kp,   ///< h(k,p): Fourier along q (streaming is diagonal here)
};

/// A complex-valued 2-D distribution sampled on a PhaseSpaceGrid.
///
/// Storage is row-major over (q,p): value(i,j) lives at index i*np+j and
/// corresponds to the phase-space point (q_min+i*dq, p_min+j*dp).  Values
/// carry dimension 1/action so that integral() is dimensionless.
class Field {
public:
    explicit Field(GridPtr grid, double time = 0.0)
        : grid_(std::move(grid)), values_(grid_->size(), Complex{0.0, 0.0}), time_(time) {}

    const PhaseSpaceGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    Rep rep() const { return rep_; }
    void set_rep(Rep r) { rep_ = r; }

    Complex& operator()(std::size_t i, std::size_t j) { return values_[i * grid_->np + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const {
        return values_[i * grid_->np + j];
    }

    std::span<Complex> values() { return values_; }
    std::span<const Complex> values() const { return values_; }
    Complex* data() { return values_.data(); }
    const Complex* data() const { return values_.data(); }
    std::size_t size() const { return values_.size(); }

    /// Discrete integral over phase space of the raw samples.
    Complex integral() const {
        Complex s{0.0, 0.0};
        for (const Complex& v : values_) s += v;
        return s * grid_->cell_area();
    }

    double l2_norm() const {
        double s = 0.0;
        for (const Complex& v : values_) s += std::norm(v);
        return std::sqrt(s * grid_->cell_area());
    }

    /// Rescale so the discrete integral is exactly one.
    void normalize() {
        const double total = integral().real();
        if (!(std::abs(total) > 0.0))
            throw std::runtime_error("cannot normalize field with zero integral");
        const double inv = 1.0 / total;
        for (Complex& v : values_) v *= inv;
    }

    Field& operator+=(const Field& other) {
        check_same_grid(other);
        for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += other.values_[n];
        return *this;
    }

    Field& operator-=(const Field& other) {
        check_same_grid(other);
        for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= other.values_[n];
        return *this;
    }

    Field& operator*=(Complex a) {
        for (Complex& v : values_) v *= a;
        return *this;
    }

    void check_same_grid(const Field& other) const {
        if (grid_.get() != other.grid_.get())
            throw std::invalid_argument("fields must share one grid");
    }

private:
    GridPtr grid_;
    std::vector<Complex> values_;
    double time_ = 0.0;
    Rep rep_ = Rep::qp;
};

inline double l2_distance(const Field& a, const Field& b) {
    a.check_same_grid(b);
    double s = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t n = 0; n < va.size(); ++n) s += std::norm(va[n] - vb[n]);
    return std::sqrt(s * a.grid().cell_area());
}

} // namespace phaseflow
