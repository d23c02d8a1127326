#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/IterativeSolvers>

#include "curve.hpp"
#include "error.hpp"
#include "spectral.hpp"

namespace bishop::detail {
class TheodorsenJacobian;
}  // namespace bishop::detail

template <>
struct Eigen::internal::traits<bishop::detail::TheodorsenJacobian>
    : public Eigen::internal::traits<Eigen::SparseMatrix<double>> {};

namespace bishop::detail {

/// Matrix-free Newton Jacobian I - K diag(g) of the Theodorsen equation.
class TheodorsenJacobian : public Eigen::EigenBase<TheodorsenJacobian> {
public:
    using Scalar = double;
    using RealScalar = double;
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

    explicit TheodorsenJacobian(const std::vector<double>& g) : g_(&g) {}

    [[nodiscard]] Eigen::Index rows() const { return static_cast<Eigen::Index>(g_->size()); }
    [[nodiscard]] const std::vector<double>& weights() const { return *g_; }
    [[nodiscard]] Eigen::Index cols() const { return rows(); }

    template <typename Rhs>
    Eigen::Product<TheodorsenJacobian, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
        return Eigen::Product<TheodorsenJacobian, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
    }

    template <class V>
    void apply(const V& x, Eigen::VectorXd& y) const {
        const std::size_t n = g_->size();
        std::vector<double> gx(n);
        for (std::size_t i = 0; i < n; ++i) gx[i] = (*g_)[i] * x(static_cast<Eigen::Index>(i));
        const std::vector<double> k = spectral::conjugate(gx);
        y.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(i)) - k[i];
    }

private:
    const std::vector<double>* g_;
};

/// Approximate inverse of I - K diag(g) from the explicit solution of the continuous problem.
///
/// With w = g x and Phi = w + i K[w], the equation becomes Re[(1 + i g) Phi] = g b, a Riemann-Hilbert
/// problem of index zero. Factoring 1 + i g = |1 + i g| e^{i alpha} through the holomorphic function
/// with imaginary part alpha - mean(alpha) reduces it to one harmonic completion. On the grid the
/// products alias slightly, so GMRES still iterates, but only a few times.
class RiemannHilbertPreconditioner {
public:
    RiemannHilbertPreconditioner() = default;
    template <class M>
    explicit RiemannHilbertPreconditioner(const M& m) {
        compute(m);
    }

    template <class M>
    RiemannHilbertPreconditioner& analyzePattern(const M&) {
        return *this;
    }
    template <class M>
    RiemannHilbertPreconditioner& factorize(const M& m) {
        return compute(m);
    }

    RiemannHilbertPreconditioner& compute(const TheodorsenJacobian& J) {
        const std::vector<double>& g = J.weights();
        const std::size_t N = g.size();
        std::vector<double> a(N);
        mean_alpha_ = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            a[i] = std::atan(g[i]);
            mean_alpha_ += a[i] / static_cast<double>(N);
        }
        for (double& v : a) v -= mean_alpha_;
        const std::vector<double> ka = spectral::conjugate(a);
        scale_.resize(N);
        factor_.resize(N);
        for (std::size_t i = 0; i < N; ++i) {
            scale_[i] = g[i] * std::exp(-ka[i]) / std::hypot(1.0, g[i]);
            // e^{-E} with E = -K[a] + i a, combined with e^{-i mean(alpha)}
            factor_[i] = std::exp(spectral::cd(ka[i], -a[i] - mean_alpha_));
        }
        return *this;
    }

    template <class Rhs>
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::MatrixBase<Rhs>& b) const {
        const std::size_t N = scale_.size();
        std::vector<double> beta(N);
        double mean_beta = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            beta[i] = scale_[i] * b(static_cast<Eigen::Index>(i));
            mean_beta += beta[i] / static_cast<double>(N);
        }
        const std::vector<double> kb = spectral::conjugate(beta);
        const double c = mean_beta * std::tan(mean_alpha_);  // Im Phi(0) = 0
        Eigen::VectorXd x(static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i < N; ++i) {
            const spectral::cd phi = factor_[i] * spectral::cd(beta[i], kb[i] + c);
            x(static_cast<Eigen::Index>(i)) = b(static_cast<Eigen::Index>(i)) + phi.imag();
        }
        return x;
    }

    [[nodiscard]] Eigen::ComputationInfo info() const { return Eigen::Success; }

private:
    double mean_alpha_ = 0.0;
    std::vector<double> scale_;
    std::vector<spectral::cd> factor_;
};

}  // namespace bishop::detail

namespace Eigen::internal {

template <typename Rhs>
struct generic_product_impl<bishop::detail::TheodorsenJacobian, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<bishop::detail::TheodorsenJacobian, Rhs,
                                generic_product_impl<bishop::detail::TheodorsenJacobian, Rhs>> {
    using Scalar = typename Product<bishop::detail::TheodorsenJacobian, Rhs>::Scalar;

    template <typename Dest>
    static void scaleAndAddTo(Dest& dst, const bishop::detail::TheodorsenJacobian& lhs, const Rhs& rhs,
                              const Scalar& alpha) {
        Eigen::VectorXd y;
        lhs.apply(rhs, y);
        dst.noalias() += alpha * y;
    }
};

}  // namespace Eigen::internal

namespace bishop {

struct MapOptions {
    double tol = 1e-13;  // sup-norm residual of the Theodorsen equation
    int max_iter = 200;              // total Newton steps over all resolution levels
    std::size_t max_grid = 1u << 16;  // largest internal grid tried before giving up
    double alias_energy = 1e-20;     // top-quarter share of the boundary data energy that counts as resolved
    double alias_energy_floor = 1e-6;  // still accepted on the largest grid, with `resolved` cleared
    double gmres_tol = 1e-10;
};

/// Riemann map sigma of the unit disc onto D/r with sigma(0) = 0 and sigma'(0) > 0.
///
/// The map is stored through its boundary correspondence theta(t_k) on an internal grid that may be finer
/// than the curve sampling, and through h = log(sigma(zeta)/zeta) as a Taylor series.
struct ConformalMap {
    std::size_t n = 0;
    double r = 1.0;
    std::vector<double> correspondence;  // theta(t_k)
    std::vector<double> psi;             // theta(t_k) - t_k
    std::vector<cd> boundary;            // sigma(e^{i t_k})
    spectral::Taylor log_ratio;          // h
    std::vector<cd> sigma_taylor;        // leading Taylor coefficients of sigma
    double derivative_at_zero = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double tail_energy = 0.0;
    bool resolved = true;  // tail energy below MapOptions::alias_energy
    double min_spacing = 0.0;
    std::vector<std::size_t> levels;  // grid sizes attempted

    [[nodiscard]] std::size_t size() const noexcept { return n; }

    [[nodiscard]] cd operator()(cd zeta) const { return zeta * std::exp(log_ratio(zeta)); }

    [[nodiscard]] cd derivative(cd zeta) const {
        const cd h = log_ratio(zeta);
        return std::exp(h) * (1.0 + zeta * log_ratio.derivative(zeta));
    }

    /// sigma on the circle |zeta| = rho at M equispaced angles.
    [[nodiscard]] std::vector<cd> ring(double rho, std::size_t M) const {
        std::vector<cd> h = log_ratio.ring(rho, M);
        for (std::size_t k = 0; k < M; ++k) h[k] = std::polar(rho, spectral::node(k, M)) * std::exp(h[k]);
        return h;
    }

    /// Angular derivative of sigma on the same ring, sigma (i + dh/dt).
    [[nodiscard]] std::vector<cd> ring_dt(double rho, std::size_t M) const {
        std::vector<cd> s = ring(rho, M);
        const std::vector<cd> ht = log_ratio.ring_dt(rho, M);
        for (std::size_t k = 0; k < M; ++k) s[k] *= cd(0.0, 1.0) + ht[k];
        return s;
    }

    /// Circle parameter t with theta(t) = theta.
    ///
    /// The nodal correspondence is increasing, so a binary search brackets the root between two
    /// neighbouring nodes before the safeguarded Newton iteration on the interpolant.
    [[nodiscard]] double inverse_correspondence(double theta) const {
        const double two_pi = spectral::kTwoPi;
        const double th0 = correspondence.front();
        double th = theta - two_pi * std::floor((theta - th0) / two_pi);
        const auto it_hi = std::upper_bound(correspondence.begin(), correspondence.end(), th);
        const std::size_t k = static_cast<std::size_t>(it_hi - correspondence.begin()) - 1;
        double lo = spectral::node(k, n), hi = spectral::node(k + 1, n);
        const double th_lo = correspondence[k];
        const double th_hi = k + 1 < n ? correspondence[k + 1] : th0 + two_pi;
        double t = lo + (hi - lo) * (th - th_lo) / (th_hi - th_lo);
        for (int it = 0; it < 60; ++it) {
            const auto [v, d] = psi_interp_.at(t);
            const double f = t + v - th;
            if (f > 0.0)
                hi = t;
            else
                lo = t;
            double next = t - f / (1.0 + d);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - t) < 1e-15 || hi - lo < 1e-15) {
                t = next;
                break;
            }
            t = next;
        }
        t = std::fmod(t, two_pi);
        return t < 0.0 ? t + two_pi : t;
    }

    /// Preimage of a point of D/r by Newton on sigma.
    [[nodiscard]] cd inverse(cd w, double tol = 1e-14) const {
        cd zeta = w / derivative_at_zero;
        if (std::abs(zeta) > 0.99) zeta *= 0.99 / std::abs(zeta);
        for (int it = 0; it < 100; ++it) {
            const cd f = (*this)(zeta) - w;
            if (std::abs(f) < tol * (1.0 + std::abs(w))) return zeta;
            cd step = f / derivative(zeta);
            for (int h = 0; h < 60 && std::abs(zeta - step) >= 1.0; ++h) step *= 0.5;
            if (std::abs(zeta - step) >= 1.0) break;
            zeta -= step;
        }
        fail(ErrorCode::NoConvergence, "inverse conformal map did not converge");
    }

    void set_psi_interpolant() {
        psi_interp_ = spectral::PeriodicInterpolator(psi);
        (void)psi_interp_.at(0.0);  // builds the table on fine grids before the map is shared
    }

    [[nodiscard]] double psi_at(double t) const { return psi_interp_.at(t).first; }

private:
    spectral::PeriodicInterpolator psi_interp_;
};

namespace detail {

/// log(rho/r) on the polar grid.
class LogRadius {
public:
    explicit LogRadius(const BoundaryCurve& c) : interp_(log_samples(c)) {}

    void eval(std::span<const double> x, std::vector<double>& v, std::vector<double>& d) const {
        interp_.eval(x, v, d);
    }

private:
    static std::vector<double> log_samples(const BoundaryCurve& c) {
        std::vector<double> L(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) L[i] = std::log(c.radius[i] / c.r);
        return L;
    }

    spectral::PeriodicInterpolator interp_;
};

struct TheodorsenLevel {
    bool converged = false;
    int steps = 0;
    double residual = 0.0;
};

inline TheodorsenLevel theodorsen_newton(const LogRadius& L, std::vector<double>& psi, int max_steps,
                                         const MapOptions& opt) {
    const std::size_t N = psi.size();
    const std::vector<double> t = spectral::grid(N);
    std::vector<double> x(N), Lv, Ld;
    auto residual = [&](const std::vector<double>& p, std::vector<double>& res) {
        for (std::size_t i = 0; i < N; ++i) x[i] = t[i] + p[i];
        L.eval(x, Lv, Ld);
        const std::vector<double> k = spectral::conjugate(Lv);
        res.resize(N);
        for (std::size_t i = 0; i < N; ++i) res[i] = p[i] - k[i];
        return spectral::max_abs(std::span<const double>(res));
    };
    TheodorsenLevel out;
    std::vector<double> res;
    double rn = residual(psi, res);
    std::vector<double> g = Ld;
    for (int s = 0; s < max_steps; ++s) {
        out.steps = s + 1;
        detail::TheodorsenJacobian J(g);
        Eigen::GMRES<detail::TheodorsenJacobian, detail::RiemannHilbertPreconditioner> gmres;
        // inexact Newton: the linear solve only needs to beat the current residual
        gmres.setTolerance(std::max(opt.gmres_tol, std::min(1e-4, 0.1 * rn)));
        gmres.setMaxIterations(1000);
        gmres.set_restart(200);
        gmres.compute(J);
        Eigen::VectorXd b(static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i < N; ++i) b(static_cast<Eigen::Index>(i)) = -res[i];
        const Eigen::VectorXd dpsi = gmres.solve(b);
        double step_norm = dpsi.cwiseAbs().maxCoeff();
        // damped update
        double lam = 1.0;
        std::vector<double> trial(N), tres;
        double tn = 0.0;
        for (int h = 0; h < 12; ++h) {
            for (std::size_t i = 0; i < N; ++i) trial[i] = psi[i] + lam * dpsi(static_cast<Eigen::Index>(i));
            tn = residual(trial, tres);
            if (tn < rn || lam * step_norm < opt.tol) break;
            lam *= 0.5;
        }
        psi = trial;
        res = tres;
        rn = tn;
        g = Ld;
        if (lam * step_norm < opt.tol || rn < opt.tol) {
            out.converged = rn < 10.0 * opt.tol;
            break;
        }
    }
    out.residual = rn;
    return out;
}

}  // namespace detail

inline ConformalMap riemann_map(const BoundaryCurve& curve, const MapOptions& opt = {}) {
    if (curve.size() < 8) fail(ErrorCode::InvalidArgument, "curve has too few samples");
    for (double rho : curve.radius)
        if (!(rho > 0.0)) fail(ErrorCode::ZeroOnCurve, "curve passes through the origin");
    if (winding_number(curve.points) != 1) fail(ErrorCode::NonzeroWinding, "curve does not wind once around 0");

    const detail::LogRadius L(curve);
    ConformalMap m;
    m.r = curve.r;
    std::size_t N = curve.size();
    std::vector<double> psi(N, 0.0);
    int used = 0;
    std::string why;
    while (true) {
        m.levels.push_back(N);
        const auto lvl = detail::theodorsen_newton(L, psi, opt.max_iter - used, opt);
        used += lvl.steps;
        double min_gap = INFINITY;
        for (std::size_t k = 0; k < N; ++k) {
            const double a = spectral::node(k, N) + psi[k];
            const double b = spectral::node(k + 1, N) + psi[(k + 1) % N];
            min_gap = std::min(min_gap, b - a);
        }
        std::vector<cd> bdata(N);
        {
            std::vector<double> x(N), Lv, Ld;
            for (std::size_t k = 0; k < N; ++k) x[k] = spectral::node(k, N) + psi[k];
            L.eval(x, Lv, Ld);
            for (std::size_t k = 0; k < N; ++k) bdata[k] = cd(Lv[k], psi[k]);
        }
        const double tail = spectral::top_quarter_energy(std::span<const cd>(bdata));
        const bool last = 2 * N > opt.max_grid || used >= opt.max_iter;
        const bool ok_tail = tail < opt.alias_energy || (last && tail < opt.alias_energy_floor);
        if (lvl.converged && min_gap > 0.0 && ok_tail) {
            m.n = N;
            m.psi = psi;
            m.correspondence.resize(N);
            m.boundary.resize(N);
            for (std::size_t k = 0; k < N; ++k) {
                m.correspondence[k] = spectral::node(k, N) + psi[k];
                m.boundary[k] = std::exp(bdata[k]) * std::polar(1.0, spectral::node(k, N));
            }
            m.log_ratio = spectral::Taylor::from_boundary(bdata);
            m.derivative_at_zero = std::exp(m.log_ratio.coefficients()[0].real());
            const spectral::Taylor st = spectral::Taylor::from_boundary(m.boundary);
            m.sigma_taylor.assign(N / 4, cd{});
            for (std::size_t i = 0; i < std::min(N / 4, st.coefficients().size()); ++i)
                m.sigma_taylor[i] = st.coefficients()[i];
            m.iterations = used;
            m.residual = lvl.residual;
            m.tail_energy = tail;
            m.resolved = tail < opt.alias_energy;
            m.min_spacing = min_gap;
            m.set_psi_interpolant();
            return m;
        }
        why = !lvl.converged ? "Newton residual " + std::to_string(lvl.residual)
              : min_gap <= 0.0 ? "non-monotone boundary correspondence"
                               : "unresolved spectrum (tail energy " + std::to_string(tail) + ")";
        if (last)
            fail(ErrorCode::NoConvergence, "conformal map not resolved up to grid " + std::to_string(N) + ": " + why);
        // continue on a finer grid, warm-started unless the level diverged
        // a folded correspondence signals strong crowding, so the grid grows faster
        const std::size_t next = (min_gap <= 0.0 && 4 * N <= opt.max_grid) ? 4 * N : 2 * N;
        if (lvl.converged)
            psi = spectral::resample(std::span<const double>(psi), next);
        else
            psi.assign(next, 0.0);
        N = next;
    }
}

}  // namespace bishop
