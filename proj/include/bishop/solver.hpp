#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "bidegree_series.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "spectral.hpp"

namespace bishop {

/// Which coefficient C is used in the linearization Omega = 1 + Re{C F} + Omega_1.
enum class Linearization {
    RealPart,  // C = (2/r^2) Re{(q+P)_z z}: real, so D = 1 and C* = 1/C
    Complex,   // C = (2/r^2) (q+P)_z z, factored as D / C* with D holomorphic
};

/// Flattened monomial list of a numeric series, for fast repeated pointwise evaluation.
class MonomialTable {
public:
    MonomialTable() = default;
    explicit MonomialTable(const NumericSeries& s) : degree_(s.max_degree()) {
        s.for_each_nonzero([&](int j, int k, const cd& c) { terms_.push_back({j, k, c}); });
    }

    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

    [[nodiscard]] cd operator()(cd z) const {
        if (terms_.empty()) return 0.0;
        powers(z);
        cd s = 0.0;
        for (const auto& t : terms_) s += t.c * zp_[t.j] * wp_[t.k];
        return s;
    }

    /// sum c_{jk} z^j zbar^k [(1+F)^j (1+Fbar)^k - 1 - jF - kFbar], formed without cancellation.
    [[nodiscard]] cd taylor_remainder(cd z, cd F) const {
        if (terms_.empty()) return 0.0;
        powers(z);
        const std::size_t D = static_cast<std::size_t>(degree_) + 1;
        u_.assign(D, 0.0);
        const cd F2 = F * F;
        for (std::size_t j = 1; j + 1 < D; ++j) u_[j + 1] = u_[j] * (1.0 + F) + static_cast<double>(j) * F2;
        const cd Fb = std::conj(F);
        const cd FFb = F * Fb;
        cd s = 0.0;
        for (const auto& t : terms_) {
            const cd uj = u_[t.j];
            const cd vk = std::conj(u_[t.k]);
            const double dj = t.j, dk = t.k;
            const cd bracket = uj + vk + dj * dk * FFb + dj * F * vk + dk * Fb * uj + uj * vk;
            s += t.c * zp_[t.j] * wp_[t.k] * bracket;
        }
        return s;
    }

private:
    struct Term {
        int j, k;
        cd c;
    };

    void powers(cd z) const {
        const std::size_t D = static_cast<std::size_t>(degree_) + 1;
        zp_.resize(D);
        wp_.resize(D);
        zp_[0] = wp_[0] = 1.0;
        const cd zb = std::conj(z);
        for (std::size_t i = 1; i < D; ++i) {
            zp_[i] = zp_[i - 1] * z;
            wp_[i] = wp_[i - 1] * zb;
        }
    }

    int degree_ = 0;
    std::vector<Term> terms_;
    mutable std::vector<cd> zp_, wp_, u_;
};

/// Pointwise coefficient data of the linearized Bishop equation on the map grid.
struct SliceOperators {
    Linearization mode = Linearization::RealPart;
    std::vector<cd> c_true;  // (2/r^2)(q+P)_z z
    std::vector<cd> C;       // coefficient used in the linearization
    std::vector<double> A, argC, Cstar;
    std::vector<cd> D;
    double d_deviation = 0.0;        // max |D - 1|
    double d_antiholomorphic = 0.0;  // negative-frequency share of D - mean
    double min_abs_c = 0.0;
};

inline SliceOperators build_slice_operators(const SliceGeometry& g,
                                            Linearization mode = Linearization::RealPart) {
    const std::size_t N = g.size();
    const double r2 = g.r() * g.r();
    const MonomialTable dz(g.model.qP.derivative_z());
    SliceOperators op;
    op.mode = mode;
    op.c_true.resize(N);
    op.C.resize(N);
    op.A.resize(N);
    op.argC.resize(N);
    op.Cstar.resize(N);
    op.D.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        op.c_true[k] = (2.0 / r2) * dz(g.nodes[k]) * g.nodes[k];
        op.C[k] = mode == Linearization::RealPart ? cd(op.c_true[k].real(), 0.0) : op.c_true[k];
    }
    op.min_abs_c = INFINITY;
    double max_abs_c = 0.0;
    for (const auto& c : op.C) {
        op.min_abs_c = std::min(op.min_abs_c, std::abs(c));
        max_abs_c = std::max(max_abs_c, std::abs(c));
    }
    if (!(op.min_abs_c > 0.1 * max_abs_c))
        fail(ErrorCode::ZeroOnCurve, "linearized coefficient nearly vanishes on the curve (min/max " +
                                         std::to_string(op.min_abs_c / max_abs_c) + ")");
    if (winding_number(op.C) != 0) fail(ErrorCode::NonzeroWinding, "linearized coefficient winds around 0");

    // continuous argument along the grid
    double prev = std::arg(op.C[0]);
    for (std::size_t k = 0; k < N; ++k) {
        double a = std::arg(op.C[k]);
        a += spectral::kTwoPi * std::round((prev - a) / spectral::kTwoPi);
        op.argC[k] = a;
        op.A[k] = std::abs(op.C[k]);
        prev = a;
    }
    if (mode == Linearization::RealPart) {
        for (std::size_t k = 0; k < N; ++k) {
            op.D[k] = 1.0;
            op.Cstar[k] = 1.0 / op.C[k].real();
        }
    } else {
        // D = exp(-H[arg C] + i arg C) is holomorphic with arg D = arg C; C* = |D| / |C|
        const std::vector<double> h = spectral::conjugate(std::span<const double>(op.argC));
        for (std::size_t k = 0; k < N; ++k) {
            op.D[k] = std::exp(cd(-h[k], op.argC[k]));
            op.Cstar[k] = std::exp(-h[k]) / op.A[k];
        }
    }
    for (const auto& d : op.D) op.d_deviation = std::max(op.d_deviation, std::abs(d - 1.0));
    op.d_antiholomorphic = spectral::anti_holomorphic_energy(std::span<const cd>(op.D), true);
    return op;
}

struct SolverOptions {
    double tol = 1e-12;            // sup-norm step threshold, in units of r^2
    int max_iter = 100;
    double damping = 1.0;
    int max_halvings = 3;
    double validity_radius = 0.5;  // the series must be trusted on |z| <= this
    Linearization linearization = Linearization::RealPart;
};

struct DiscSolution {
    std::vector<double> U;
    std::vector<double> phi;  // Re F
    std::vector<cd> F;
    std::vector<cd> B;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;             // max |U - T(U)|, recomputed after the loop
    double norm_u = 0.0;               // sup of the trigonometric interpolant of U
    std::vector<double> step_log;
    double contraction_ratio = 0.0;    // geometric mean of the last step ratios
    bool contraction_flag = false;     // ratio at or above the admissible 0.5
    double attachment_residual = 0.0;  // max |B - G(z(1+F))|, absolute
    double f_antiholomorphic = 0.0;    // relative negative-frequency share of F
    double b_antiholomorphic = 0.0;    // negative-frequency part of B - mean B, relative to ||B||
    double center_height_error = 0.0;  // |Re B(0) - r^2| / r^2
    double damping = 1.0;
};

namespace detail {

struct BishopMap {
    const SliceGeometry& g;
    const SliceOperators& op;
    const SolverOptions& opt;
    MonomialTable qP, K;
    double r2;

    BishopMap(const SliceGeometry& geom, const SliceOperators& ops, const SolverOptions& o)
        : g(geom), op(ops), opt(o), qP(geom.model.qP), K(geom.model.K), r2(geom.r() * geom.r()) {}

    std::vector<cd> boundary_F(std::span<const double> U) const {
        const std::vector<double> HU = spectral::conjugate(U);
        std::vector<cd> F(U.size());
        for (std::size_t k = 0; k < U.size(); ++k) F[k] = cd(U[k], HU[k]) / op.D[k];
        for (std::size_t k = 0; k < U.size(); ++k) {
            if (std::abs(F[k]) >= 0.5)
                fail(ErrorCode::ValidityEscape, "|F| reached " + std::to_string(std::abs(F[k])));
            if (std::abs(g.nodes[k] * (1.0 + F[k])) > opt.validity_radius)
                fail(ErrorCode::ValidityEscape, "disc boundary leaves the validity polydisc");
        }
        return F;
    }

    /// T(U) = -C* (Omega_1(F) + H[k]/r^2)
    std::vector<double> apply(std::span<const double> U) const {
        const std::size_t N = U.size();
        const std::vector<cd> F = boundary_F(U);
        std::vector<double> kv(N), rem(N);
        for (std::size_t i = 0; i < N; ++i) {
            const cd z = g.nodes[i];
            kv[i] = K(z * (1.0 + F[i])).real();
            rem[i] = qP.taylor_remainder(z, F[i]).real() / r2 + ((op.c_true[i] - op.C[i]) * F[i]).real();
        }
        const std::vector<double> Hk = spectral::conjugate(std::span<const double>(kv));
        std::vector<double> out(N);
        for (std::size_t i = 0; i < N; ++i) out[i] = -op.Cstar[i] * (rem[i] + Hk[i] / r2);
        return out;
    }
};

}  // namespace detail

/// Pointwise Omega(F) = (q+P)(z(1+F)) / r^2 on the map grid.
inline std::vector<double> omega(const SliceGeometry& g, std::span<const cd> F) {
    if (F.size() != g.size()) fail(ErrorCode::GridMismatch, "F must live on the map grid");
    const MonomialTable qP(g.model.qP);
    const double r2 = g.r() * g.r();
    std::vector<double> out(F.size());
    for (std::size_t k = 0; k < F.size(); ++k) out[k] = qP(g.nodes[k] * (1.0 + F[k])).real() / r2;
    return out;
}

/// Fixed-point solve of U = -C* (Omega_1 + H[k]/r^2) for the Bishop disc of one slice.
inline DiscSolution solve_U(const SliceGeometry& g, const SliceOperators& op, const SolverOptions& opt = {}) {
    const std::size_t N = g.size();
    if (op.C.size() != N) fail(ErrorCode::GridMismatch, "operators do not match the slice grid");
    const detail::BishopMap T(g, op, opt);
    DiscSolution s;
    std::vector<double> U(N, 0.0);
    double omega_damp = opt.damping;
    int halvings = 0;
    double prev_step = INFINITY;
    for (int it = 1; it <= opt.max_iter; ++it) {
        const std::vector<double> TU = T.apply(U);
        double step = 0.0;
        for (std::size_t k = 0; k < N; ++k) step = std::max(step, std::abs(TU[k] - U[k]));
        s.step_log.push_back(step);
        s.iterations = it;
        if (step > prev_step && halvings < opt.max_halvings) {
            omega_damp *= 0.5;
            ++halvings;
        }
        prev_step = step;
        for (std::size_t k = 0; k < N; ++k) U[k] += omega_damp * (TU[k] - U[k]);
        if (step <= opt.tol * T.r2) {
            s.converged = true;
            break;
        }
    }
    s.damping = omega_damp;
    if (!s.converged)
        fail(ErrorCode::NoConvergence, "Bishop iteration did not converge in " + std::to_string(opt.max_iter) +
                                           " steps (last step " + std::to_string(s.step_log.back()) + ")");

    // contraction estimate from the tail of the step history
    {
        const auto& L = s.step_log;
        double acc = 0.0;
        int n = 0;
        for (std::size_t i = std::max<std::size_t>(1, L.size() > 6 ? L.size() - 6 : 1); i < L.size(); ++i)
            if (L[i - 1] > 0.0 && L[i] > 0.0) {
                acc += std::log(L[i] / L[i - 1]);
                ++n;
            }
        s.contraction_ratio = n > 0 ? std::exp(acc / n) : 0.0;
        s.contraction_flag = s.contraction_ratio >= 0.5;
    }

    s.U = U;
    const std::vector<double> TU = T.apply(U);
    for (std::size_t k = 0; k < N; ++k) s.residual = std::max(s.residual, std::abs(TU[k] - U[k]));
    s.F = T.boundary_F(U);
    s.phi = spectral::real_of(s.F);
    s.B.resize(N);
    const MonomialTable G(g.model.G());
    const double r2 = T.r2;
    for (std::size_t k = 0; k < N; ++k) {
        // (q+P)(z(1+F)) = r^2 + r^2 Re{c F} + remainder on the curve, kept in this form for relative accuracy
        const cd z = g.nodes[k], Z = z * (1.0 + s.F[k]);
        const double dev = r2 * (op.c_true[k] * s.F[k]).real() + T.qP.taylor_remainder(z, s.F[k]).real();
        s.B[k] = cd(r2 + dev, T.K(Z).real());
        s.attachment_residual = std::max(s.attachment_residual, std::abs(s.B[k] - G(Z)));
    }
    s.norm_u = spectral::sup_norm(std::span<const double>(s.U));
    s.f_antiholomorphic = spectral::anti_holomorphic_energy(std::span<const cd>(s.F));
    const std::vector<cd> bc = spectral::forward(std::span<const cd>(s.B));
    double b_neg = 0.0, b_tot = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const long n = spectral::signed_mode(i, N);
        b_tot += std::norm(bc[i]);
        if (n < 0 || 2 * static_cast<std::size_t>(n) == N) b_neg += std::norm(bc[i]);
    }
    s.b_antiholomorphic = std::sqrt(b_neg / b_tot);
    const cd mean = bc[0];
    s.center_height_error = std::abs(mean.real() - r2) / r2;
    return s;
}

inline DiscSolution solve_U(const SliceGeometry& g, const SolverOptions& opt = {}) {
    return solve_U(g, build_slice_operators(g, opt.linearization), opt);
}

}  // namespace bishop
