#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "curve.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "solver.hpp"
#include "spectral.hpp"

namespace bishop {

struct ExtensionOptions {
    // targets closer to the curve than factor * 2 pi diam / N_theta use the conformal pullback
    double crossover_factor = 3.0;
};

/// Holomorphic extension of one boundary function of a slice into the enclosed domain.
///
/// Far from the curve the Cauchy integral is applied with the trapezoidal rule in the polar angle;
/// close to it the data are pulled back to the unit circle and summed as a Taylor series.
/// The data are assumed holomorphic-consistent, so their Taylor series also supplies the polar samples.
class BoundaryExtension {
public:
    BoundaryExtension(const SliceGeometry& g, std::span<const cd> on_map_grid, const ExtensionOptions& opt = {})
        : g_(&g), taylor_(spectral::Taylor::from_boundary(on_map_grid)) {
        if (on_map_grid.size() != g.size())
            fail(ErrorCode::GridMismatch, "boundary data must live on the map grid");
        const BoundaryCurve& c = g.curve;
        const std::size_t M = c.size();
        polar_.resize(M);
        for (std::size_t i = 0; i < M; ++i)
            polar_[i] = taylor_(std::polar(1.0, g.polar_parameter[i]));

        double diam = 0.0;
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = i + 1; j < M; ++j) diam = std::max(diam, std::abs(c.points[i] - c.points[j]));
        crossover_ = opt.crossover_factor * spectral::kTwoPi * diam / static_cast<double>(M);
    }

    [[nodiscard]] double crossover() const noexcept { return crossover_; }

    /// Boundary samples at the polar nodes of the curve.
    [[nodiscard]] const std::vector<cd>& polar_samples() const noexcept { return polar_; }

    [[nodiscard]] double distance_to_curve(cd zeta) const {
        double d = INFINITY;
        for (const auto& p : g_->curve.points) d = std::min(d, std::abs(p - zeta));
        return d;
    }

    [[nodiscard]] bool inside(cd zeta) const { return winding_number(g_->curve.points, zeta) == 1; }

    /// Trapezoidal Cauchy integral (1/2 pi i) sum f z_theta / (z - zeta) dtheta.
    [[nodiscard]] cd quadrature(cd zeta) const {
        const BoundaryCurve& c = g_->curve;
        cd s = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) s += polar_[i] * c.tangents[i] / (c.points[i] - zeta);
        return s / cd(0.0, static_cast<double>(c.size()));
    }

    /// Taylor value at the conformal preimage of zeta.
    [[nodiscard]] cd pullback(cd zeta) const {
        cd pre;
        try {
            pre = g_->map.inverse(zeta / g_->r());
        } catch (const Error&) {
            fail(ErrorCode::TargetTooCloseToBoundary, "conformal preimage of the target not found");
        }
        if (!(std::abs(pre) < 1.0)) fail(ErrorCode::TargetTooCloseToBoundary, "target maps outside the unit disc");
        return taylor_(pre);
    }

    /// Value of the extension at a point of the open slice domain.
    [[nodiscard]] cd operator()(cd zeta) const {
        if (!inside(zeta)) fail(ErrorCode::TargetTooCloseToBoundary, "target not enclosed by the curve");
        return distance_to_curve(zeta) > crossover_ ? quadrature(zeta) : pullback(zeta);
    }

    /// Value at the unit-disc point w, straight from the Taylor series.
    [[nodiscard]] cd at_disc_point(cd w) const { return taylor_(w); }

    [[nodiscard]] const spectral::Taylor& taylor() const noexcept { return taylor_; }

private:
    const SliceGeometry* g_;
    spectral::Taylor taylor_;
    std::vector<cd> polar_;
    double crossover_ = 0.0;
};

inline std::vector<cd> cauchy_extend(const SliceGeometry& g, std::span<const cd> boundary, std::span<const cd> targets,
                                     const ExtensionOptions& opt = {}) {
    const BoundaryExtension E(g, boundary, opt);
    std::vector<cd> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) out[i] = E(targets[i]);
    return out;
}

struct DiscOptions {
    std::size_t n_radii = 16;
    std::size_t n_angles = 0;  // 0: use the curve sampling
    ExtensionOptions extension;
    std::size_t overlap_points = 32;
    double cr_step = 1e-3;
};

/// An attached analytic disc sampled on a radial-angular grid of the unit disc.
struct AttachedDisc {
    SliceParams slice;
    std::vector<double> radii;  // rho_j of the rings; the last one is 1
    std::size_t n_angles = 0;
    cd center_z, center_w;
    std::vector<cd> z_values;  // ring-major: [j * n_angles + k]
    std::vector<cd> w_values;
    double boundary_residual = 0.0;  // max |w - G(z)| / r^2 on the boundary ring
    double cr_residual = 0.0;        // Cauchy-Riemann defect relative to sup |f|
    double center_height_error = 0.0;
    double overlap_agreement = 0.0;  // quadrature vs pullback on the overlap set, relative to sup |f|
    std::size_t overlap_count = 0;
    double holomorphic_defect = 0.0;  // anti-holomorphic share of the boundary data

    [[nodiscard]] cd zeta(std::size_t j, std::size_t k) const {
        return std::polar(radii[j], spectral::node(k, n_angles));
    }
    [[nodiscard]] std::size_t ring_count() const noexcept { return radii.size(); }

    /// (Re z, Im z, X..., Re w, Im w) of grid point (j, k).
    [[nodiscard]] std::vector<double> ambient(std::size_t j, std::size_t k) const {
        const cd z = z_values[j * n_angles + k], w = w_values[j * n_angles + k];
        std::vector<double> p{z.real(), z.imag()};
        p.insert(p.end(), slice.X.begin(), slice.X.end());
        p.push_back(w.real());
        p.push_back(w.imag());
        return p;
    }
};

namespace detail {

inline std::vector<double> ring_radii(std::size_t n) {
    std::vector<double> rho(n);
    for (std::size_t j = 0; j < n; ++j)
        rho[j] = std::sin(std::numbers::pi * static_cast<double>(j + 1) / static_cast<double>(2 * n));
    rho.back() = 1.0;
    return rho;
}

/// Disc values on a ring |zeta| = rho: z = r sigma (1 + F), w = B.
struct RingEvaluator {
    const SliceGeometry& g;
    const spectral::Taylor& F;
    const spectral::Taylor& B;

    void operator()(double rho, std::size_t M, std::vector<cd>& z, std::vector<cd>& w) const {
        z = g.map.ring(rho, M);
        const std::vector<cd> fv = F.ring(rho, M);
        for (std::size_t k = 0; k < M; ++k) z[k] *= g.r() * (1.0 + fv[k]);
        w = B.ring(rho, M);
    }

    /// Angular derivatives of the same values.
    void dt(double rho, std::size_t M, std::vector<cd>& z, std::vector<cd>& w) const {
        z = g.map.ring_dt(rho, M);
        const std::vector<cd> s = g.map.ring(rho, M), f = F.ring(rho, M), ft = F.ring_dt(rho, M);
        for (std::size_t k = 0; k < M; ++k) z[k] = g.r() * (z[k] * (1.0 + f[k]) + s[k] * ft[k]);
        w = B.ring_dt(rho, M);
    }
};

}  // namespace detail

inline AttachedDisc build_disc(const SliceGeometry& g, const DiscSolution& sol, const DiscOptions& opt = {}) {
    if (!sol.converged) fail(ErrorCode::InvalidArgument, "disc requested from an unconverged solution");
    if (sol.F.size() != g.size() || sol.B.size() != g.size())
        fail(ErrorCode::GridMismatch, "solution does not match the slice grid");
    const std::size_t L = g.size();
    AttachedDisc d;
    d.slice = g.slice;
    d.n_angles = opt.n_angles == 0 ? g.curve.size() : opt.n_angles;
    d.radii = detail::ring_radii(opt.n_radii);
    const double r2 = g.r() * g.r();

    const spectral::Taylor Ft = spectral::Taylor::from_boundary(sol.F);
    const spectral::Taylor Bt = spectral::Taylor::from_boundary(sol.B);
    const detail::RingEvaluator ring{g, Ft, Bt};

    d.center_z = g.r() * g.map(0.0) * (1.0 + Ft(0.0));
    d.center_w = Bt(0.0);
    d.center_height_error = std::abs(d.center_w.real() - r2) / r2;

    const std::size_t M = d.n_angles;
    d.z_values.resize(d.radii.size() * M);
    d.w_values.resize(d.radii.size() * M);
    std::vector<cd> zr, wr;
    for (std::size_t j = 0; j < d.radii.size(); ++j) {
        ring(d.radii[j], M, zr, wr);
        std::copy(zr.begin(), zr.end(), d.z_values.begin() + static_cast<std::ptrdiff_t>(j * M));
        std::copy(wr.begin(), wr.end(), d.w_values.begin() + static_cast<std::ptrdiff_t>(j * M));
    }

    // boundary ring against the defining equation of M
    const MonomialTable G(g.model.G());
    const std::size_t last = d.radii.size() - 1;
    for (std::size_t k = 0; k < M; ++k) {
        const cd z = d.z_values[last * M + k], w = d.w_values[last * M + k];
        d.boundary_residual = std::max(d.boundary_residual, std::abs(w - G(z)) / r2);
    }

    std::vector<cd> zb(L);
    for (std::size_t k = 0; k < L; ++k) zb[k] = g.nodes[k] * (1.0 + sol.F[k]);
    const double z_scale = spectral::max_abs(std::span<const cd>(zb));
    const double w_scale = spectral::max_abs(std::span<const cd>(sol.B));
    d.holomorphic_defect = std::max(sol.f_antiholomorphic, sol.b_antiholomorphic);

    // Cauchy-Riemann in polar form, d/drho f = (1/(i rho)) d/dt f, with the radial derivative from
    // two Richardson levels of central differences
    for (std::size_t j = 0; j + 1 < d.radii.size(); ++j) {
        const double rho = d.radii[j];
        const double h = std::min(opt.cr_step, (1.0 - rho) / 32.0);
        std::vector<cd> zt, wt;
        ring.dt(rho, M, zt, wt);
        std::vector<cd> dz[3], dw[3];
        for (int lvl = 0; lvl < 3; ++lvl) {
            const double hh = h / static_cast<double>(1 << lvl);
            std::vector<cd> zp, wp, zm, wm;
            ring(rho + hh, M, zp, wp);
            ring(rho - hh, M, zm, wm);
            dz[lvl].resize(M);
            dw[lvl].resize(M);
            for (std::size_t k = 0; k < M; ++k) {
                dz[lvl][k] = (zp[k] - zm[k]) / (2.0 * hh);
                dw[lvl][k] = (wp[k] - wm[k]) / (2.0 * hh);
            }
        }
        const auto extrapolate = [](const std::vector<cd>* D, std::size_t k) {
            const cd a = (4.0 * D[1][k] - D[0][k]) / 3.0, b = (4.0 * D[2][k] - D[1][k]) / 3.0;
            return (16.0 * b - a) / 15.0;
        };
        for (std::size_t k = 0; k < M; ++k) {
            const cd iz = zt[k] / cd(0.0, rho), iw = wt[k] / cd(0.0, rho);
            d.cr_residual = std::max(d.cr_residual, std::abs(extrapolate(dz, k) - iz) / z_scale);
            d.cr_residual = std::max(d.cr_residual, std::abs(extrapolate(dw, k) - iw) / w_scale);
        }
    }

    // overlap: points beyond the crossover distance evaluated both ways
    const BoundaryExtension Ez(g, zb, opt.extension), Ew(g, sol.B, opt.extension);
    const std::size_t stride = std::max<std::size_t>(1, M / std::max<std::size_t>(1, opt.overlap_points));
    for (std::size_t j = d.radii.size(); j-- > 0 && d.overlap_count == 0;) {
        for (std::size_t k = 0; k < M; k += stride) {
            const cd p = g.r() * g.map(d.zeta(j, k));
            if (!(Ez.distance_to_curve(p) > Ez.crossover()) || !Ez.inside(p)) continue;
            const double ez = std::abs(Ez.quadrature(p) - d.z_values[j * M + k]) / z_scale;
            const double ew = std::abs(Ew.quadrature(p) - d.w_values[j * M + k]) / w_scale;
            d.overlap_agreement = std::max({d.overlap_agreement, ez, ew});
            ++d.overlap_count;
        }
    }
    return d;
}

}  // namespace bishop
