#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "disc.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "manifold.hpp"
#include "solver.hpp"
#include "spectral.hpp"

namespace bishop {

struct SliceOptions {
    GeometryOptions geometry;
    SolverOptions solver;
    DiscOptions disc;
};

/// Geometry, solution and disc of one slice.
struct SliceResult {
    SliceGeometry geometry;
    DiscSolution solution;
    AttachedDisc disc;
};

inline SliceResult solve_slice(const SliceModel& model, const SliceParams& slice, const SliceOptions& opt = {}) {
    SliceResult res;
    res.geometry = make_slice_geometry(model, slice, opt.geometry);
    res.solution = solve_U(res.geometry, opt.solver);
    res.disc = build_disc(res.geometry, res.solution, opt.disc);
    return res;
}

inline SliceResult solve_slice(const ManifoldSpec& spec, const SliceParams& slice, const SliceOptions& opt = {}) {
    if (slice.X.size() != spec.param_dim())
        fail(ErrorCode::ParameterDimensionMismatch, "slice has " + std::to_string(slice.X.size()) +
                                                        " parameters, spec expects " +
                                                        std::to_string(spec.param_dim()));
    if (norm2(slice.X) > spec.validity_radius)
        fail(ErrorCode::ValidityEscape, "slice parameter outside the validity radius");
    return solve_slice(slice_model(spec, slice.X), slice, opt);
}

/// Least-squares slope of log y against log x; NaN when fewer than two positive pairs remain.
inline double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

namespace detail {

/// Bring two sample vectors to the larger of their grids.
inline void common_grid(std::vector<cd>& a, std::vector<cd>& b) {
    if (a.size() < b.size()) a = spectral::resample(std::span<const cd>(a), b.size());
    if (b.size() < a.size()) b = spectral::resample(std::span<const cd>(b), a.size());
}

inline void common_grid(std::vector<double>& a, std::vector<double>& b) {
    if (a.size() < b.size()) a = spectral::resample(std::span<const double>(a), b.size());
    if (b.size() < a.size()) b = spectral::resample(std::span<const double>(b), a.size());
}

/// Evaluate f(i) for i < n on a pool of worker threads; results are stored by index.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F&& f) {
    std::vector<T> out(n);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
        });
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace detail

/// sup over the boundary of d^j/dt^j d^s/dr^s F, with central differences in r.
inline double derivative_bound_probe(const ManifoldSpec& spec, const SliceParams& slice, int j, int s,
                                     const SliceOptions& opt = {}, double r_fraction = 1.0 / 20.0) {
    if (j < 0 || s < 0 || s > 2) fail(ErrorCode::InvalidArgument, "derivative orders out of range");
    if (j + 2 * s > spec.l - 4)
        fail(ErrorCode::InvalidArgument, "(j, s) = (" + std::to_string(j) + ", " + std::to_string(s) +
                                             ") outside the admissible range j + 2s <= l - 4");
    const double h = slice.r * r_fraction;
    if (s > 0 && (slice.r - h <= 0.0 || slice.r + h > opt.geometry.trace.r_max))
        fail(ErrorCode::StencilOutOfRange, "r-stencil leaves (0, rMax]");
    const auto boundary_F = [&](double r) {
        const SliceGeometry g = make_slice_geometry(spec, {slice.X, r}, opt.geometry);
        return solve_U(g, opt.solver).F;
    };
    std::vector<cd> D;
    if (s == 0) {
        D = boundary_F(slice.r);
    } else {
        std::vector<cd> fp = boundary_F(slice.r + h), fm = boundary_F(slice.r - h);
        detail::common_grid(fp, fm);
        if (s == 1) {
            D.resize(fp.size());
            for (std::size_t k = 0; k < fp.size(); ++k) D[k] = (fp[k] - fm[k]) / (2.0 * h);
        } else {
            std::vector<cd> f0 = boundary_F(slice.r);
            detail::common_grid(f0, fp);
            detail::common_grid(fm, f0);
            D.resize(f0.size());
            for (std::size_t k = 0; k < f0.size(); ++k) D[k] = (fp[k] - 2.0 * f0[k] + fm[k]) / (h * h);
        }
    }
    if (j > 0) D = spectral::derivative(std::span<const cd>(D), j);
    return spectral::sup_norm(std::span<const cd>(D));
}

struct SweepOptions {
    SliceOptions slice;
    double r_step_fraction = 1.0 / 20.0;  // central differences in r use r (1 +- this)
    double x_step = 1e-3;
    double jacobian_z_fraction = 0.5;     // z-stencil of the jacobian is +- this times r
    std::size_t disjoint_samples = 512;    // interior points per disc used for distances
    double separation_constant = 0.5;      // same-X discs must be farther apart than c |r1^2 - r2^2|
    bool derivative_fits = true;
    bool jacobian = true;
    unsigned threads = 1;
};

struct FailureRecord {
    SliceParams slice;
    std::string code;
    std::string message;
};

struct SliceReport {
    SliceParams slice;
    bool converged = false;
    std::optional<FailureRecord> failure;
    bool contraction_flag = false;
    int iterations = 0;
    double norm_u = 0.0;
    double norm_dr_u = std::numeric_limits<double>::quiet_NaN();
    double residual = 0.0;
    double contraction_ratio = 0.0;
    double attachment_residual = 0.0;
    double boundary_residual = 0.0;
    double cr_residual = 0.0;
    double overlap_agreement = 0.0;
    double center_height_error = 0.0;
    double holomorphic_defect = 0.0;
    double curve_residual = 0.0;
    double sigma_prime = 0.0;
    std::size_t map_grid = 0;
    double slope_u = std::numeric_limits<double>::quiet_NaN();     // fit for this X, repeated per row
    double slope_dr_u = std::numeric_limits<double>::quiet_NaN();
    double min_disjoint_distance = std::numeric_limits<double>::quiet_NaN();
    double jacobian_defect = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> curve_radius;          // rho(theta_i) on the polar grid
    std::vector<std::vector<double>> samples;  // ambient disc samples
};

struct RateFit {
    std::vector<double> X;
    std::size_t points = 0;
    double slope_u = std::numeric_limits<double>::quiet_NaN();
    double slope_dr_u = std::numeric_limits<double>::quiet_NaN();
};

struct JacobianTrend {
    std::vector<double> X;
    std::vector<double> r;
    std::vector<double> defect;
    bool decreasing = false;  // defect shrinks as r decreases
};

struct FamilyReport {
    std::vector<SliceReport> slices;
    std::vector<RateFit> rate_fits;
    double min_disjoint_distance = std::numeric_limits<double>::quiet_NaN();
    double min_separation_ratio = std::numeric_limits<double>::quiet_NaN();  // same-X distance / |r1^2 - r2^2|
    bool separation_ok = true;
    bool nested = true;
    JacobianTrend jacobian;
    std::vector<FailureRecord> failures;

    [[nodiscard]] bool all_converged() const {
        return std::all_of(slices.begin(), slices.end(), [](const SliceReport& s) { return s.converged; });
    }
};

namespace detail {

struct Ambient {
    cd z, w;
};

/// T(z) = (z (1 + F(z)), B(z)) of a solved slice at physical points z.
struct SliceMapSampler {
    SliceGeometry geometry;
    DiscSolution solution;

    std::vector<Ambient> operator()(std::span<const cd> zs) const {
        std::vector<cd> zb(geometry.size());
        for (std::size_t k = 0; k < zb.size(); ++k) zb[k] = geometry.nodes[k] * (1.0 + solution.F[k]);
        const BoundaryExtension Ez(geometry, zb), Ew(geometry, solution.B);
        std::vector<Ambient> out(zs.size());
        for (std::size_t i = 0; i < zs.size(); ++i) out[i] = {Ez(zs[i]), Ew(zs[i])};
        return out;
    }
};

inline SliceMapSampler sample_slice(const ManifoldSpec& spec, const SliceParams& slice, const SliceOptions& opt) {
    SliceMapSampler s;
    s.geometry = make_slice_geometry(spec, slice, opt.geometry);
    s.solution = solve_U(s.geometry, opt.solver);
    return s;
}

inline std::vector<std::vector<double>> disc_samples(const AttachedDisc& d, std::size_t target) {
    const std::size_t rings = d.ring_count();
    const std::size_t per_ring = std::max<std::size_t>(1, target / rings);
    const std::size_t stride = std::max<std::size_t>(1, d.n_angles / per_ring);
    std::vector<std::vector<double>> pts;
    for (std::size_t j = 0; j < rings; ++j)
        for (std::size_t k = 0; k < d.n_angles && pts.size() < (j + 1) * per_ring; k += stride)
            pts.push_back(d.ambient(j, k));
    return pts;
}

inline double min_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double best = INFINITY;
    for (const auto& p : a)
        for (const auto& q : b) {
            double s = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
            best = std::min(best, s);
        }
    return std::sqrt(best);
}

}  // namespace detail

/// Jacobian of (z, X, u) -> (z (1 + F), X, B) at z = 0 minus the inclusion (z, X, u) -> (z, X, u + 0i),
/// by central differences; the result is the largest entry in absolute value. The z-stencil spans a fixed
/// fraction of the slice so the defect sees the nonlinear part of the disc map, not just its value at 0.
inline double jacobian_defect(const ManifoldSpec& spec, const SliceParams& slice, const SweepOptions& opt) {
    const std::size_t d = slice.X.size();
    const std::size_t n_out = 4 + d, n_in = 3 + d;
    std::vector<double> J(n_out * n_in, 0.0);
    const auto put = [&](std::size_t col, const detail::Ambient& plus, const detail::Ambient& minus, double step,
                         const std::vector<double>& dX) {
        const cd dz = (plus.z - minus.z) / step, dw = (plus.w - minus.w) / step;
        J[0 * n_in + col] = dz.real();
        J[1 * n_in + col] = dz.imag();
        for (std::size_t i = 0; i < d; ++i) J[(2 + i) * n_in + col] = dX[i];
        J[(2 + d) * n_in + col] = dw.real();
        J[(3 + d) * n_in + col] = dw.imag();
    };
    const std::vector<double> no_dX(d, 0.0);

    const detail::SliceMapSampler base = detail::sample_slice(spec, slice, opt.slice);
    const double hz = opt.jacobian_z_fraction * slice.r;
    const std::vector<cd> zs{cd(hz, 0.0), cd(-hz, 0.0), cd(0.0, hz), cd(0.0, -hz)};
    const auto v = base(zs);
    put(0, v[0], v[1], 2.0 * hz, no_dX);
    put(1, v[2], v[3], 2.0 * hz, no_dX);

    const cd origin[1] = {cd(0.0, 0.0)};
    for (std::size_t i = 0; i < d; ++i) {
        SliceParams sp = slice, sm = slice;
        sp.X[i] += opt.x_step;
        sm.X[i] -= opt.x_step;
        const auto tp = detail::sample_slice(spec, sp, opt.slice)(origin)[0];
        const auto tm = detail::sample_slice(spec, sm, opt.slice)(origin)[0];
        std::vector<double> dX(d, 0.0);
        dX[i] = 1.0;
        put(2 + i, tp, tm, 2.0 * opt.x_step, dX);
    }

    const double rp = slice.r * (1.0 + opt.r_step_fraction), rm = slice.r * (1.0 - opt.r_step_fraction);
    if (rp > opt.slice.geometry.trace.r_max) fail(ErrorCode::StencilOutOfRange, "r-stencil leaves (0, rMax]");
    const auto tp = detail::sample_slice(spec, {slice.X, rp}, opt.slice)(origin)[0];
    const auto tm = detail::sample_slice(spec, {slice.X, rm}, opt.slice)(origin)[0];
    put(2 + d, tp, tm, rp * rp - rm * rm, no_dX);

    double defect = 0.0;
    for (std::size_t row = 0; row < n_out; ++row)
        for (std::size_t col = 0; col < n_in; ++col) {
            double ref = 0.0;
            if (row < 2 + d && row == col) ref = 1.0;
            if (row == 2 + d && col == 2 + d) ref = 1.0;
            defect = std::max(defect, std::abs(J[row * n_in + col] - ref));
        }
    return defect;
}

namespace detail {

inline SliceReport run_slice(const ManifoldSpec& spec, const SliceParams& slice, const SweepOptions& opt) {
    SliceReport rep;
    rep.slice = slice;
    try {
        const SliceResult res = solve_slice(spec, slice, opt.slice);
        const DiscSolution& s = res.solution;
        rep.converged = s.converged;
        rep.iterations = s.iterations;
        rep.norm_u = s.norm_u;
        rep.residual = s.residual;
        rep.contraction_ratio = s.contraction_ratio;
        rep.contraction_flag = s.contraction_flag;
        rep.attachment_residual = s.attachment_residual;
        rep.boundary_residual = res.disc.boundary_residual;
        rep.cr_residual = res.disc.cr_residual;
        rep.overlap_agreement = res.disc.overlap_agreement;
        rep.center_height_error = res.disc.center_height_error;
        rep.holomorphic_defect = res.disc.holomorphic_defect;
        rep.curve_residual = res.geometry.curve.max_residual;
        rep.sigma_prime = res.geometry.map.derivative_at_zero;
        rep.map_grid = res.geometry.size();
        rep.curve_radius = res.geometry.curve.radius;
        rep.samples = disc_samples(res.disc, opt.disjoint_samples);

        if (opt.derivative_fits) {
            const double h = slice.r * opt.r_step_fraction;
            if (slice.r + h > opt.slice.geometry.trace.r_max)
                fail(ErrorCode::StencilOutOfRange, "r-stencil leaves (0, rMax]");
            std::vector<double> up =
                solve_U(make_slice_geometry(spec, {slice.X, slice.r + h}, opt.slice.geometry), opt.slice.solver).U;
            std::vector<double> um =
                solve_U(make_slice_geometry(spec, {slice.X, slice.r - h}, opt.slice.geometry), opt.slice.solver).U;
            common_grid(up, um);
            std::vector<double> du(up.size());
            for (std::size_t k = 0; k < du.size(); ++k) du[k] = (up[k] - um[k]) / (2.0 * h);
            rep.norm_dr_u = spectral::sup_norm(std::span<const double>(du));
        }
    } catch (const Error& e) {
        rep.converged = false;
        rep.failure = FailureRecord{slice, std::string(to_string(e.code())), e.what()};
    } catch (const std::exception& e) {
        rep.converged = false;
        rep.failure = FailureRecord{slice, "Exception", e.what()};
    }
    return rep;
}

}  // namespace detail

/// Solve and assemble every slice of X-grid x r-list, then evaluate the family-level properties.
inline FamilyReport sweep(const ManifoldSpec& spec, const std::vector<std::vector<double>>& x_grid,
                          std::vector<double> r_list, const SweepOptions& opt = {}) {
    validate(spec);
    if (x_grid.empty() || r_list.empty()) fail(ErrorCode::InvalidArgument, "empty sweep grid");
    for (std::size_t i = 1; i < r_list.size(); ++i)
        if (!(r_list[i] > r_list[i - 1])) fail(ErrorCode::InvalidArgument, "r-list must be strictly increasing");

    std::vector<SliceParams> slices;
    for (const auto& X : x_grid)
        for (double r : r_list) slices.push_back({X, r});

    FamilyReport rep;
    rep.slices = detail::parallel_map<SliceReport>(
        slices.size(), opt.threads, [&](std::size_t i) { return detail::run_slice(spec, slices[i], opt); });
    for (const auto& s : rep.slices)
        if (s.failure) rep.failures.push_back(*s.failure);

    const std::size_t nr = r_list.size();

    // rate fits per X
    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
        RateFit fit;
        fit.X = x_grid[xi];
        std::vector<double> rs, us, dus;
        for (std::size_t ri = 0; ri < nr; ++ri) {
            const SliceReport& s = rep.slices[xi * nr + ri];
            if (!s.converged) continue;
            rs.push_back(s.slice.r);
            us.push_back(s.norm_u);
            dus.push_back(s.norm_dr_u);
        }
        fit.points = rs.size();
        if (rs.size() >= 3) {
            fit.slope_u = fit_loglog_slope(rs, us);
            if (opt.derivative_fits) fit.slope_dr_u = fit_loglog_slope(rs, dus);
        }
        for (std::size_t ri = 0; ri < nr; ++ri) {
            rep.slices[xi * nr + ri].slope_u = fit.slope_u;
            rep.slices[xi * nr + ri].slope_dr_u = fit.slope_dr_u;
        }
        rep.rate_fits.push_back(fit);
    }

    // nested boundaries for each X
    for (std::size_t xi = 0; xi < x_grid.size(); ++xi)
        for (std::size_t ri = 0; ri + 1 < nr; ++ri) {
            const SliceReport& a = rep.slices[xi * nr + ri];
            const SliceReport& b = rep.slices[xi * nr + ri + 1];
            if (!a.converged || !b.converged || a.curve_radius.size() != b.curve_radius.size()) continue;
            for (std::size_t i = 0; i < a.curve_radius.size(); ++i)
                if (!(a.curve_radius[i] < b.curve_radius[i])) rep.nested = false;
        }

    // pairwise distances between the sampled discs
    for (std::size_t i = 0; i < rep.slices.size(); ++i) {
        SliceReport& a = rep.slices[i];
        if (!a.converged) continue;
        for (std::size_t j = i + 1; j < rep.slices.size(); ++j) {
            SliceReport& b = rep.slices[j];
            if (!b.converged) continue;
            const double dist = detail::min_distance(a.samples, b.samples);
            a.min_disjoint_distance = std::isnan(a.min_disjoint_distance) ? dist : std::min(a.min_disjoint_distance, dist);
            b.min_disjoint_distance = std::isnan(b.min_disjoint_distance) ? dist : std::min(b.min_disjoint_distance, dist);
            rep.min_disjoint_distance =
                std::isnan(rep.min_disjoint_distance) ? dist : std::min(rep.min_disjoint_distance, dist);
            if (a.slice.X == b.slice.X) {
                const double gap = std::abs(a.slice.r * a.slice.r - b.slice.r * b.slice.r);
                const double ratio = dist / gap;
                rep.min_separation_ratio =
                    std::isnan(rep.min_separation_ratio) ? ratio : std::min(rep.min_separation_ratio, ratio);
                if (!(dist > opt.separation_constant * gap)) rep.separation_ok = false;
            }
        }
    }

    // jacobian defect along r at the grid point closest to the origin
    if (opt.jacobian) {
        std::size_t x0 = 0;
        for (std::size_t xi = 1; xi < x_grid.size(); ++xi)
            if (norm2(x_grid[xi]) < norm2(x_grid[x0])) x0 = xi;
        rep.jacobian.X = x_grid[x0];
        rep.jacobian.r = r_list;
        rep.jacobian.defect = detail::parallel_map<double>(nr, opt.threads, [&](std::size_t ri) {
            try {
                return jacobian_defect(spec, {x_grid[x0], r_list[ri]}, opt);
            } catch (const Error&) {
                return std::numeric_limits<double>::quiet_NaN();
            }
        });
        for (std::size_t ri = 0; ri < nr; ++ri) {
            rep.slices[x0 * nr + ri].jacobian_defect = rep.jacobian.defect[ri];
            if (std::isnan(rep.jacobian.defect[ri]))
                rep.failures.push_back({{x_grid[x0], r_list[ri]}, "JacobianUnavailable",
                                        "a finite-difference neighbour of the slice failed"});
        }
        rep.jacobian.decreasing = true;
        for (std::size_t ri = 0; ri + 1 < nr; ++ri)
            if (!(rep.jacobian.defect[ri] < rep.jacobian.defect[ri + 1])) rep.jacobian.decreasing = false;
    }
    return rep;
}

}  // namespace bishop
