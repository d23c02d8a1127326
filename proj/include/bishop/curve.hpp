#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "bidegree_series.hpp"
#include "error.hpp"
#include "manifold.hpp"
#include "spectral.hpp"

namespace bishop {

/// One slice (X, r) of the disc family.
struct SliceParams {
    std::vector<double> X;
    double r = 0.0;
};

struct TraceOptions {
    std::size_t n_theta = 256;
    double r_max = 0.2;
    double residual_tol = 1e-11;  // relative to r^2
    int newton_max_iter = 60;
};

/// Level curve q + P = r^2 sampled on a polar grid, with spectral tangents.
struct BoundaryCurve {
    double r = 0.0;
    double lambda = 0.0;
    std::vector<double> theta;
    std::vector<double> radius;
    std::vector<cd> points;
    std::vector<cd> tangents;  // d/dtheta
    double max_residual = 0.0;  // max |q + P - r^2| / r^2

    [[nodiscard]] std::size_t size() const noexcept { return theta.size(); }
};

/// q + P restricted to the ray arg z = theta, as a polynomial in rho.
class RadialProfile {
public:
    RadialProfile(const NumericSeries& qP, double theta) : c_(static_cast<std::size_t>(qP.max_degree()) + 1, 0.0) {
        qP.for_each_nonzero([&](int j, int k, const cd& c) {
            c_[static_cast<std::size_t>(j + k)] += (c * std::polar(1.0, (j - k) * theta)).real();
        });
    }

    [[nodiscard]] std::pair<double, double> value_and_slope(double rho) const {
        double v = 0.0, d = 0.0;
        for (std::size_t n = c_.size(); n-- > 0;) {
            d = d * rho + v;
            v = v * rho + c_[n];
        }
        return {v, d};
    }

private:
    std::vector<double> c_;
};

/// Radius of the first crossing of q + P = r^2 along the ray at angle theta.
inline double radial_root(const NumericSeries& qP, double lambda, double theta, double r, int max_iter = 60) {
    const RadialProfile f(qP, theta);
    const double r2 = r * r;
    const double cap = 10.0 * r / std::sqrt(std::max(1.0 - 2.0 * lambda, 1e-6));
    double lo = 0.0, hi = r;
    while (f.value_and_slope(hi).first <= r2) {
        lo = hi;
        hi *= 1.5;
        if (hi > cap)
            fail(ErrorCode::NoRoot, "no crossing of the level r = " + std::to_string(r) + " at angle " +
                                        std::to_string(theta));
    }
    double rho = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        auto [v, d] = f.value_and_slope(rho);
        v -= r2;
        if (v > 0.0)
            hi = rho;
        else
            lo = rho;
        double next = d > 0.0 ? rho - v / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - rho) <= 1e-16 * rho || hi - lo <= 4e-16 * hi) {
            rho = next;
            break;
        }
        rho = next;
    }
    // the domain must be starlike: the profile increases up to and somewhat past the crossing
    for (int s = 1; s <= 64; ++s) {
        const double x = 1.5 * rho * s / 64.0;
        if (f.value_and_slope(x).second <= 0.0)
            fail(ErrorCode::NotStarShaped, "radial profile not increasing at angle " + std::to_string(theta));
    }
    return rho;
}

inline int winding_number(std::span<const cd> pts, cd about = 0.0) {
    double total = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k)
        total += std::arg((pts[(k + 1) % pts.size()] - about) / (pts[k] - about));
    return static_cast<int>(std::lround(total / spectral::kTwoPi));
}

inline BoundaryCurve trace_level_curve(const SliceModel& model, const SliceParams& slice, const TraceOptions& opt = {}) {
    if (!(slice.r > 0.0) || slice.r > opt.r_max)
        fail(ErrorCode::InvalidArgument, "r = " + std::to_string(slice.r) + " outside (0, rMax]");
    if (opt.n_theta < 8) fail(ErrorCode::InvalidArgument, "too few curve samples");
    const std::size_t N = opt.n_theta;
    BoundaryCurve c;
    c.r = slice.r;
    c.lambda = model.lambda;
    c.theta = spectral::grid(N);
    c.radius.resize(N);
    c.points.resize(N);
    const double r2 = slice.r * slice.r;
    for (std::size_t k = 0; k < N; ++k) {
        c.radius[k] = radial_root(model.qP, model.lambda, c.theta[k], slice.r, opt.newton_max_iter);
        c.points[k] = std::polar(c.radius[k], c.theta[k]);
        const double res = std::abs(evaluate(model.qP, c.points[k]).real() - r2) / r2;
        c.max_residual = std::max(c.max_residual, res);
    }
    if (c.max_residual > opt.residual_tol)
        fail(ErrorCode::NoConvergence, "curve residual " + std::to_string(c.max_residual));
    c.tangents = spectral::derivative(std::span<const cd>(c.points));
    return c;
}

}  // namespace bishop
