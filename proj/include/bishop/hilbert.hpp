#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "conformal.hpp"
#include "curve.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "spectral.hpp"

namespace bishop {

/// Hilbert transform on the circle: H[U] is the harmonic conjugate with H[U](0) = 0.
inline std::vector<double> hilbert_on_circle(std::span<const double> U) { return spectral::conjugate(U); }

/// Hilbert transform of a slice curve, realized through the conformal pullback to the circle.
class HilbertOperator {
public:
    HilbertOperator(const BoundaryCurve& curve, const ConformalMap& map) : curve_(&curve), map_(&map) {}
    explicit HilbertOperator(const SliceGeometry& g) : HilbertOperator(g.curve, g.map) { t_ = g.polar_parameter; }

    [[nodiscard]] std::size_t circle_size() const { return map_->size(); }
    [[nodiscard]] std::size_t curve_size() const { return curve_->size(); }

    /// Conjugation of data already on the map grid t_k.
    [[nodiscard]] std::vector<double> on_circle(std::span<const double> U) const {
        if (U.size() != map_->size())
            fail(ErrorCode::GridMismatch, "expected " + std::to_string(map_->size()) + " circle samples, got " +
                                              std::to_string(U.size()));
        return spectral::conjugate(U);
    }

    /// phi on the polar grid of the curve -> phi(theta(t_k)) on the map grid.
    [[nodiscard]] std::vector<double> pull_back(std::span<const double> phi) const {
        check_curve_grid(phi);
        const double hi = spectral::top_quarter_energy(phi);
        if (hi > 1e-6)
            fail(ErrorCode::AliasingRisk, "top quarter of the input spectrum carries " + std::to_string(hi) +
                                              " of the energy");
        const spectral::PeriodicInterpolator I(std::vector<double>(phi.begin(), phi.end()));
        return I.values(map_->correspondence);
    }

    /// u on the map grid -> u(t(theta_i)) on the polar grid.
    [[nodiscard]] std::vector<double> push_forward(std::span<const double> u) const {
        if (u.size() != map_->size()) fail(ErrorCode::GridMismatch, "push_forward expects map-grid samples");
        if (t_.empty()) {
            t_.resize(curve_->size());
            for (std::size_t i = 0; i < t_.size(); ++i) t_[i] = map_->inverse_correspondence(curve_->theta[i]);
        }
        const spectral::PeriodicInterpolator I(std::vector<double>(u.begin(), u.end()));
        return I.values(t_);
    }

    /// H[phi] on the curve for phi sampled on the polar grid; the result is on the same grid.
    [[nodiscard]] std::vector<double> on_curve(std::span<const double> phi) const {
        return push_forward(spectral::conjugate(pull_back(phi)));
    }

    /// Imaginary part at the distinguished interior point of the holomorphic extension of phi + i H[phi].
    [[nodiscard]] double origin_imaginary(std::span<const double> h_polar) const {
        const std::vector<double> back = pull_back(h_polar);
        double s = 0.0;
        for (double v : back) s += v;
        return s / static_cast<double>(back.size());
    }

private:
    void check_curve_grid(std::span<const double> phi) const {
        if (phi.size() != curve_->size())
            fail(ErrorCode::GridMismatch, "expected " + std::to_string(curve_->size()) + " curve samples, got " +
                                              std::to_string(phi.size()));
    }

    const BoundaryCurve* curve_;
    const ConformalMap* map_;
    mutable std::vector<double> t_;  // circle parameters of the polar nodes, filled on first use
};

/// Discrete C^{j,alpha} norm of periodic samples: sup norms of spectral derivatives up to order j
/// plus the alpha-Hoelder seminorm of the j-th derivative over all grid pairs.
inline double holder_norm(std::span<const double> u, int j, double alpha = 0.5) {
    const std::size_t N = u.size();
    double total = 0.0;
    std::vector<double> d(u.begin(), u.end());
    for (int i = 0; i <= j; ++i) {
        if (i > 0) d = spectral::derivative(std::span<const double>(d));
        total += spectral::max_abs(std::span<const double>(d));
    }
    double semi = 0.0;
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b) {
            const double gap = static_cast<double>(std::min(b - a, N - (b - a))) * spectral::kTwoPi / N;
            semi = std::max(semi, std::abs(d[a] - d[b]) / std::pow(gap, alpha));
        }
    return total + semi;
}

/// Random real trigonometric polynomial of degree <= max_mode on the N-point grid.
inline std::vector<double> random_trig_poly(std::size_t N, int max_mode, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(max_mode) + 1), b(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        a[n] = g(rng);
        b[n] = g(rng);
    }
    std::vector<double> out(N);
    for (std::size_t k = 0; k < N; ++k) {
        const double t = spectral::node(k, N);
        double s = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * std::cos(n * t) + b[n] * std::sin(n * t);
        out[k] = s;
    }
    return out;
}

struct NormProbeResult {
    double ratio = 0.0;  // max over trials of ||H phi - H_model phi|| / ||phi||
    int trials = 0;
    std::uint64_t seed = 0;
};

/// Operator-difference estimate between the slice Hilbert transform and the one of the model quadric.
inline NormProbeResult norm_probe(const HilbertOperator& actual, const HilbertOperator& model, int j,
                                  int trials = 8, std::uint64_t seed = 1, int max_mode = 8, double alpha = 0.5) {
    if (actual.curve_size() != model.curve_size())
        fail(ErrorCode::GridMismatch, "probe operators use different curve grids");
    std::mt19937_64 rng(seed);
    NormProbeResult res;
    res.trials = trials;
    res.seed = seed;
    for (int t = 0; t < trials; ++t) {
        const std::vector<double> phi = random_trig_poly(actual.curve_size(), max_mode, rng);
        const std::vector<double> a = actual.on_curve(phi);
        const std::vector<double> b = model.on_curve(phi);
        std::vector<double> diff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
        res.ratio = std::max(res.ratio, holder_norm(diff, j, alpha) / holder_norm(phi, j, alpha));
    }
    return res;
}

}  // namespace bishop
