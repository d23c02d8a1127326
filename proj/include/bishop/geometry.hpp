#pragma once

#include <complex>
#include <vector>

#include "conformal.hpp"
#include "curve.hpp"
#include "manifold.hpp"
#include "spectral.hpp"

namespace bishop {

struct GeometryOptions {
    TraceOptions trace;
    MapOptions map;
};

/// Everything fixed by (X, r) before solving: the model, the curve, its Riemann map and
/// the boundary nodes z(t_k) = gamma(theta(t_k)) on the map grid.
struct SliceGeometry {
    SliceModel model;
    SliceParams slice;
    BoundaryCurve curve;
    ConformalMap map;
    std::vector<cd> nodes;
    std::vector<cd> node_derivative;  // dz/dt
    std::vector<double> polar_parameter;  // t(theta_i) at the polar nodes of the curve
    double node_residual = 0.0;       // max |q + P - r^2| / r^2 at the nodes

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
    [[nodiscard]] double r() const noexcept { return slice.r; }
};

inline SliceGeometry make_slice_geometry(const SliceModel& model, const SliceParams& slice,
                                         const GeometryOptions& opt = {}) {
    SliceGeometry g;
    g.model = model;
    g.slice = slice;
    g.curve = trace_level_curve(model, slice, opt.trace);
    g.map = riemann_map(g.curve, opt.map);
    const std::size_t N = g.map.size();
    g.nodes.resize(N);
    const double r2 = slice.r * slice.r;
    for (std::size_t k = 0; k < N; ++k) {
        const double th = g.map.correspondence[k];
        const double rho = radial_root(model.qP, model.lambda, th, slice.r, opt.trace.newton_max_iter);
        g.nodes[k] = std::polar(rho, th);
        g.node_residual = std::max(g.node_residual, std::abs(evaluate(model.qP, g.nodes[k]).real() - r2) / r2);
    }
    g.node_derivative = spectral::derivative(std::span<const cd>(g.nodes));
    g.polar_parameter.resize(g.curve.size());
    for (std::size_t i = 0; i < g.curve.size(); ++i) g.polar_parameter[i] = g.map.inverse_correspondence(g.curve.theta[i]);
    return g;
}

inline SliceGeometry make_slice_geometry(const ManifoldSpec& spec, const SliceParams& slice,
                                         const GeometryOptions& opt = {}) {
    return make_slice_geometry(slice_model(spec, slice.X), slice, opt);
}

}  // namespace bishop
