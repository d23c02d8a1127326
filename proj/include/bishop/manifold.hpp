#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bidegree_series.hpp"
#include "error.hpp"
#include "param_poly.hpp"

namespace bishop {

/// Minimum distance kept between lambda and the parabolic value 1/2.
inline constexpr double kEllipticityMargin = 1e-3;

/// Normalized manifold w = z zbar + lambda(X)(z^2 + zbar^2) + P(z, X) + i K(z, X).
struct ManifoldSpec {
    int N = 2;
    int l = 7;
    ParamPoly lambda{2};
    ParamSeries P{BidegreeSeries<ParamComplex>::kDefaultMaxDegree, 2};
    ParamSeries K{BidegreeSeries<ParamComplex>::kDefaultMaxDegree, 2};
    double validity_radius = 0.1;

    [[nodiscard]] std::size_t param_dim() const { return static_cast<std::size_t>(2 * (N - 1)); }
};

/// Unnormalized defining series w = F(z, zbar; X).
struct RawDefiningSeries {
    int N = 2;
    ParamSeries F{BidegreeSeries<ParamComplex>::kDefaultMaxDegree, 2};
    double validity_radius = 0.1;

    [[nodiscard]] std::size_t param_dim() const { return static_cast<std::size_t>(2 * (N - 1)); }
};

inline std::string coeff_name(const char* series, int j, int k) {
    return std::string(series) + "[" + std::to_string(j) + "," + std::to_string(k) + "]";
}

/// Tensor grid {-h, 0, h}^dim with h = radius / sqrt(dim), so every point lies in the closed ball.
inline std::vector<std::vector<double>> sample_ball(std::size_t dim, double radius, int per_axis = 3) {
    if (per_axis < 1) fail(ErrorCode::InvalidArgument, "per_axis must be positive");
    const double h = dim == 0 ? 0.0 : radius / std::sqrt(static_cast<double>(dim));
    std::vector<double> axis(static_cast<std::size_t>(per_axis));
    for (int i = 0; i < per_axis; ++i)
        axis[static_cast<std::size_t>(i)] = per_axis == 1 ? 0.0 : -h + 2.0 * h * i / (per_axis - 1);
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> idx(dim, 0);
    while (true) {
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < dim; ++i) x[i] = axis[idx[i]];
        out.push_back(std::move(x));
        std::size_t i = 0;
        while (i < dim && ++idx[i] == axis.size()) idx[i++] = 0;
        if (i == dim) break;
    }
    return out;
}

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// Structural checks; the first offending coefficient is named in the error.
inline void validate(const ManifoldSpec& spec) {
    if (spec.N < 2) fail(ErrorCode::SchemaViolation, "N must be at least 2");
    if (spec.l < 3) fail(ErrorCode::SchemaViolation, "l must be at least 3");
    if (!(spec.validity_radius > 0.0)) fail(ErrorCode::SchemaViolation, "validityRadius must be positive");
    const std::size_t d = spec.param_dim();
    if (spec.lambda.dim() != d)
        fail(ErrorCode::ParameterDimensionMismatch, "lambda depends on " + std::to_string(spec.lambda.dim()) +
                                                        " parameters, expected " + std::to_string(d));
    if (spec.P.param_dim() != d || spec.K.param_dim() != d)
        fail(ErrorCode::ParameterDimensionMismatch, "P/K parameter dimension differs from 2(N-1)");

    auto check_series = [&](const ParamSeries& s, const char* name, int min_deg) {
        s.for_each_nonzero([&](int j, int k, const ParamComplex&) {
            if (j + k < min_deg)
                fail(ErrorCode::SchemaViolation, coeff_name(name, j, k) + " has degree " + std::to_string(j + k) +
                                                     " below the allowed minimum " + std::to_string(min_deg));
        });
        if (!s.is_real()) {
            s.for_each_nonzero([&](int j, int k, const ParamComplex& c) {
                if (!(c == conj(s.coeff_or_zero(k, j))))
                    fail(ErrorCode::SchemaViolation,
                         coeff_name(name, j, k) + " is not the conjugate of " + coeff_name(name, k, j) +
                             " (series must be real)");
            });
        }
    };
    check_series(spec.P, "P", 3);
    check_series(spec.K, "K", spec.l);

    for (const auto& x : sample_ball(d, spec.validity_radius)) {
        const double lam = spec.lambda.evaluate(x);
        if (lam < 0.0 || lam > 0.5 - kEllipticityMargin)
            fail(ErrorCode::EllipticityViolation,
                 "lambda(X) = " + std::to_string(lam) + " outside [0, 1/2 - margin] at a sample of the validity ball");
    }
}

/// Quadric part z zbar + lambda (z^2 + zbar^2).
inline NumericSeries quadric_series(double lambda, int max_degree = NumericSeries::kDefaultMaxDegree) {
    NumericSeries q(max_degree);
    q.set(1, 1, 1.0);
    q.set(2, 0, lambda);
    q.set(0, 2, lambda);
    return q;
}

/// The normalized defining functions frozen at one parameter value.
struct SliceModel {
    std::vector<double> X;
    double lambda = 0.0;
    NumericSeries P;   // real, degree >= 3
    NumericSeries K;   // real, degree >= l
    NumericSeries qP;  // q + P

    /// Full defining function G = q + P + i K.
    [[nodiscard]] NumericSeries G() const { return qP + cd(0.0, 1.0) * K; }
};

inline SliceModel make_slice_model(std::vector<double> X, double lambda, NumericSeries P, NumericSeries K) {
    SliceModel m;
    m.X = std::move(X);
    m.lambda = lambda;
    const int D = std::max(P.max_degree(), K.max_degree());
    m.P = P.with_max_degree(D);
    m.K = K.with_max_degree(D);
    m.qP = quadric_series(lambda, D) + m.P;
    return m;
}

inline SliceModel slice_model(const ManifoldSpec& spec, std::span<const double> x) {
    if (x.size() != spec.param_dim())
        fail(ErrorCode::ParameterDimensionMismatch,
             "X has " + std::to_string(x.size()) + " entries, expected " + std::to_string(spec.param_dim()));
    const double lam = spec.lambda.evaluate(x);
    if (lam < 0.0 || lam > 0.5 - kEllipticityMargin)
        fail(ErrorCode::EllipticityViolation, "lambda(X) = " + std::to_string(lam));
    return make_slice_model(std::vector<double>(x.begin(), x.end()), lam, at_parameters(spec.P, x),
                            at_parameters(spec.K, x));
}

}  // namespace bishop
