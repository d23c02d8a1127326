#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bidegree_series.hpp"
#include "error.hpp"
#include "manifold.hpp"
#include "param_poly.hpp"

namespace bishop {

/// Weighted homogeneous polynomial sum_{j1 + 2 j2 = m} b[j2] z^{j1} w^{j2}.
struct WeightedPoly {
    int weight = 0;
    std::vector<cd> b;

    [[nodiscard]] cd evaluate(cd z, cd w) const {
        cd s = 0.0;
        for (std::size_t j2 = 0; j2 < b.size(); ++j2)
            s += b[j2] * std::pow(z, weight - 2 * static_cast<int>(j2)) * std::pow(w, static_cast<int>(j2));
        return s;
    }

    /// B(z, G(z, zbar)) as a truncated series.
    [[nodiscard]] NumericSeries compose(const NumericSeries& G) const {
        const int D = G.max_degree();
        NumericSeries out(D);
        NumericSeries gpow(D);
        gpow.set(0, 0, 1.0);
        for (std::size_t j2 = 0; j2 < b.size(); ++j2) {
            if (j2 > 0) gpow = gpow * G;
            const int j1 = weight - 2 * static_cast<int>(j2);
            if (b[j2] != cd{}) {
                gpow.for_each_nonzero([&](int j, int k, const cd& c) { out.add(j + j1, k, b[j2] * c); });
            }
        }
        return out;
    }
};

/// Coordinate change taking the raw defining function at one X to normal form.
struct SliceChange {
    std::vector<double> X;
    cd z0 = 0.0;            // CR singularity location
    cd height_shift = 0.0;  // w value at z0
    cd c10 = 0.0;           // removed holomorphic linear term
    cd gamma = 1.0;         // z zbar coefficient used for rescaling
    double theta = 0.0;     // rotation z -> z e^{i theta}
    cd absorption = 0.0;    // holomorphic z^2 term absorbed into w
    double lambda = 0.0;
    std::vector<WeightedPoly> B;  // stage maps w -> w - i B_m(z, w)
    double max_condition = 1.0;

    /// Replay the change on a series by truncated composition.
    [[nodiscard]] NumericSeries apply(const NumericSeries& raw) const {
        NumericSeries G = translate(raw, z0);
        G.coeff(0, 0) -= height_shift;
        if (G.max_degree() >= 1) G.coeff(1, 0) -= c10;
        G = (1.0 / gamma) * G;
        G = rotate(G, theta);
        if (G.max_degree() >= 2) G.coeff(2, 0) -= absorption;
        for (const auto& Bm : B) G = G - cd(0.0, 1.0) * Bm.compose(G);
        return G;
    }

    /// New w coordinate of the point of M above the new coordinate z, computed pointwise.
    [[nodiscard]] cd apply_point(const NumericSeries& raw, cd z) const {
        const cd z1 = std::polar(1.0, theta) * z;
        cd w = evaluate(raw, z1 + z0);
        w = (w - height_shift - c10 * z1) / gamma;
        w -= absorption * z * z;
        for (const auto& Bm : B) w -= cd(0.0, 1.0) * Bm.evaluate(z, w);
        return w;
    }
};

struct NormalFormOptions {
    int per_axis = 3;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    double cond_limit = 1e12;
    double margin = kEllipticityMargin;
    int fit_degree = ParamPoly::kDefaultDegreeBound;
    double chop = 1e-10;
};

/// True when the zbar-derivative of F vanishes at z.
inline bool detect_cr_singularity(const NumericSeries& F, cd z, double tol = 1e-12) {
    return std::abs(evaluate(F.derivative_zbar(), z)) < tol;
}

/// Damped Newton for the CR singular point: dF/dzbar (z0) = 0.
inline cd recenter_cr_singularity(const NumericSeries& F, double tol = 1e-12, int max_iter = 50) {
    const NumericSeries g = F.derivative_zbar();
    if (g.max_degree() < 1) fail(ErrorCode::InvalidArgument, "series too short to locate a CR singularity");
    const NumericSeries gz = g.derivative_z();
    const NumericSeries gzb = g.derivative_zbar();
    cd z = 0.0;
    cd gv = evaluate(g, z);
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(gv) < tol) return z;
        const cd a = evaluate(gz, z), b = evaluate(gzb, z);
        const cd c1 = a + b, c2 = cd(0.0, 1.0) * (a - b);
        Eigen::Matrix2d J;
        J << c1.real(), c2.real(), c1.imag(), c2.imag();
        const Eigen::Vector2d rhs(-gv.real(), -gv.imag());
        if (std::abs(J.determinant()) < 1e-300) fail(ErrorCode::NoConvergence, "singular Jacobian while recentering");
        const Eigen::Vector2d d = J.partialPivLu().solve(rhs);
        cd step(d(0), d(1));
        double t = 1.0;
        cd trial = z + step;
        cd gt = evaluate(g, trial);
        while (std::abs(gt) >= std::abs(gv) && t > 1e-4) {
            t *= 0.5;
            trial = z + t * step;
            gt = evaluate(g, trial);
        }
        z = trial;
        gv = gt;
    }
    if (std::abs(gv) < tol) return z;
    fail(ErrorCode::NoConvergence, "recentering Newton did not converge in " + std::to_string(max_iter) + " steps");
}

/// Rotation angle making the zbar^2 coefficient real and nonnegative, on the branch nearest `reference`.
inline double normalizing_angle(cd lambda2, std::optional<double> reference) {
    if (lambda2 == cd{}) return 0.0;
    double th = 0.5 * std::arg(lambda2);  // in (-pi/2, pi/2]
    if (reference) {
        const double pi = std::numbers::pi;
        th += pi * std::round((*reference - th) / pi);
    }
    return th;
}

struct QuadricSlice {
    NumericSeries G;
    SliceChange change;
};

/// Recenter, remove the linear terms, rescale, rotate and absorb the z^2 term.
inline QuadricSlice normalize_quadric(const NumericSeries& F, std::vector<double> X, const NormalFormOptions& opt = {},
                                      std::optional<double> theta_ref = std::nullopt) {
    if (F.max_degree() < 2) fail(ErrorCode::InvalidArgument, "defining series must reach degree 2");
    QuadricSlice out;
    SliceChange& ch = out.change;
    ch.X = std::move(X);
    ch.z0 = detect_cr_singularity(F, 0.0, opt.newton_tol) ? cd{}
                                                           : recenter_cr_singularity(F, opt.newton_tol,
                                                                                     opt.newton_max_iter);
    NumericSeries G = translate(F, ch.z0);
    ch.height_shift = G.coeff(0, 0);
    G.coeff(0, 0) = 0.0;
    ch.c10 = G.coeff(1, 0);
    G.coeff(1, 0) = 0.0;
    ch.gamma = G.coeff(1, 1);
    if (ch.gamma == cd{}) fail(ErrorCode::EllipticityViolation, "vanishing z zbar coefficient");
    G = (1.0 / ch.gamma) * G;
    G.coeff(1, 1) = 1.0;
    ch.theta = normalizing_angle(G.coeff(0, 2), theta_ref);
    G = rotate(G, ch.theta);
    ch.absorption = G.coeff(2, 0) - G.coeff(0, 2);
    G.coeff(2, 0) = G.coeff(0, 2);
    ch.lambda = G.coeff(0, 2).real();
    if (ch.lambda > 0.5 - opt.margin)
        fail(ErrorCode::EllipticityViolation, "lambda = " + std::to_string(ch.lambda) + " violates the margin");
    out.G = std::move(G);
    return out;
}

/// Unknown layout of a weight-m stage: (j1, j2, imaginary?) in lexicographic (j1, j2) order.
struct StageUnknown {
    int j1, j2;
    bool imaginary;
};

inline std::vector<StageUnknown> stage_unknowns(int m) {
    std::vector<StageUnknown> u;
    for (int j1 = m % 2; j1 <= m; j1 += 2) {
        const int j2 = (m - j1) / 2;
        u.push_back({j1, j2, false});
        if (j1 > 0) u.push_back({j1, j2, true});
    }
    return u;
}

/// Real coordinates of a real homogeneous degree-m series: (Re, Im) of c_{a, m-a} for a > m - a, then c_{m/2,m/2}.
inline Eigen::VectorXd real_homogeneous_coords(const NumericSeries& s, int m) {
    Eigen::VectorXd v(m + 1);
    Eigen::Index r = 0;
    for (int a = m; 2 * a > m; --a) {
        const cd c = s.coeff_or_zero(a, m - a);
        v(r++) = c.real();
        v(r++) = c.imag();
    }
    if (m % 2 == 0) v(r++) = s.coeff_or_zero(m / 2, m / 2).real();
    return v;
}

/// The (m+1)x(m+1) real matrix of B -> Re B(z, q) on weighted homogeneous polynomials with Im B(0, u) = 0.
inline Eigen::MatrixXd normalization_matrix(double lambda, int m) {
    const auto unknowns = stage_unknowns(m);
    const Eigen::Index n = m + 1;
    if (static_cast<Eigen::Index>(unknowns.size()) != n)
        fail(ErrorCode::SingularNormalizationMatrix, "stage system is not square");
    const NumericSeries q = quadric_series(lambda, m);
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& u = unknowns[static_cast<std::size_t>(c)];
        NumericSeries S(m);
        S.set(u.j1, 0, u.imaginary ? cd(0.0, 1.0) : cd(1.0, 0.0));
        for (int i = 0; i < u.j2; ++i) S = S * q;
        A.col(c) = real_homogeneous_coords(real_part(S), m);
    }
    return A;
}

/// Solve Re B(z, q) = defect for the weight-m polynomial B.
inline WeightedPoly solve_weight_stage(double lambda, const NumericSeries& defect, int m, double cond_limit = 1e12,
                                       double* cond_out = nullptr) {
    const Eigen::MatrixXd A = normalization_matrix(lambda, m);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (cond_out) *cond_out = cond;
    if (!(cond <= cond_limit))
        fail(ErrorCode::SingularNormalizationMatrix,
             "weight " + std::to_string(m) + " matrix condition " + std::to_string(cond) + " at lambda " +
                 std::to_string(lambda));
    const Eigen::VectorXd rhs = real_homogeneous_coords(defect, m);
    const Eigen::VectorXd beta = A.partialPivLu().solve(rhs);
    const auto unknowns = stage_unknowns(m);
    WeightedPoly B;
    B.weight = m;
    B.b.assign(static_cast<std::size_t>(m / 2) + 1, cd{});
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
        auto& slot = B.b[static_cast<std::size_t>(unknowns[i].j2)];
        if (unknowns[i].imaginary)
            slot += cd(0.0, beta(static_cast<Eigen::Index>(i)));
        else
            slot += cd(beta(static_cast<Eigen::Index>(i)), 0.0);
    }
    return B;
}

/// Remove the imaginary part of weights 3 .. l-1 in place.
inline void kill_imaginary_part(QuadricSlice& s, int l, const NormalFormOptions& opt = {}) {
    for (int m = 3; m < l && m <= s.G.max_degree(); ++m) {
        const NumericSeries defect = imag_part(s.G).homogeneous_part(m);
        if (defect.is_zero()) continue;
        double cond = 1.0;
        WeightedPoly B = solve_weight_stage(s.change.lambda, defect, m, opt.cond_limit, &cond);
        s.change.max_condition = std::max(s.change.max_condition, cond);
        s.G = s.G - cd(0.0, 1.0) * B.compose(s.G);
        s.change.B.push_back(std::move(B));
    }
}

/// Split a normalized G into the real series P (degree >= 3) and K.
inline std::pair<NumericSeries, NumericSeries> split_real_imag(const NumericSeries& G, double lambda) {
    NumericSeries rest = G - quadric_series(lambda, G.max_degree());
    return {real_part(rest), imag_part(rest)};
}

struct NormalFormResult {
    ManifoldSpec spec;
    std::vector<std::vector<double>> samples;
    std::vector<SliceModel> slices;
    std::vector<SliceChange> changes;
    std::vector<double> lambda_values;
    double lambda_continuity = 0.0;    // max |lambda(X) - lambda(0)| / |X|
    double max_condition = 1.0;
    double max_low_order_residual = 0.0;  // largest discarded coefficient below the normal-form degrees
    double max_chopped = 0.0;             // largest negligible coefficient left out of the fitted spec
    double max_fit_residual = 0.0;
    double round_trip_residual = 0.0;
    double valid_radius = 0.0;
};

namespace detail {

inline std::size_t origin_index(const std::vector<std::vector<double>>& samples) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (norm2(samples[i]) < norm2(samples[best])) best = i;
    return best;
}

inline void assemble_spec(NormalFormResult& res, int N, int l, double radius, const NormalFormOptions& opt) {
    const std::size_t d = static_cast<std::size_t>(2 * (N - 1));
    res.spec.N = N;
    res.spec.l = l;
    res.spec.validity_radius = radius;
    res.spec.lambda = fit_param_poly(res.samples, res.lambda_values, d, opt.fit_degree);
    const int D = res.slices.front().P.max_degree();
    res.spec.P = ParamSeries(D, d);
    res.spec.K = ParamSeries(D, d);
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        res.max_low_order_residual = std::max(res.max_low_order_residual, max_coeff(res.slices[i].P, 0, 2));
        res.max_low_order_residual = std::max(res.max_low_order_residual, max_coeff(res.slices[i].K, 0, l - 1));
    }
    auto fit_series = [&](ParamSeries& out, auto member, int min_deg) {
        for (int deg = min_deg; deg <= D; ++deg)
            for (int k = 0; 2 * k <= deg; ++k) {
                const int j = deg - k;
                std::vector<double> re(res.samples.size()), im(res.samples.size());
                double mx = 0.0;
                for (std::size_t i = 0; i < res.samples.size(); ++i) {
                    const cd c = (res.slices[i].*member).coeff(j, k);
                    re[i] = c.real();
                    im[i] = j == k ? 0.0 : c.imag();
                    mx = std::max(mx, std::abs(c));
                }
                if (mx < opt.chop) {
                    res.max_chopped = std::max(res.max_chopped, mx);
                    continue;
                }
                ParamComplex c{fit_param_poly(res.samples, re, d, opt.fit_degree),
                               fit_param_poly(res.samples, im, d, opt.fit_degree)};
                for (std::size_t i = 0; i < res.samples.size(); ++i) {
                    const cd fitted = c.evaluate(res.samples[i]);
                    res.max_fit_residual = std::max(res.max_fit_residual, std::abs(fitted - cd(re[i], im[i])));
                }
                out.set(j, k, c);
                if (j != k) out.set(k, j, conj(c));
            }
    };
    fit_series(res.spec.P, &SliceModel::P, 3);
    fit_series(res.spec.K, &SliceModel::K, l);
}

}  // namespace detail

/// Full pipeline from a raw defining series to normal form of order l on the sample grid of the validity ball.
inline NormalFormResult normalize(const RawDefiningSeries& raw, int l, const NormalFormOptions& opt = {}) {
    if (raw.N < 2) fail(ErrorCode::SchemaViolation, "N must be at least 2");
    if (raw.F.param_dim() != raw.param_dim())
        fail(ErrorCode::ParameterDimensionMismatch, "F parameter dimension differs from 2(N-1)");
    NormalFormResult res;
    res.samples = sample_ball(raw.param_dim(), raw.validity_radius, opt.per_axis);
    const std::size_t i0 = detail::origin_index(res.samples);

    std::vector<std::size_t> order{i0};
    for (std::size_t i = 0; i < res.samples.size(); ++i)
        if (i != i0) order.push_back(i);

    res.slices.resize(res.samples.size());
    res.changes.resize(res.samples.size());
    res.lambda_values.resize(res.samples.size());
    std::optional<double> theta_ref;
    for (std::size_t i : order) {
        const NumericSeries F = at_parameters(raw.F, res.samples[i]);
        QuadricSlice s = normalize_quadric(F, res.samples[i], opt, theta_ref);
        if (!theta_ref) theta_ref = s.change.theta;
        kill_imaginary_part(s, l, opt);
        auto [P, K] = split_real_imag(s.G, s.change.lambda);
        res.slices[i] = make_slice_model(res.samples[i], s.change.lambda, P, K);
        res.lambda_values[i] = s.change.lambda;
        res.max_condition = std::max(res.max_condition, s.change.max_condition);

        // pointwise round trip on a small circle
        const NumericSeries Gfinal = s.G;
        double scale = 0.0, err = 0.0;
        for (int a = 0; a < 16; ++a) {
            const cd z = std::polar(0.02, 2.0 * std::numbers::pi * a / 16.0);
            const cd direct = s.change.apply_point(F, z);
            const cd series = evaluate(Gfinal, z);
            err = std::max(err, std::abs(direct - series));
            scale = std::max(scale, std::abs(direct));
        }
        res.round_trip_residual = std::max(res.round_trip_residual, err / std::max(scale, 1e-300));
        res.changes[i] = std::move(s.change);
        res.valid_radius = std::max(res.valid_radius, norm2(res.samples[i]));
    }
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        const double dx = norm2(res.samples[i]);
        if (dx > 0.0)
            res.lambda_continuity =
                std::max(res.lambda_continuity, std::abs(res.lambda_values[i] - res.lambda_values[i0]) / dx);
    }
    detail::assemble_spec(res, raw.N, l, raw.validity_radius, opt);
    return res;
}

/// Bring an already quadric-normalized spec to order l by killing K on the sample grid.
inline NormalFormResult kill_imaginary_part(const ManifoldSpec& in, int l, const NormalFormOptions& opt = {}) {
    RawDefiningSeries raw;
    raw.N = in.N;
    raw.validity_radius = in.validity_radius;
    const std::size_t d = in.param_dim();
    raw.F = in.P;
    in.K.for_each_nonzero([&](int j, int k, const ParamComplex& c) {
        raw.F.add(j, k, ParamComplex{-c.im, c.re});
    });
    raw.F.add(1, 1, ParamComplex::constant(d, 1.0));
    raw.F.add(2, 0, ParamComplex{in.lambda, ParamPoly(d)});
    raw.F.add(0, 2, ParamComplex{in.lambda, ParamPoly(d)});
    return normalize(raw, l, opt);
}

}  // namespace bishop
