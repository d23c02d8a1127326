#include <gtest/gtest.h>

#include <bishop/geometry.hpp>
#include <bishop/manifold.hpp>
#include <bishop/solver.hpp>

#include <cmath>
#include <complex>
#include <vector>

using namespace bishop;

namespace {

SliceModel model(double lambda, double k7, double p3 = 0.0) {
    NumericSeries P(10), K(10);
    P.set(3, 0, p3);
    P.set(0, 3, p3);
    K.set(7, 0, k7);
    K.set(0, 7, k7);
    return make_slice_model({0.0, 0.0}, lambda, P, K);
}

double max_abs_diff(const std::vector<cd>& a, const std::vector<cd>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(SliceOperators, QuadricCoefficientIsTwo) {
    for (double lambda : {0.0, 0.2, 0.3}) {
        const SliceGeometry g = make_slice_geometry(model(lambda, 0.0), {{0.0, 0.0}, 0.1});
        const SliceOperators op = build_slice_operators(g);
        EXPECT_LT(op.d_deviation, 1e-15);
        for (const cd& c : op.C) EXPECT_NEAR(std::abs(c - 2.0), 0.0, 1e-12);
    }
}

TEST(SliceOperators, ComplexFactorizationHasHolomorphicD) {
    const SliceGeometry g = make_slice_geometry(model(0.25, 0.5, 0.1), {{0.0, 0.0}, 0.08});
    const SliceOperators op = build_slice_operators(g, Linearization::Complex);
    EXPECT_LT(op.d_antiholomorphic, 1e-10);
    // C = D / C* up to grid resolution
    for (std::size_t k = 0; k < g.size(); k += 13)
        EXPECT_LT(std::abs(op.D[k] / op.Cstar[k] - op.C[k]), 1e-10 * std::abs(op.C[k]));
}

TEST(SliceOperators, VanishingCoefficientIsRejected) {
    SliceGeometry g = make_slice_geometry(model(0.2, 0.0), {{0.0, 0.0}, 0.1});
    g.nodes[7] = 0.0;
    try {
        (void)build_slice_operators(g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroOnCurve);
    }
}

TEST(Omega, QuadraticRemainder) {
    const SliceGeometry g = make_slice_geometry(model(0.2, 0.0, 0.1), {{0.0, 0.0}, 0.05});
    const SliceOperators op = build_slice_operators(g, Linearization::Complex);
    double prev = 0.0;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
        std::vector<cd> F(g.size());
        for (std::size_t k = 0; k < F.size(); ++k) F[k] = eps * std::polar(1.0, 2.0 * spectral::node(k, F.size()));
        const std::vector<double> w = omega(g, F);
        double rem = 0.0;
        for (std::size_t k = 0; k < F.size(); ++k)
            rem = std::max(rem, std::abs(w[k] - 1.0 - (op.c_true[k] * F[k]).real()));
        if (prev > 0.0) {
            EXPECT_NEAR(prev / rem, 4.0, 0.1);
        }
        prev = rem;
    }
    EXPECT_THROW((void)omega(g, std::vector<cd>(3)), Error);
}

TEST(SolveU, QuadricHasTheTrivialDisc) {
    for (double lambda : {0.0, 0.2, 0.45}) {
        const SliceGeometry g = make_slice_geometry(model(lambda, 0.0), {{0.0, 0.0}, 0.05});
        const DiscSolution s = solve_U(g);
        ASSERT_TRUE(s.converged);
        EXPECT_EQ(s.norm_u, 0.0);
        EXPECT_EQ(s.iterations, 1);
        for (const cd& b : s.B) EXPECT_NEAR(std::abs(b - 0.0025), 0.0, 1e-17);
    }
}

TEST(SolveU, BothLinearizationsReachTheSameDisc) {
    const SliceGeometry g = make_slice_geometry(model(0.2, 1.0, 0.05), {{0.0, 0.0}, 0.1});
    const DiscSolution a = solve_U(g);
    SolverOptions opt;
    opt.linearization = Linearization::Complex;
    const DiscSolution b = solve_U(g, opt);
    ASSERT_TRUE(a.converged && b.converged);
    EXPECT_LT(max_abs_diff(a.F, b.F), 1e-12);
    EXPECT_LT(max_abs_diff(a.B, b.B), 1e-14);
    EXPECT_LT(b.iterations, a.iterations);
    EXPECT_LT(a.attachment_residual, 1e-15);
    EXPECT_LT(a.center_height_error, 1e-10);
    EXPECT_LT(a.f_antiholomorphic, 1e-12);
}

TEST(SolveU, SlowContractionIsFlagged) {
    const SliceGeometry easy = make_slice_geometry(model(0.2, 0.025), {{0.0, 0.0}, 0.1});
    const SliceGeometry hard = make_slice_geometry(model(0.3, 0.025), {{0.0, 0.0}, 0.1});
    const DiscSolution a = solve_U(easy), b = solve_U(hard);
    EXPECT_FALSE(a.contraction_flag);
    EXPECT_LT(a.contraction_ratio, 0.5);
    EXPECT_TRUE(b.contraction_flag);
    EXPECT_GT(b.contraction_ratio, 0.5);
    EXPECT_LT(b.contraction_ratio, 1.0);
    EXPECT_TRUE(b.converged);
}

TEST(SolveU, DecaysLikeTheFifthPowerOfR) {
    const SliceModel m = model(0.2, 0.025);
    const double u1 = solve_U(make_slice_geometry(m, {{0.0, 0.0}, 0.02})).norm_u;
    const double u2 = solve_U(make_slice_geometry(m, {{0.0, 0.0}, 0.04})).norm_u;
    EXPECT_NEAR(std::log2(u2 / u1), 5.0, 1e-3);
}

TEST(SolveU, ValidityAndIterationLimits) {
    const SliceGeometry g = make_slice_geometry(model(0.2, 1.0), {{0.0, 0.0}, 0.1});
    SolverOptions tight;
    tight.validity_radius = 0.05;
    try {
        (void)solve_U(g, tight);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ValidityEscape);
    }
    SolverOptions short_run;
    short_run.max_iter = 2;
    try {
        (void)solve_U(g, short_run);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
    }
}
