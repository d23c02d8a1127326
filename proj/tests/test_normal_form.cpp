#include <gtest/gtest.h>

#include <bishop/manifold.hpp>
#include <bishop/normal_form.hpp>

#include <cmath>
#include <complex>
#include <vector>

using namespace bishop;

namespace {

NumericSeries quadric_with_shift(double lambda, double x) {
    NumericSeries F = quadric_series(lambda, 10);
    F.set(1, 0, x);
    F.set(0, 1, x);
    return F;
}

// z zbar + conj(L) z^2 + L zbar^2 + x2 (z + zbar) + imaginary defect of weights 3..6 + K-type term of weight 7
RawDefiningSeries raw_example(cd L) {
    RawDefiningSeries raw;
    raw.N = 2;
    raw.validity_radius = 0.1;
    const std::size_t d = 2;
    ParamSeries F(10, d);
    const auto c = [&](cd v) { return ParamComplex::constant(d, v); };
    F.set(1, 1, c(1.0));
    F.set(0, 2, c(L));
    F.set(2, 0, c(std::conj(L)));
    const ParamComplex x2{ParamPoly::variable(d, 1), ParamPoly(d)};
    F.set(1, 0, x2);
    F.set(0, 1, x2);
    for (auto [j, k, v] : {std::tuple{3, 0, 0.15}, {3, 1, 0.1}, {4, 1, 0.07}, {6, 0, 0.04}, {7, 0, 0.025}}) {
        F.set(j, k, c(cd(0.0, v)));
        F.set(k, j, c(cd(0.0, v)));
    }
    F.set(2, 2, c(cd(0.0, 0.08)));
    F.set(2, 1, c(0.02));
    F.set(1, 2, c(0.02));
    raw.F = F;
    return raw;
}

}  // namespace

TEST(CrSingularity, DetectsTheOriginOfTheQuadric) {
    const NumericSeries F = quadric_series(0.2);
    EXPECT_TRUE(detect_cr_singularity(F, 0.0));
    EXPECT_FALSE(detect_cr_singularity(F, cd(0.1, 0.0)));
}

TEST(CrSingularity, RecenteringMatchesClosedForm) {
    for (double lambda : {0.0, 0.2, 0.45})
        for (double x : {-0.07, 0.01, 0.05}) {
            const cd z0 = recenter_cr_singularity(quadric_with_shift(lambda, x));
            EXPECT_NEAR(z0.real(), -x / (1.0 + 2.0 * lambda), 1e-15);
            EXPECT_NEAR(z0.imag(), 0.0, 1e-15);
        }
}

TEST(QuadricNormalization, RotatesNonrealLambdaToReal) {
    const cd L = std::polar(0.25, 0.8);
    NumericSeries F(10);
    F.set(1, 1, 1.0);
    F.set(0, 2, L);
    F.set(2, 0, std::conj(L));
    const QuadricSlice s = normalize_quadric(F, {0.0, 0.0});
    EXPECT_NEAR(s.change.lambda, 0.25, 1e-15);
    EXPECT_NEAR(s.G.coeff(0, 2).imag(), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.G.coeff(2, 0) - s.G.coeff(0, 2)), 0.0, 1e-15);
    EXPECT_NEAR(s.change.theta, 0.4, 1e-15);
}

TEST(QuadricNormalization, VanishingLeviCoefficientIsRejected) {
    NumericSeries F(6);
    F.set(2, 0, 0.3);
    F.set(0, 2, 0.3);
    try {
        (void)normalize_quadric(F, {0.0, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EllipticityViolation);
    }
}

TEST(WeightStage, SolvesTheHomogeneousEquation) {
    // Re B(z, q) must reproduce the prescribed real homogeneous defect
    const double lambda = 0.3;
    const NumericSeries q = quadric_series(lambda, 10);
    for (int m = 3; m <= 6; ++m) {
        NumericSeries defect(10);
        for (int a = 0; a <= m; ++a) {
            const int b = m - a;
            if (a < b) continue;
            const cd c(0.1 * (a + 1), a == b ? 0.0 : 0.05 * b);
            defect.set(a, b, c);
            defect.set(b, a, std::conj(c));
        }
        const WeightedPoly B = solve_weight_stage(lambda, defect, m);
        const NumericSeries reB = real_part(B.compose(q)).homogeneous_part(m);
        EXPECT_LT(max_coeff(reB - defect, 0, 10), 1e-13) << "weight " << m;
    }
}

TEST(WeightStage, ConditionLimitIsEnforced) {
    NumericSeries defect(10);
    defect.set(3, 0, 1.0);
    defect.set(0, 3, 1.0);
    try {
        (void)solve_weight_stage(0.2, defect, 3, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularNormalizationMatrix);
    }
}

TEST(NormalForm, FullPipelineOnRawSeries) {
    const RawDefiningSeries raw = raw_example(std::polar(0.25, 0.8));
    const NormalFormResult nf = normalize(raw, 7);
    ASSERT_EQ(nf.samples.size(), 9u);
    for (std::size_t i = 0; i < nf.samples.size(); ++i) {
        const NumericSeries F = at_parameters(raw.F, nf.samples[i]);
        EXPECT_LT(std::abs(evaluate(F.derivative_zbar(), nf.changes[i].z0)), 1e-12);
        EXPECT_GE(nf.lambda_values[i], 0.0);
        EXPECT_LT(nf.lambda_values[i], 0.5);
        EXPECT_LT(max_coeff(nf.slices[i].K, 0, 6), 1e-10);
        EXPECT_LT(max_coeff(nf.slices[i].P, 0, 2), 1e-12);
    }
    EXPECT_LT(nf.max_low_order_residual, 1e-10);
    EXPECT_LT(nf.round_trip_residual, 1e-12);
    EXPECT_NO_THROW(validate(nf.spec));
    EXPECT_NEAR(nf.spec.lambda.constant_term(), 0.25, 1e-4);
}

TEST(NormalForm, ReplayedChangeMatchesTheSeries) {
    const RawDefiningSeries raw = raw_example(std::polar(0.2, -0.3));
    const NormalFormResult nf = normalize(raw, 7);
    for (std::size_t i = 0; i < nf.samples.size(); i += 4) {
        const NumericSeries F = at_parameters(raw.F, nf.samples[i]);
        const NumericSeries G = nf.changes[i].apply(F);
        const NumericSeries expected =
            quadric_series(nf.slices[i].lambda, G.max_degree()) + nf.slices[i].P + cd(0.0, 1.0) * nf.slices[i].K;
        EXPECT_LT(max_coeff(G - expected, 0, 6), 1e-12);
    }
}

TEST(NormalForm, KillingAQuadricSpecIsTheIdentity) {
    ManifoldSpec spec;
    spec.lambda = ParamPoly::constant(2, 0.2);
    const NormalFormResult nf = kill_imaginary_part(spec, 7);
    EXPECT_NEAR(nf.spec.lambda.constant_term(), 0.2, 1e-15);
    EXPECT_TRUE(nf.spec.K.is_zero());
    EXPECT_TRUE(nf.spec.P.is_zero());
}

TEST(ManifoldValidation, NamesTheOffendingCoefficient) {
    ManifoldSpec spec;
    spec.lambda = ParamPoly::constant(2, 0.2);
    spec.K.set(5, 0, ParamComplex::constant(2, 0.01));
    spec.K.set(0, 5, ParamComplex::constant(2, 0.01));
    try {
        validate(spec);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
        EXPECT_NE(std::string(e.what()).find("K[5,0]"), std::string::npos);
    }
}

TEST(ManifoldValidation, RejectsLambdaAtTheParabolicEdge) {
    ManifoldSpec spec;
    spec.lambda = ParamPoly::constant(2, 0.5);
    EXPECT_THROW(validate(spec), Error);
    spec.lambda = ParamPoly::constant(2, 0.2);
    spec.P.set(3, 0, ParamComplex::constant(2, {0.0, 0.1}));
    EXPECT_THROW(validate(spec), Error);
}

TEST(ManifoldValidation, SampleBallStaysInsideTheBall) {
    for (std::size_t d : {2u, 4u})
        for (const auto& x : sample_ball(d, 0.1)) EXPECT_LE(norm2(x), 0.1 + 1e-15);
    EXPECT_EQ(sample_ball(4, 0.1).size(), 81u);
}
