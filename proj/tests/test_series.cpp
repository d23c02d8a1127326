#include <gtest/gtest.h>

#include <bishop/bidegree_series.hpp>
#include <bishop/manifold.hpp>
#include <bishop/param_poly.hpp>

#include <cmath>
#include <complex>
#include <vector>

using namespace bishop;

namespace {

NumericSeries monomial(int j, int k, cd c = 1.0, int D = 10) {
    NumericSeries s(D);
    s.set(j, k, c);
    return s;
}

cd direct(const NumericSeries& s, cd z) {
    cd acc = 0.0;
    s.for_each_nonzero([&](int j, int k, const cd& c) { acc += c * std::pow(z, j) * std::pow(std::conj(z), k); });
    return acc;
}

}  // namespace

TEST(ParamPoly, ExactProductAndTruncation) {
    const ParamPoly x = ParamPoly::variable(2, 0), one = ParamPoly::constant(2, 1.0);
    ParamPoly a = one + x, b = one - x;
    const ParamPoly p = a * b;
    EXPECT_EQ(p.coefficient({0, 0}), 1.0);
    EXPECT_EQ(p.coefficient({1, 0}), 0.0);
    EXPECT_EQ(p.coefficient({2, 0}), -1.0);
    EXPECT_EQ(p.degree(), 2);
    // degree bound 2: the cubic part of (1 + x)^3 is dropped
    const ParamPoly c = p * a;
    EXPECT_EQ(c.degree(), 2);
    EXPECT_EQ(c.coefficient({1, 0}), 1.0);
}

TEST(ParamPoly, EvaluateAndFit) {
    ParamPoly p(2);
    p.set({0, 0}, 0.2);
    p.set({0, 1}, 0.05);
    p.set({1, 1}, -0.5);
    const std::vector<double> x{0.1, -0.2};
    EXPECT_DOUBLE_EQ(p.evaluate(x), 0.2 + 0.05 * -0.2 - 0.5 * 0.1 * -0.2);

    const auto pts = sample_ball(2, 0.1);
    std::vector<double> v;
    for (const auto& q : pts) v.push_back(p.evaluate(q));
    const ParamPoly f = fit_param_poly(pts, v, 2);
    for (const auto& [a, coeff] : p.terms()) EXPECT_NEAR(f.coefficient(a), coeff, 1e-12);
}

TEST(ParamPoly, DimensionMismatchIsReported) {
    const ParamPoly a(2), b(3);
    try {
        (void)(a + b);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParameterDimensionMismatch);
    }
}

TEST(BidegreeSeries, ProductOfMonomials) {
    const NumericSeries p = monomial(1, 0) * monomial(0, 1);
    EXPECT_EQ(p.coeff(1, 1), cd(1.0));
    EXPECT_EQ(p.min_degree(), 2);
    // terms beyond the truncation degree vanish
    const NumericSeries hi = monomial(6, 0) * monomial(0, 5);
    EXPECT_TRUE(hi.is_zero());
}

TEST(BidegreeSeries, HornerMatchesDirectSum) {
    NumericSeries s(8);
    s.set(0, 0, {0.3, -0.1});
    s.set(2, 1, {1.5, 0.25});
    s.set(1, 4, {-0.7, 0.0});
    s.set(8, 0, {0.01, 0.02});
    s.set(3, 3, {2.0, 1.0});
    for (cd z : {cd(0.3, 0.2), cd(-0.6, 0.1), cd(0.0, -0.9)})
        EXPECT_LT(std::abs(evaluate(s, z) - direct(s, z)), 1e-14);
}

TEST(BidegreeSeries, WirtingerDerivatives) {
    const NumericSeries s = monomial(2, 3, cd(0.5, 1.0));
    const NumericSeries dz = s.derivative_z(), dzb = s.derivative_zbar();
    EXPECT_EQ(dz.coeff(1, 3), cd(1.0, 2.0));
    EXPECT_EQ(dzb.coeff(2, 2), cd(1.5, 3.0));
    EXPECT_TRUE(monomial(0, 3).derivative_z().is_zero());
}

TEST(BidegreeSeries, RealityAndConjugation) {
    NumericSeries s(6);
    s.set(2, 1, {0.3, 0.4});
    s.set(1, 2, {0.3, -0.4});
    EXPECT_TRUE(s.is_real());
    s.set(3, 0, {0.0, 1.0});
    EXPECT_FALSE(s.is_real());
    const NumericSeries c = s.conjugate();
    EXPECT_EQ(c.coeff(0, 3), cd(0.0, -1.0));
    const cd z(0.2, -0.3);
    EXPECT_LT(std::abs(evaluate(c, z) - std::conj(evaluate(s, z))), 1e-15);
    const NumericSeries re = real_part(s), im = imag_part(s);
    EXPECT_LT(std::abs(evaluate(re, z) - evaluate(s, z).real()), 1e-15);
    EXPECT_LT(std::abs(evaluate(im, z) - evaluate(s, z).imag()), 1e-15);
}

TEST(BidegreeSeries, TranslateAndRotateAreSubstitutions) {
    NumericSeries s(7);
    s.set(1, 1, 1.0);
    s.set(2, 0, 0.2);
    s.set(0, 2, 0.2);
    s.set(3, 2, {0.1, -0.3});
    s.set(7, 0, {0.0, 0.05});
    const cd z0(0.05, -0.02), z(0.1, 0.07);
    EXPECT_LT(std::abs(evaluate(translate(s, z0), z) - evaluate(s, z + z0)), 1e-15);
    const double th = 0.37;
    EXPECT_LT(std::abs(evaluate(rotate(s, th), z) - evaluate(s, std::polar(1.0, th) * z)), 1e-15);
}

TEST(BidegreeSeries, ParameterFreezing) {
    ParamSeries s(6, 2);
    ParamComplex c{ParamPoly::variable(2, 1), ParamPoly::constant(2, 0.5)};
    s.set(3, 0, c);
    s.set(0, 3, conj(c));
    const std::vector<double> x{0.0, 0.02};
    const NumericSeries f = at_parameters(s, x);
    EXPECT_EQ(f.coeff(3, 0), cd(0.02, 0.5));
    EXPECT_EQ(f.coeff(0, 3), cd(0.02, -0.5));
    const std::vector<double> bad{0.1};
    EXPECT_THROW((void)at_parameters(s, bad), Error);
}

TEST(BidegreeSeries, OutOfRangeIndexIsRejected) {
    NumericSeries s(4);
    s.set(3, 2, 1.0);  // beyond the truncation: dropped
    EXPECT_TRUE(s.is_zero());
    EXPECT_THROW((void)s.coeff(3, 2), Error);
    EXPECT_THROW(s.set(-1, 2, 1.0), Error);
    EXPECT_THROW(NumericSeries(-1), Error);
}
