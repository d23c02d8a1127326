#include <gtest/gtest.h>

#include <bishop/family.hpp>
#include <bishop/io.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

using namespace bishop;

namespace {

std::string path(const char* name) { return std::string(BISHOP_SPEC_DIR) + "/" + name; }

Error error_from(const std::string& text) {
    try {
        (void)parse_manifold_spec(text, "inline");
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "spec accepted: " << text;
    return Error(ErrorCode::InvalidArgument, "");
}

}  // namespace

TEST(SpecIo, RoundTripPreservesEverything) {
    const ManifoldSpec s = load_manifold_spec(path("perturbed.json"));
    EXPECT_EQ(s.N, 2);
    EXPECT_EQ(s.l, 7);
    EXPECT_DOUBLE_EQ(s.validity_radius, 0.1);
    const json first = manifold_spec_to_json(s);
    const ManifoldSpec back = parse_manifold_spec(first.dump(), "round trip");
    EXPECT_EQ(manifold_spec_to_json(back), first);

    const std::vector<double> X{0.03, -0.04};
    EXPECT_DOUBLE_EQ(back.lambda.evaluate(X), 0.2 + 0.05 * -0.04);
    const NumericSeries K = at_parameters(back.K, X), P = at_parameters(back.P, X);
    EXPECT_EQ(K.coeff(7, 0), cd(0.025, 0.0));
    EXPECT_EQ(P.coeff(0, 3), cd(0.05, 0.0));
}

TEST(SpecIo, SchemaViolationsNameTheOffendingCoefficient) {
    try {
        (void)load_manifold_spec(path("malformed_k5.json"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
        EXPECT_NE(std::string(e.what()).find("K[5,0]"), std::string::npos) << e.what();
    }
    EXPECT_EQ(error_from(R"({"N": 2, "l": 7})").code(), ErrorCode::SchemaViolation);
    EXPECT_EQ(error_from(R"({"N": 2, "l": 7, "lambda": "big"})").code(), ErrorCode::SchemaViolation);
    EXPECT_EQ(error_from(R"({"N": 2, "l": 7, "lambda": 0.2, "K": [[7, 0, 0.1]]})").code(),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(error_from(R"({"N": 2, "l": 7, "lambda": 0.2, "K": [[30, 0, 0.1, 0]]})").code(),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(error_from(R"({"N": 1, "l": 7, "lambda": 0.2})").code(), ErrorCode::SchemaViolation);
}

TEST(SpecIo, ParseErrorsAndDimensions) {
    EXPECT_EQ(error_from("{\"N\": 2,").code(), ErrorCode::SpecParseError);
    try {
        (void)load_manifold_spec(path("does_not_exist.json"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SpecParseError);
    }
    EXPECT_EQ(error_from(R"({"N": 2, "l": 7, "lambda": [[[0, 0, 1], 0.2]]})").code(),
              ErrorCode::ParameterDimensionMismatch);
}

TEST(SpecIo, RawSpecsNeedNormalization) {
    const std::string text = io_detail::read_file(path("raw_example.json"));
    const Error e = error_from(text);
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_NE(std::string(e.what()).find("normalize"), std::string::npos);

    const json doc = load_json(path("raw_example.json"));
    ASSERT_TRUE(is_raw_spec(doc));
    const RawDefiningSeries raw = raw_spec_from_json(doc);
    EXPECT_EQ(raw.N, 2);
    const NumericSeries F = at_parameters(raw.F, std::vector<double>{0.0, 0.0});
    EXPECT_EQ(F.coeff(1, 1), cd(1.0, 0.0));
    EXPECT_NEAR(std::abs(F.coeff(0, 2)), 0.25, 1e-4);
}

TEST(ReportIo, CsvLayoutAndMissingValues) {
    FamilyReport rep;
    SliceReport a;
    a.slice = {{0.01, 0.0}, 0.05};
    a.converged = true;
    a.iterations = 12;
    a.norm_u = 2.5e-7;
    a.residual = 1e-18;
    a.slope_u = 5.0;
    SliceReport b = a;
    b.converged = false;
    rep.slices = {a, b};
    const std::string csv = family_report_csv(rep);
    const std::string header = csv.substr(0, csv.find('\n'));
    EXPECT_EQ(header, "X1,X2,r,iterations,normU,residual,slopeU,slopeDrU,minDisjointDistance,jacobianDefect");
    const std::string second = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
    // full precision: the r cell reads back to the same double
    const std::size_t c2 = second.find(',', second.find(',') + 1);
    EXPECT_EQ(std::stod(second.substr(c2 + 1, second.find(',', c2 + 1) - c2 - 1)), 0.05);
    EXPECT_NE(csv.find(",12,,,5,,,\n"), std::string::npos) << csv;

    const json j = family_report_to_json(rep);
    EXPECT_TRUE(j["slices"][0]["normDrU"].is_null());
    EXPECT_TRUE(j["slices"][0]["jacobianDefect"].is_null());
    EXPECT_DOUBLE_EQ(j["slices"][0]["normU"].get<double>(), 2.5e-7);
    EXPECT_FALSE(j["allConverged"].get<bool>());
    EXPECT_NE(j.dump().find("null"), std::string::npos);
    EXPECT_EQ(j.dump().find("NaN"), std::string::npos);
}

TEST(ReportIo, SvgHasOnePolygonPerRadius) {
    FamilyReport rep;
    for (double r : {0.03, 0.06}) {
        SliceReport s;
        s.slice = {{0.0, 0.0}, r};
        s.converged = true;
        s.curve_radius.assign(16, r);
        rep.slices.push_back(s);
    }
    const std::string svg = nested_curves_svg(rep, {0.0, 0.0});
    std::size_t count = 0;
    for (std::size_t p = svg.find("<polygon"); p != std::string::npos; p = svg.find("<polygon", p + 1)) ++count;
    EXPECT_EQ(count, 2u);
    EXPECT_EQ(nested_curves_svg(rep, {1.0, 0.0}).find("<polygon"), std::string::npos);
}
