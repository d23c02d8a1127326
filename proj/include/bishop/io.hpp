#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bidegree_series.hpp"
#include "error.hpp"
#include "family.hpp"
#include "manifold.hpp"
#include "normal_form.hpp"
#include "param_poly.hpp"

namespace bishop {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::json;

namespace io_detail {

[[noreturn]] inline void schema(const std::string& msg) { fail(ErrorCode::SchemaViolation, msg); }

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) schema(where + " must be a number");
    return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) schema(where + " must be an integer");
    return j.get<int>();
}

/// Largest total degree of the multi-indices in a ParamPoly literal (0 for numbers).
inline int poly_degree(const json& j) {
    if (!j.is_array()) return 0;
    int best = 0;
    for (const auto& term : j) {
        if (!term.is_array() || term.empty() || !term[0].is_array()) continue;
        int s = 0;
        for (const auto& e : term[0])
            if (e.is_number_integer()) s += e.get<int>();
        best = std::max(best, s);
    }
    return best;
}

}  // namespace io_detail

/// ParamPoly from either a plain number or a list of [multi-index, coefficient] pairs.
inline ParamPoly param_poly_from_json(const json& j, std::size_t dim, int bound, const std::string& where) {
    ParamPoly p(dim, bound);
    if (j.is_number()) {
        p.set(MultiIndex(dim, 0), j.get<double>());
        return p;
    }
    if (!j.is_array()) io_detail::schema(where + " must be a number or a list of [multi-index, coefficient]");
    for (std::size_t t = 0; t < j.size(); ++t) {
        const json& term = j[t];
        const std::string at = where + "[" + std::to_string(t) + "]";
        if (!term.is_array() || term.size() != 2 || !term[0].is_array())
            io_detail::schema(at + " must be [multi-index, coefficient]");
        if (term[0].size() != dim)
            fail(ErrorCode::ParameterDimensionMismatch, at + " has a multi-index of length " +
                                                            std::to_string(term[0].size()) + ", expected " +
                                                            std::to_string(dim));
        MultiIndex a(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            a[i] = io_detail::integer(term[0][i], at + " exponent");
            if (a[i] < 0) io_detail::schema(at + " has a negative exponent");
        }
        p.set(a, p.coefficient(a) + io_detail::number(term[1], at + " coefficient"));
    }
    return p;
}

inline json param_poly_to_json(const ParamPoly& p) {
    json out = json::array();
    for (const auto& [a, c] : p.terms()) out.push_back(json::array({a, c}));
    return out;
}

/// Series from a list of [j, k, re, im] entries, re and im being ParamPoly literals.
inline ParamSeries series_from_json(const json& j, std::size_t dim, int max_degree, int bound, const std::string& name) {
    ParamSeries s(max_degree, dim);
    if (!j.is_array()) io_detail::schema(name + " must be a list of [j, k, re, im] entries");
    for (std::size_t t = 0; t < j.size(); ++t) {
        const json& e = j[t];
        const std::string at = name + "[" + std::to_string(t) + "]";
        if (!e.is_array() || e.size() != 4) io_detail::schema(at + " must be [j, k, re, im]");
        const int a = io_detail::integer(e[0], at + " j"), b = io_detail::integer(e[1], at + " k");
        if (a < 0 || b < 0) io_detail::schema(at + " has a negative exponent");
        if (a + b > max_degree)
            io_detail::schema(coeff_name(name.c_str(), a, b) + " exceeds the truncation degree " +
                              std::to_string(max_degree));
        ParamComplex c(param_poly_from_json(e[2], dim, bound, at + " re"),
                       param_poly_from_json(e[3], dim, bound, at + " im"));
        s.add(a, b, c);
    }
    return s;
}

inline json series_to_json(const ParamSeries& s) {
    json out = json::array();
    s.for_each_nonzero([&](int j, int k, const ParamComplex& c) {
        out.push_back(json::array({j, k, param_poly_to_json(c.re), param_poly_to_json(c.im)}));
    });
    return out;
}

namespace io_detail {

inline int bound_for(const json& doc, std::initializer_list<const char*> fields) {
    int bound = ParamPoly::kDefaultDegreeBound;
    if (doc.contains("paramDegree")) bound = integer(doc["paramDegree"], "paramDegree");
    for (const char* f : fields) {
        if (!doc.contains(f)) continue;
        const json& v = doc[f];
        if (std::string(f) == "lambda") {
            bound = std::max(bound, poly_degree(v));
            continue;
        }
        if (!v.is_array()) continue;
        for (const auto& e : v)
            if (e.is_array() && e.size() == 4) bound = std::max({bound, poly_degree(e[2]), poly_degree(e[3])});
    }
    return bound;
}

inline json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::SpecParseError, origin + ": " + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::SpecParseError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace io_detail

inline bool is_raw_spec(const json& doc) { return doc.is_object() && doc.contains("F"); }

inline ManifoldSpec manifold_spec_from_json(const json& doc) {
    if (!doc.is_object()) io_detail::schema("spec must be a JSON object");
    for (const char* f : {"N", "l", "lambda"})
        if (!doc.contains(f)) io_detail::schema(std::string("missing field ") + f);
    ManifoldSpec s;
    s.N = io_detail::integer(doc["N"], "N");
    s.l = io_detail::integer(doc["l"], "l");
    if (s.N < 2) io_detail::schema("N must be at least 2");
    const std::size_t d = s.param_dim();
    const int max_degree = doc.contains("maxDegree") ? io_detail::integer(doc["maxDegree"], "maxDegree")
                                                     : std::max(NumericSeries::kDefaultMaxDegree, s.l + 3);
    const int bound = io_detail::bound_for(doc, {"lambda", "P", "K"});
    s.lambda = param_poly_from_json(doc["lambda"], d, bound, "lambda");
    s.P = doc.contains("P") ? series_from_json(doc["P"], d, max_degree, bound, "P") : ParamSeries(max_degree, d);
    s.K = doc.contains("K") ? series_from_json(doc["K"], d, max_degree, bound, "K") : ParamSeries(max_degree, d);
    if (doc.contains("validityRadius")) s.validity_radius = io_detail::number(doc["validityRadius"], "validityRadius");
    return s;
}

inline RawDefiningSeries raw_spec_from_json(const json& doc) {
    if (!doc.is_object()) io_detail::schema("spec must be a JSON object");
    if (!doc.contains("N")) io_detail::schema("missing field N");
    RawDefiningSeries raw;
    raw.N = io_detail::integer(doc["N"], "N");
    if (raw.N < 2) io_detail::schema("N must be at least 2");
    const int max_degree = doc.contains("maxDegree") ? io_detail::integer(doc["maxDegree"], "maxDegree")
                                                     : NumericSeries::kDefaultMaxDegree;
    raw.F = series_from_json(doc["F"], raw.param_dim(), max_degree, io_detail::bound_for(doc, {"F"}), "F");
    if (doc.contains("validityRadius")) raw.validity_radius = io_detail::number(doc["validityRadius"], "validityRadius");
    return raw;
}

inline json manifold_spec_to_json(const ManifoldSpec& s) {
    return json{{"N", s.N},
                {"l", s.l},
                {"lambda", param_poly_to_json(s.lambda)},
                {"P", series_to_json(s.P)},
                {"K", series_to_json(s.K)},
                {"validityRadius", s.validity_radius},
                {"maxDegree", s.K.max_degree()},
                {"paramDegree", s.lambda.degree_bound()}};
}

/// Parse and validate a normalized spec. Any validation failure is reported as a schema violation.
inline ManifoldSpec parse_manifold_spec(const std::string& text, const std::string& origin = "spec") {
    const json doc = io_detail::parse_text(text, origin);
    if (is_raw_spec(doc)) io_detail::schema(origin + " holds a raw defining series; run normalize first");
    ManifoldSpec s = manifold_spec_from_json(doc);
    try {
        validate(s);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaViolation) throw;
        fail(ErrorCode::SchemaViolation, std::string(e.what()));
    }
    return s;
}

inline ManifoldSpec load_manifold_spec(const std::string& path) {
    return parse_manifold_spec(io_detail::read_file(path), path);
}

inline json load_json(const std::string& path) { return io_detail::parse_text(io_detail::read_file(path), path); }

// ---------------------------------------------------------------------------------------------
// reports

namespace io_detail {

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json slice_params(const SliceParams& s) { return json{{"X", s.X}, {"r", s.r}}; }

inline json failure(const FailureRecord& f) {
    return json{{"slice", slice_params(f.slice)}, {"code", f.code}, {"message", f.message}};
}

}  // namespace io_detail

inline json slice_report_to_json(const SliceReport& s) {
    using io_detail::num;
    json j{{"X", s.slice.X},
           {"r", s.slice.r},
           {"converged", s.converged},
           {"iterations", s.iterations},
           {"normU", num(s.norm_u)},
           {"normDrU", num(s.norm_dr_u)},
           {"residual", num(s.residual)},
           {"contractionRatio", num(s.contraction_ratio)},
           {"contractionFlag", s.contraction_flag},
           {"attachmentResidual", num(s.attachment_residual)},
           {"boundaryResidual", num(s.boundary_residual)},
           {"cauchyRiemannResidual", num(s.cr_residual)},
           {"overlapAgreement", num(s.overlap_agreement)},
           {"centerHeightError", num(s.center_height_error)},
           {"holomorphicDefect", num(s.holomorphic_defect)},
           {"curveResidual", num(s.curve_residual)},
           {"sigmaPrime0", num(s.sigma_prime)},
           {"mapGrid", s.map_grid},
           {"slopeU", num(s.slope_u)},
           {"slopeDrU", num(s.slope_dr_u)},
           {"minDisjointDistance", num(s.min_disjoint_distance)},
           {"jacobianDefect", num(s.jacobian_defect)}};
    if (s.failure) j["failure"] = io_detail::failure(*s.failure);
    return j;
}

inline json family_report_to_json(const FamilyReport& r) {
    using io_detail::num;
    json slices = json::array();
    for (const auto& s : r.slices) slices.push_back(slice_report_to_json(s));
    json fits = json::array();
    for (const auto& f : r.rate_fits)
        fits.push_back(json{{"X", f.X}, {"points", f.points}, {"slopeU", num(f.slope_u)}, {"slopeDrU", num(f.slope_dr_u)}});
    json jd = json::array();
    for (double v : r.jacobian.defect) jd.push_back(num(v));
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back(io_detail::failure(f));
    return json{{"slices", slices},
                {"rateFits", fits},
                {"disjointness",
                 {{"minDistance", num(r.min_disjoint_distance)},
                  {"minSameXSeparationRatio", num(r.min_separation_ratio)},
                  {"separationOk", r.separation_ok}}},
                {"nested", r.nested},
                {"jacobian", {{"X", r.jacobian.X}, {"r", r.jacobian.r}, {"defect", jd}, {"decreasing", r.jacobian.decreasing}}},
                {"failures", failures},
                {"allConverged", r.all_converged()}};
}

inline json normal_form_to_json(const NormalFormResult& nf) {
    using io_detail::num;
    json changes = json::array();
    for (const auto& c : nf.changes)
        changes.push_back(json{{"X", c.X},
                               {"z0", {c.z0.real(), c.z0.imag()}},
                               {"theta", c.theta},
                               {"lambda", c.lambda},
                               {"maxCondition", num(c.max_condition)}});
    return json{{"spec", manifold_spec_to_json(nf.spec)},
                {"samples", nf.samples},
                {"lambdaValues", nf.lambda_values},
                {"lambdaContinuity", num(nf.lambda_continuity)},
                {"maxCondition", num(nf.max_condition)},
                {"maxLowOrderResidual", num(nf.max_low_order_residual)},
                {"maxChopped", num(nf.max_chopped)},
                {"maxFitResidual", num(nf.max_fit_residual)},
                {"roundTripResidual", num(nf.round_trip_residual)},
                {"validRadius", num(nf.valid_radius)},
                {"changes", changes}};
}

/// Fixed CSV layout: X_1..X_d, r, iterations, normU, residual, slopeU, slopeDrU, minDisjointDistance, jacobianDefect.
inline std::string family_report_csv(const FamilyReport& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    const std::size_t d = r.slices.empty() ? 0 : r.slices.front().slice.X.size();
    for (std::size_t i = 0; i < d; ++i) os << "X" << (i + 1) << ',';
    os << "r,iterations,normU,residual,slopeU,slopeDrU,minDisjointDistance,jacobianDefect\n";
    const auto cell = [&](double v) {
        if (std::isfinite(v)) os << v;
    };
    for (const auto& s : r.slices) {
        for (double x : s.slice.X) os << x << ',';
        os << s.slice.r << ',' << s.iterations << ',';
        cell(s.converged ? s.norm_u : NAN);
        os << ',';
        cell(s.converged ? s.residual : NAN);
        os << ',';
        cell(s.slope_u);
        os << ',';
        cell(s.slope_dr_u);
        os << ',';
        cell(s.min_disjoint_distance);
        os << ',';
        cell(s.jacobian_defect);
        os << '\n';
    }
    return os.str();
}

/// Nested boundary curves of the slices with the given X, one polyline per r.
inline std::string nested_curves_svg(const FamilyReport& r, const std::vector<double>& X, double size = 480.0) {
    std::vector<const SliceReport*> rows;
    double extent = 0.0;
    for (const auto& s : r.slices)
        if (s.slice.X == X && s.converged && !s.curve_radius.empty()) {
            rows.push_back(&s);
            for (double v : s.curve_radius) extent = std::max(extent, v);
        }
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
       << size << ' ' << size << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const double scale = extent > 0.0 ? 0.45 * size / extent : 1.0, c = 0.5 * size;
    for (const SliceReport* s : rows) {
        const std::size_t n = s->curve_radius.size();
        os << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1\" data-r=\"" << s->slice.r << "\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            const double th = spectral::node(i, n), rho = s->curve_radius[i];
            os << c + scale * rho * std::cos(th) << ',' << c - scale * rho * std::sin(th) << (i + 1 < n ? " " : "");
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path);
    out << text;
}

}  // namespace bishop
