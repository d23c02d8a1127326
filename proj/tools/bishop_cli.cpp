#include <CLI11.hpp>

#include <bishop/bishop.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using bishop::json;

struct RunConfig {
    std::string command;
    std::string spec_path;
    std::string out_dir = ".";
    std::size_t n_theta = 256;
    double tol = 1e-12;
    double verify_tol = 1e-8;
    std::string r_list = "0.02,0.03,0.045,0.068,0.1";
    std::string x_grid = "origin";
    bool figures = false;
    std::uint64_t seed = 1;
};

std::vector<double> parse_numbers(const std::string& text, char sep, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) bishop::fail(bishop::ErrorCode::InvalidArgument, what + ": cannot read '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<double> parse_r_list(const std::string& text) {
    const std::vector<double> r = parse_numbers(text, ',', "--r-list");
    if (r.empty()) bishop::fail(bishop::ErrorCode::InvalidArgument, "--r-list is empty");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0)) bishop::fail(bishop::ErrorCode::InvalidArgument, "--r-list entries must be positive");
        if (i > 0 && !(r[i] > r[i - 1]))
            bishop::fail(bishop::ErrorCode::InvalidArgument, "--r-list must be strictly increasing");
    }
    return r;
}

// "origin", "h:n" for the tensor grid of n points per axis on [-h, h], or "x1,x2;x1,x2;..."
std::vector<std::vector<double>> parse_x_grid(const std::string& text, std::size_t dim) {
    if (text == "origin") return {std::vector<double>(dim, 0.0)};
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        const std::vector<double> h = parse_numbers(text.substr(0, colon), ',', "--x-grid");
        const std::vector<double> n = parse_numbers(text.substr(colon + 1), ',', "--x-grid");
        if (h.size() != 1 || n.size() != 1 || !(h[0] >= 0.0) || n[0] < 1 || n[0] != static_cast<int>(n[0]))
            bishop::fail(bishop::ErrorCode::InvalidArgument, "--x-grid expects h:n with h >= 0 and n >= 1");
        const int per_axis = static_cast<int>(n[0]);
        std::vector<double> axis(static_cast<std::size_t>(per_axis), 0.0);
        for (int i = 0; i < per_axis && per_axis > 1; ++i)
            axis[static_cast<std::size_t>(i)] = -h[0] + 2.0 * h[0] * i / (per_axis - 1);
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
    std::vector<std::vector<double>> out;
    std::stringstream ss(text);
    std::string point;
    while (std::getline(ss, point, ';')) {
        if (point.empty()) continue;
        std::vector<double> x = parse_numbers(point, ',', "--x-grid");
        if (x.size() != dim)
            bishop::fail(bishop::ErrorCode::ParameterDimensionMismatch,
                         "--x-grid point '" + point + "' has " + std::to_string(x.size()) + " entries, expected " +
                             std::to_string(dim));
        out.push_back(std::move(x));
    }
    if (out.empty()) bishop::fail(bishop::ErrorCode::InvalidArgument, "--x-grid is empty");
    return out;
}

void check_config(const RunConfig& c) {
    if (c.n_theta < 64 || (c.n_theta & (c.n_theta - 1)) != 0)
        bishop::fail(bishop::ErrorCode::InvalidArgument, "--ntheta must be a power of two >= 64");
    if (!(c.tol > 0.0)) bishop::fail(bishop::ErrorCode::InvalidArgument, "--tol must be positive");
    parse_r_list(c.r_list);
}

json config_json(const RunConfig& c) {
    return json{{"command", c.command},       {"spec", c.spec_path},   {"out", c.out_dir},
                {"ntheta", c.n_theta},        {"tol", c.tol},          {"verifyTol", c.verify_tol},
                {"rList", parse_r_list(c.r_list)}, {"xGrid", c.x_grid}, {"figures", c.figures},
                {"seed", c.seed}};
}

bishop::SweepOptions sweep_options(const RunConfig& c) {
    bishop::SweepOptions o;
    o.slice.geometry.trace.n_theta = c.n_theta;
    o.slice.solver.tol = c.tol;
    o.threads = std::max(1u, std::thread::hardware_concurrency());
    return o;
}

std::string path_in(const RunConfig& c, const std::string& name) {
    return (std::filesystem::path(c.out_dir) / name).string();
}

void write_report(const RunConfig& c, json result) {
    json doc{{"version", bishop::kVersion}, {"config", config_json(c)}, {"result", std::move(result)}};
    bishop::write_text(path_in(c, "report.json"), doc.dump(2) + "\n");
}

void write_figures(const RunConfig& c, const bishop::FamilyReport& rep, const std::vector<std::vector<double>>& xs) {
    if (!c.figures) return;
    for (std::size_t i = 0; i < xs.size(); ++i)
        bishop::write_text(path_in(c, "curves_" + std::to_string(i) + ".svg"), bishop::nested_curves_svg(rep, xs[i]));
}

int run_normalize(const RunConfig& c) {
    const json doc = bishop::load_json(c.spec_path);
    int order = 7;
    if (doc.contains("l")) order = bishop::io_detail::integer(doc["l"], "l");
    bishop::NormalFormResult nf;
    if (bishop::is_raw_spec(doc)) {
        nf = bishop::normalize(bishop::raw_spec_from_json(doc), order);
    } else {
        const bishop::ManifoldSpec spec = bishop::manifold_spec_from_json(doc);
        bishop::validate(spec);
        nf = bishop::kill_imaginary_part(spec, order);
    }
    bishop::write_text(path_in(c, "normalized.json"), bishop::manifold_spec_to_json(nf.spec).dump(2) + "\n");
    write_report(c, bishop::normal_form_to_json(nf));
    std::cout << "normalized to order " << order << ", lambda(0) = " << nf.spec.lambda.coefficient(bishop::MultiIndex(nf.spec.param_dim(), 0))
              << ", largest residual below order " << nf.max_low_order_residual << "\n";
    return 0;
}

int run_curve(const RunConfig& c) {
    const bishop::ManifoldSpec spec = bishop::load_manifold_spec(c.spec_path);
    const auto xs = parse_x_grid(c.x_grid, spec.param_dim());
    const auto rs = parse_r_list(c.r_list);
    const bishop::SweepOptions o = sweep_options(c);
    json slices = json::array(), failures = json::array();
    bishop::FamilyReport figure;
    for (const auto& X : xs)
        for (double r : rs) {
            const bishop::SliceParams slice{X, r};
            try {
                if (bishop::norm2(X) > spec.validity_radius)
                    bishop::fail(bishop::ErrorCode::ValidityEscape, "slice parameter outside the validity radius");
                const bishop::SliceGeometry g = bishop::make_slice_geometry(spec, slice, o.slice.geometry);
                bishop::SliceModel flat = g.model;
                flat.P = bishop::NumericSeries(flat.P.max_degree());
                flat.qP = bishop::quadric_series(flat.lambda, flat.qP.max_degree());
                const bishop::SliceGeometry q = bishop::make_slice_geometry(flat, slice, o.slice.geometry);
                const auto probe = bishop::norm_probe(bishop::HilbertOperator(g), bishop::HilbertOperator(q), 1, 8, c.seed);
                slices.push_back(json{{"X", X},
                                      {"r", r},
                                      {"lambda", g.model.lambda},
                                      {"curveResidual", g.curve.max_residual},
                                      {"nodeResidual", g.node_residual},
                                      {"sigmaPrime0", g.map.derivative_at_zero},
                                      {"mapGrid", g.map.size()},
                                      {"mapResidual", g.map.residual},
                                      {"hilbertProbe", {{"ratio", probe.ratio}, {"trials", probe.trials}, {"seed", probe.seed}}}});
                bishop::SliceReport s;
                s.slice = slice;
                s.converged = true;
                s.curve_radius = g.curve.radius;
                figure.slices.push_back(std::move(s));
            } catch (const bishop::Error& e) {
                failures.push_back(json{{"X", X}, {"r", r}, {"code", std::string(bishop::to_string(e.code()))}, {"message", e.what()}});
            }
        }
    write_report(c, json{{"slices", slices}, {"failures", failures}});
    write_figures(c, figure, xs);
    std::cout << slices.size() << " curves traced, " << failures.size() << " failures\n";
    return 0;
}

bishop::FamilyReport run_family(const RunConfig& c, bool full, std::vector<std::vector<double>>& xs) {
    const bishop::ManifoldSpec spec = bishop::load_manifold_spec(c.spec_path);
    xs = parse_x_grid(c.x_grid, spec.param_dim());
    bishop::SweepOptions o = sweep_options(c);
    o.derivative_fits = full;
    o.jacobian = full;
    return bishop::sweep(spec, xs, parse_r_list(c.r_list), o);
}

void print_summary(const bishop::FamilyReport& rep) {
    std::size_t ok = 0;
    for (const auto& s : rep.slices) ok += s.converged ? 1 : 0;
    std::cout << ok << "/" << rep.slices.size() << " slices converged";
    for (const auto& f : rep.rate_fits)
        if (std::isfinite(f.slope_u)) {
            std::cout << ", slope of |U| " << f.slope_u;
            break;
        }
    std::cout << "\n";
}

int run_disc_or_sweep(const RunConfig& c, bool full) {
    std::vector<std::vector<double>> xs;
    const bishop::FamilyReport rep = run_family(c, full, xs);
    write_report(c, bishop::family_report_to_json(rep));
    bishop::write_text(path_in(c, "report.csv"), bishop::family_report_csv(rep));
    write_figures(c, rep, xs);
    print_summary(rep);
    return 0;
}

int run_verify(const RunConfig& c) {
    std::vector<std::vector<double>> xs;
    const bishop::FamilyReport rep = run_family(c, true, xs);
    double boundary = 0.0, cr = 0.0, overlap = 0.0, jac_small = 0.0;
    for (const auto& s : rep.slices) {
        boundary = std::max(boundary, s.boundary_residual);
        cr = std::max(cr, s.cr_residual);
        overlap = std::max(overlap, s.overlap_agreement);
    }
    if (!rep.jacobian.defect.empty()) jac_small = rep.jacobian.defect.front();
    const bool disjoint = rep.min_disjoint_distance > 0.0 || rep.slices.size() < 2;
    const json checks{{"allConverged", rep.all_converged()},
                      {"boundaryResidual", boundary < c.verify_tol},
                      {"cauchyRiemann", cr < c.verify_tol},
                      {"overlapAgreement", overlap < c.verify_tol},
                      {"nested", rep.nested},
                      {"disjoint", disjoint && rep.separation_ok},
                      {"jacobian", std::isfinite(jac_small) && jac_small < 0.05}};
    bool pass = true;
    for (const auto& [name, ok] : checks.items()) pass = pass && ok.get<bool>();
    json result = bishop::family_report_to_json(rep);
    result["checks"] = checks;
    result["passed"] = pass;
    write_report(c, result);
    bishop::write_text(path_in(c, "report.csv"), bishop::family_report_csv(rep));
    write_figures(c, rep, xs);
    print_summary(rep);
    for (const auto& [name, ok] : checks.items()) std::cout << (ok.get<bool>() ? "PASS " : "FAIL ") << name << "\n";
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytic discs attached to a real codimension-2 submanifold near an elliptic CR singularity"};
    app.set_version_flag("--version", std::string(bishop::kVersion));
    app.require_subcommand(1);
    RunConfig cfg;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", cfg.spec_path, "manifold spec (JSON)")->required();
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--ntheta", cfg.n_theta, "polar samples per curve, a power of two >= 64");
        sub->add_option("--tol", cfg.tol, "solver tolerance relative to r^2");
        sub->add_option("--r-list", cfg.r_list, "strictly increasing radii, comma separated");
        sub->add_option("--x-grid", cfg.x_grid, "'origin', 'h:n' or 'x1,x2;x1,x2;...'");
        sub->add_flag("--figures", cfg.figures, "write SVG figures of the boundary curves");
        sub->add_option("--seed", cfg.seed, "seed of the randomized probes");
    };
    const std::vector<std::pair<std::string, std::string>> commands{
        {"normalize", "bring a raw defining series to normal form"},
        {"curve", "trace slice curves and their Riemann maps"},
        {"disc", "solve and assemble the attached discs"},
        {"sweep", "sweep the family with rate fits, disjointness and jacobian"},
        {"verify", "sweep and check the geometric invariants"}};
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    cfg.command = app.get_subcommands().front()->get_name();

    try {
        check_config(cfg);
        std::filesystem::create_directories(cfg.out_dir);
        if (cfg.command == "normalize") return run_normalize(cfg);
        if (cfg.command == "curve") return run_curve(cfg);
        if (cfg.command == "disc") return run_disc_or_sweep(cfg, false);
        if (cfg.command == "sweep") return run_disc_or_sweep(cfg, true);
        return run_verify(cfg);
    } catch (const bishop::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
