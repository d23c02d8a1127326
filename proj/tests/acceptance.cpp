#include <bishop/bishop.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

using namespace bishop;

namespace {

// sigma'(0) of the Riemann map onto x^2 (1 + 2 lambda) + y^2 (1 - 2 lambda) < 1, obtained from the
// Jacobi sn closed form in 30-digit arithmetic before any of the numerics here existed.
const std::pair<double, double> kEllipseDerivative[] = {
    {0.2, 0.980611994769528959},
    {0.25, 0.970260322657593421},
    {0.3, 0.958171274026691069},
};

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Clock {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

SliceModel flat_model(double lambda) {
    return make_slice_model({0.0, 0.0}, lambda, NumericSeries(10), NumericSeries(10));
}

ManifoldSpec spec_file(const char* name) { return load_manifold_spec(std::string(BISHOP_SPEC_DIR) + "/" + name); }

Outcome quadric_trivialization() {
    Clock clock;
    double worst_u = 0.0, worst_d = 0.0, worst_c = 0.0, worst_disc = 0.0, worst_boundary = 0.0;
    bool converged = true;
    for (double lambda : {0.0, 0.2, 0.3, 0.45})
        for (double r : {0.05, 0.1}) {
            const SliceResult s = solve_slice(flat_model(lambda), {{0.0, 0.0}, r});
            const SliceOperators op = build_slice_operators(s.geometry);
            converged = converged && s.solution.converged;
            worst_u = std::max(worst_u, s.solution.norm_u);
            worst_d = std::max(worst_d, op.d_deviation);
            for (const cd& c : op.C) worst_c = std::max(worst_c, std::abs(c - 2.0));
            const AttachedDisc& d = s.disc;
            for (std::size_t j = 0; j < d.ring_count(); ++j) {
                for (std::size_t k = 0; k < d.n_angles; k += 8) {
                    const cd z = r * s.geometry.map(d.zeta(j, k));
                    const std::size_t i = j * d.n_angles + k;
                    worst_disc = std::max(worst_disc, std::abs(d.z_values[i] - z) / r);
                    worst_disc = std::max(worst_disc, std::abs(d.w_values[i] - r * r) / (r * r));
                }
            }
            worst_boundary = std::max(worst_boundary, d.boundary_residual);
        }
    const double t = clock.seconds();
    Outcome o;
    o.pass = converged && worst_u < 1e-10 && worst_d < 1e-10 && worst_c < 1e-10 && worst_disc < 1e-10 &&
             worst_boundary < 1e-10 && t < 5.0;
    o.detail = "max|U| " + fmt("%.2e", worst_u) + ", max|D-1| " + fmt("%.2e", worst_d) + ", max|C-2| " +
               fmt("%.2e", worst_c) + ", disc deviation " + fmt("%.2e", worst_disc) + ", boundary residual " +
               fmt("%.2e", worst_boundary) + ", " + fmt("%.2f s", t);
    return o;
}

Outcome hilbert_identities() {
    Clock clock;
    const std::size_t N = 256;
    double worst = 0.0;
    for (int n = 1; n <= 32; ++n) {
        std::vector<double> c(N), s(N);
        for (std::size_t k = 0; k < N; ++k) {
            c[k] = std::cos(n * spectral::node(k, N));
            s[k] = std::sin(n * spectral::node(k, N));
        }
        const auto hc = hilbert_on_circle(c), hs = hilbert_on_circle(s);
        for (std::size_t k = 0; k < N; ++k) {
            worst = std::max(worst, std::abs(hc[k] - s[k]));
            worst = std::max(worst, std::abs(hs[k] + c[k]));
        }
    }
    bool one_exact = true;
    for (double v : hilbert_on_circle(std::vector<double>(N, 1.0))) one_exact = one_exact && v == 0.0;

    const SliceGeometry g = make_slice_geometry(flat_model(0.25), {{0.0, 0.0}, 0.1});
    const HilbertOperator H(g);
    std::mt19937_64 rng(2024);
    double origin = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const auto phi = random_trig_poly(g.curve.size(), 12, rng);
        origin = std::max(origin, std::abs(H.origin_imaginary(H.on_curve(phi))));
    }
    const double t = clock.seconds();
    Outcome o;
    o.pass = worst < 1e-11 && one_exact && origin < 1e-9 && t < 1.0;
    o.detail = "identity error " + fmt("%.2e", worst) + ", H[1] " + (one_exact ? "= 0" : "!= 0") +
               ", ellipse origin residual " + fmt("%.2e", origin) + ", " + fmt("%.2f s", t);
    return o;
}

Outcome conformal_map() {
    Clock clock;
    double conic = 0.0, oracle = 0.0, min_derivative = INFINITY;
    for (const auto& [lambda, expected] : kEllipseDerivative) {
        const BoundaryCurve c = trace_level_curve(flat_model(lambda), {{0.0, 0.0}, 0.1});
        const ConformalMap m = riemann_map(c);
        for (const cd& s : m.boundary)
            conic = std::max(conic, std::abs(std::norm(s) + 2.0 * lambda * (s * s).real() - 1.0));
        min_derivative = std::min(min_derivative, m.derivative_at_zero);
        oracle = std::max(oracle, std::abs(m.derivative_at_zero - expected));
    }
    const double t = clock.seconds();
    Outcome o;
    o.pass = conic < 1e-8 && min_derivative > 0.0 && oracle < 1e-6 && t < 2.0;
    o.detail = "conic residual " + fmt("%.2e", conic) + ", min sigma'(0) " + fmt("%.6f", min_derivative) +
               ", oracle deviation " + fmt("%.2e", oracle) + ", " + fmt("%.2f s", t);
    return o;
}

const std::vector<double> kDecayRadii{0.02, 0.03, 0.045, 0.068, 0.1};

Outcome decay_rate() {
    Clock clock;
    SweepOptions opt;
    opt.jacobian = false;
    const FamilyReport rep = sweep(spec_file("l7.json"), {{0.0, 0.0}}, kDecayRadii, opt);
    const double t = clock.seconds();
    Outcome o;
    if (rep.rate_fits.empty() || !rep.all_converged()) {
        o.pass = false;
        o.detail = "sweep did not converge";
        return o;
    }
    const RateFit& f = rep.rate_fits.front();
    o.pass = f.slope_u >= 4.5 && f.slope_u <= 5.5 && f.slope_dr_u >= 3.5 && f.slope_dr_u <= 4.5 && t < 60.0;
    o.detail = "slope |U| " + fmt("%.4f", f.slope_u) + ", slope |d_r U| " + fmt("%.4f", f.slope_dr_u) + ", " +
               fmt("%.2f s", t);
    return o;
}

Outcome normal_form() {
    Clock clock;
    const RawDefiningSeries raw = raw_spec_from_json(load_json(std::string(BISHOP_SPEC_DIR) + "/raw_example.json"));
    const NormalFormResult nf = normalize(raw, 7);
    double zbar = 0.0, low_k = 0.0, lambda_imag = 0.0, min_lambda = INFINITY;
    for (std::size_t i = 0; i < nf.samples.size(); ++i) {
        const NumericSeries F = at_parameters(raw.F, nf.samples[i]);
        zbar = std::max(zbar, std::abs(evaluate(F.derivative_zbar(), nf.changes[i].z0)));
        const NumericSeries G = nf.changes[i].apply(F);
        lambda_imag = std::max(lambda_imag, std::abs(G.coeff(0, 2).imag()));
        min_lambda = std::min(min_lambda, G.coeff(0, 2).real());
        low_k = std::max(low_k, max_coeff(nf.slices[i].K, 0, 6));
    }

    // linear case: quadric plus x2 (z + zbar), recentred in closed form
    const double lambda = 0.2;
    double closed_form = 0.0;
    for (const auto& x : sample_ball(2, 0.1)) {
        NumericSeries F = quadric_series(lambda);
        F.set(1, 0, x[1]);
        F.set(0, 1, x[1]);
        const cd z0 = recenter_cr_singularity(F);
        closed_form = std::max(closed_form, std::abs(z0 - cd(-x[1] / (1.0 + 2.0 * lambda), 0.0)));
    }
    const double t = clock.seconds();
    Outcome o;
    o.pass = zbar < 1e-12 && closed_form < 1e-12 && lambda_imag < 1e-12 && min_lambda >= 0.0 && low_k < 1e-10 &&
             t < 10.0;
    o.detail = "zbar coefficient " + fmt("%.2e", zbar) + ", closed-form z0 error " + fmt("%.2e", closed_form) +
               ", Im lambda " + fmt("%.2e", lambda_imag) + ", min lambda " + fmt("%.4f", min_lambda) +
               ", K below degree 7 " + fmt("%.2e", low_k) + ", " + fmt("%.2f s", t);
    return o;
}

Outcome family_geometry() {
    Clock clock;
    std::vector<std::vector<double>> xs;
    for (double a : {-0.05, 0.0, 0.05})
        for (double b : {-0.05, 0.0, 0.05}) xs.push_back({a, b});
    const FamilyReport rep = sweep(spec_file("perturbed.json"), xs, {0.02, 0.03, 0.045, 0.068}, SweepOptions{});
    double boundary = 0.0;
    for (const auto& s : rep.slices) boundary = std::max(boundary, s.converged ? s.boundary_residual : INFINITY);
    const double jac = rep.jacobian.defect.empty() ? NAN : rep.jacobian.defect.front();
    const double t = clock.seconds();
    Outcome o;
    o.pass = rep.all_converged() && rep.slices.size() == 36 && boundary < 1e-8 && rep.nested &&
             rep.min_disjoint_distance > 0.0 && jac < 0.05 && rep.jacobian.decreasing && t < 120.0;
    o.detail = std::string(rep.all_converged() ? "36/36 converged" : "not all converged") + ", boundary residual " +
               fmt("%.2e", boundary) + ", nested " + (rep.nested ? "yes" : "no") + ", min distance " +
               fmt("%.2e", rep.min_disjoint_distance) + ", jacobian defect " + fmt("%.2e", jac) +
               (rep.jacobian.decreasing ? " (decreasing)" : " (not decreasing)") + ", " + fmt("%.2f s", t);
    return o;
}

Outcome grid_refinement() {
    Clock clock;
    const ManifoldSpec spec = spec_file("l7.json");
    double worst = 0.0;
    bool converged = true;
    for (double r : kDecayRadii) {
        double u[2];
        for (int level = 0; level < 2; ++level) {
            SliceOptions opt;
            opt.geometry.trace.n_theta = level == 0 ? 256 : 512;
            const SliceGeometry g = make_slice_geometry(spec, {{0.0, 0.0}, r}, opt.geometry);
            const DiscSolution s = solve_U(g, opt.solver);
            converged = converged && s.converged;
            u[level] = s.norm_u;
        }
        worst = std::max(worst, std::abs(u[1] - u[0]) / u[1]);
    }
    Outcome o;
    o.pass = converged && worst < 1e-9;
    o.detail = "max relative change of |U| " + fmt("%.2e", worst) + ", " + fmt("%.2f s", clock.seconds());
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"quadric trivialization", quadric_trivialization},
        {"Hilbert identities", hilbert_identities},
        {"conformal map", conformal_map},
        {"decay rate", decay_rate},
        {"normal form", normal_form},
        {"family geometry", family_geometry},
        {"grid refinement", grid_refinement},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
