#include <gtest/gtest.h>

#include <bishop/spectral.hpp>

#include <cmath>
#include <complex>
#include <vector>

using namespace bishop;
using spectral::cd;
using spectral::cvec;
using spectral::rvec;

namespace {

template <class F>
rvec sample(std::size_t N, F&& f) {
    rvec v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = f(spectral::node(k, N));
    return v;
}

double max_diff(const rvec& a, const rvec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(Spectral, ConjugationOfTrigonometricModes) {
    const std::size_t N = 128;
    for (int n = 1; n <= 32; ++n) {
        const rvec c = sample(N, [n](double t) { return std::cos(n * t); });
        const rvec s = sample(N, [n](double t) { return std::sin(n * t); });
        const rvec minus_c = sample(N, [n](double t) { return -std::cos(n * t); });
        EXPECT_LT(max_diff(spectral::conjugate(c), s), 1e-13);
        EXPECT_LT(max_diff(spectral::conjugate(s), minus_c), 1e-13);
    }
    const rvec one(N, 1.0);
    for (double v : spectral::conjugate(one)) EXPECT_EQ(v, 0.0);
}

TEST(Spectral, CompletionIsHolomorphic) {
    const std::size_t N = 64;
    const rvec u = sample(N, [](double t) { return std::exp(std::cos(t)) * std::cos(std::sin(t)); });
    const cvec f = spectral::complete(u);
    for (std::size_t k = 0; k < N; ++k) {
        const cd e = std::exp(std::polar(1.0, spectral::node(k, N)));
        EXPECT_NEAR(f[k].real(), e.real(), 1e-14);
        EXPECT_NEAR(f[k].imag(), e.imag(), 1e-14);
    }
    EXPECT_LT(spectral::anti_holomorphic_energy(f, true), 1e-15);
}

TEST(Spectral, DerivativeOfBandLimitedData) {
    const std::size_t N = 64;
    const rvec f = sample(N, [](double t) { return std::sin(3 * t) + 0.5 * std::cos(7 * t); });
    const rvec d1 = sample(N, [](double t) { return 3 * std::cos(3 * t) - 3.5 * std::sin(7 * t); });
    const rvec d2 = sample(N, [](double t) { return -9 * std::sin(3 * t) - 24.5 * std::cos(7 * t); });
    EXPECT_LT(max_diff(spectral::derivative(f), d1), 1e-12);
    EXPECT_LT(max_diff(spectral::derivative(f, 2), d2), 1e-11);
}

TEST(Spectral, ResampleRoundTrip) {
    const std::size_t N = 32;
    const rvec f = sample(N, [](double t) { return std::cos(2 * t) - std::sin(5 * t); });
    const rvec up = spectral::resample(std::span<const double>(f), 128);
    const rvec exact = sample(128, [](double t) { return std::cos(2 * t) - std::sin(5 * t); });
    EXPECT_LT(max_diff(up, exact), 1e-14);
    EXPECT_LT(max_diff(spectral::resample(std::span<const double>(up), N), f), 1e-14);
}

TEST(Spectral, TrigInterpolantOffGrid) {
    const std::size_t N = 32;
    const rvec f = sample(N, [](double t) { return std::cos(3 * t) + 0.25 * std::sin(t); });
    const spectral::TrigInterpolant I{std::span<const double>(f)};
    for (double x : {0.123, 1.7, 5.9}) {
        const auto [v, d] = I.eval_with_derivative(x);
        EXPECT_NEAR(v.real(), std::cos(3 * x) + 0.25 * std::sin(x), 1e-14);
        EXPECT_NEAR(d.real(), -3 * std::sin(3 * x) + 0.25 * std::cos(x), 1e-13);
    }
}

TEST(Spectral, PeriodicInterpolatorMatchesDirectSum) {
    const std::size_t N = 64;
    const rvec f = sample(N, [](double t) { return std::exp(0.5 * std::cos(t)); });
    const spectral::PeriodicInterpolator P(f);
    std::vector<double> x;
    for (int i = 0; i < 5000; ++i) x.push_back(0.0012 * i + 0.0007);
    const std::vector<double> v = P.values(x);
    for (std::size_t i = 0; i < x.size(); i += 97) EXPECT_NEAR(v[i], std::exp(0.5 * std::cos(x[i])), 1e-13);
}

TEST(Spectral, TaylorFromBoundaryAndRings) {
    const std::size_t N = 64;
    cvec f(N);
    for (std::size_t k = 0; k < N; ++k) f[k] = std::exp(std::polar(1.0, spectral::node(k, N)));
    const spectral::Taylor T = spectral::Taylor::from_boundary(f);
    const cd z(0.3, -0.4);
    EXPECT_LT(std::abs(T(z) - std::exp(z)), 1e-15);
    EXPECT_LT(std::abs(T.derivative(z) - std::exp(z)), 1e-14);
    for (std::size_t M : {8u, 24u, 100u}) {
        const cvec ring = T.ring(0.7, M), dt = T.ring_dt(0.7, M);
        for (std::size_t k = 0; k < M; ++k) {
            const cd w = std::polar(0.7, spectral::node(k, M));
            EXPECT_LT(std::abs(ring[k] - std::exp(w)), 1e-14);
            EXPECT_LT(std::abs(dt[k] - cd(0.0, 1.0) * w * std::exp(w)), 1e-14);
        }
    }
}

TEST(Spectral, SupNormFindsOffNodeMaximum) {
    // the maximum of cos(t - 0.05) lies between nodes of an 8-point grid
    const std::size_t N = 8;
    const rvec f = sample(N, [](double t) { return std::cos(t - 0.05); });
    double node_max = 0.0;
    for (double v : f) node_max = std::max(node_max, std::abs(v));
    EXPECT_LT(node_max, 1.0 - 1e-4);
    EXPECT_NEAR(spectral::sup_norm(std::span<const double>(f)), 1.0, 1e-12);
}

TEST(Spectral, EnergyDiagnostics) {
    const std::size_t N = 64;
    const rvec low = sample(N, [](double t) { return std::cos(t); });
    const rvec high = sample(N, [](double t) { return std::cos(30 * t); });
    EXPECT_LT(spectral::top_quarter_energy(std::span<const double>(low)), 1e-28);
    EXPECT_NEAR(spectral::top_quarter_energy(std::span<const double>(high)), 1.0, 1e-12);
    EXPECT_TRUE(spectral::is_power_of_two(256));
    EXPECT_FALSE(spectral::is_power_of_two(96));
}
