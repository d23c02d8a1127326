#pragma once

// Discrete Fourier tools on the uniform circle grid t_k = 2 pi k / N.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "error.hpp"

namespace bishop::spectral {

using cd = std::complex<double>;
using cvec = std::vector<cd>;
using rvec = std::vector<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Eigen::FFT<double>& engine() {
    thread_local Eigen::FFT<double> fft;
    return fft;
}

inline double node(std::size_t k, std::size_t N) { return kTwoPi * static_cast<double>(k) / static_cast<double>(N); }

inline rvec grid(std::size_t N) {
    rvec t(N);
    for (std::size_t k = 0; k < N; ++k) t[k] = node(k, N);
    return t;
}

/// Signed frequency of FFT slot i; the Nyquist slot reports +N/2.
inline long signed_mode(std::size_t i, std::size_t N) {
    return i <= N / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(N);
}

/// Coefficients c_n with f_k = sum_n c_n e^{i n t_k}.
inline cvec forward(std::span<const cd> f) {
    cvec in(f.begin(), f.end()), out;
    engine().fwd(out, in);
    const double s = 1.0 / static_cast<double>(f.size());
    for (auto& c : out) c *= s;
    return out;
}

inline cvec forward(std::span<const double> f) {
    cvec in(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) in[i] = f[i];
    return forward(std::span<const cd>(in));
}

inline cvec inverse(std::span<const cd> c) {
    cvec in(c.begin(), c.end()), out;
    engine().inv(out, in);
    const double s = static_cast<double>(c.size());
    for (auto& v : out) v *= s;
    return out;
}

inline rvec real_of(std::span<const cd> v) {
    rvec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}

inline rvec imag_of(std::span<const cd> v) {
    rvec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].imag();
    return out;
}

/// Harmonic conjugation on the circle: multiplier -i sign(n), constant and Nyquist modes removed.
inline rvec conjugate(std::span<const double> u) {
    const std::size_t N = u.size();
    if (N % 2 == 0 && N >= 4) {
        // half-spectrum real transform
        thread_local Eigen::FFT<double> half = [] {
            Eigen::FFT<double> f;
            f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
            return f;
        }();
        const rvec in(u.begin(), u.end());
        cvec c;
        half.fwd(c, in);
        c[0] = 0.0;
        c[N / 2] = 0.0;
        for (std::size_t i = 1; i < N / 2; ++i) c[i] = cd(c[i].imag(), -c[i].real());
        rvec out;
        half.inv(out, c, static_cast<Eigen::Index>(N));
        return out;
    }
    cvec c = forward(u);
    for (std::size_t i = 0; i < N; ++i) {
        const long n = signed_mode(i, N);
        if (n == 0 || 2 * static_cast<std::size_t>(std::abs(n)) == N)
            c[i] = 0.0;
        else
            c[i] *= cd(0.0, n > 0 ? -1.0 : 1.0);
    }
    return real_of(inverse(c));
}

/// u + i H[u], the boundary values of the holomorphic function with real part u and Im f(0) = 0.
inline cvec complete(std::span<const double> u) {
    const rvec h = conjugate(u);
    cvec f(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) f[i] = cd(u[i], h[i]);
    return f;
}

/// Spectral derivative of the given order; the Nyquist mode is dropped for odd orders.
inline cvec derivative(std::span<const cd> f, int order = 1) {
    const std::size_t N = f.size();
    cvec c = forward(f);
    for (std::size_t i = 0; i < N; ++i) {
        const long n = signed_mode(i, N);
        if (order % 2 == 1 && 2 * static_cast<std::size_t>(std::abs(n)) == N) {
            c[i] = 0.0;
            continue;
        }
        c[i] *= std::pow(cd(0.0, static_cast<double>(n)), order);
    }
    return inverse(c);
}

inline rvec derivative(std::span<const double> f, int order = 1) {
    cvec in(f.begin(), f.end());
    return real_of(derivative(std::span<const cd>(in), order));
}

/// Share of the energy in negative frequencies (and the Nyquist slot). The constant mode may be excluded.
inline double anti_holomorphic_energy(std::span<const cd> f, bool drop_mean = false) {
    const std::size_t N = f.size();
    const cvec c = forward(f);
    double neg = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const long n = signed_mode(i, N);
        if (drop_mean && n == 0) continue;
        const double e = std::norm(c[i]);
        tot += e;
        if (n < 0 || 2 * static_cast<std::size_t>(n) == N) neg += e;
    }
    return tot > 0.0 ? std::sqrt(neg / tot) : 0.0;
}

/// Fraction of spectral energy carried by |n| > 3N/8 (the top quarter of the resolved band).
template <class T>
double top_quarter_energy(std::span<const T> f) {
    const std::size_t N = f.size();
    cvec in(f.begin(), f.end());
    const cvec c = forward(std::span<const cd>(in));
    double hi = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double e = std::norm(c[i]);
        tot += e;
        if (8 * static_cast<std::size_t>(std::abs(signed_mode(i, N))) > 3 * N) hi += e;
    }
    return tot > 0.0 ? hi / tot : 0.0;
}

/// Trigonometric interpolation onto M equispaced points (zero padding or band truncation).
inline cvec resample(std::span<const cd> f, std::size_t M) {
    const std::size_t N = f.size();
    if (M == N) return cvec(f.begin(), f.end());
    const cvec c = forward(f);
    cvec d(M, cd{});
    const long m = static_cast<long>(M);
    for (std::size_t i = 0; i < N; ++i) {
        const long n = signed_mode(i, N);
        const std::size_t a = static_cast<std::size_t>(std::abs(n));
        if (2 * a == N && M > N) {
            d[a] += 0.5 * c[i];
            d[M - a] += 0.5 * c[i];
        } else if (2 * a <= M && !(2 * a == N && M < N)) {
            d[static_cast<std::size_t>(((n % m) + m) % m)] += c[i];
        }
    }
    return inverse(d);
}

inline rvec resample(std::span<const double> f, std::size_t M) {
    cvec in(f.begin(), f.end());
    return real_of(resample(std::span<const cd>(in), M));
}

/// Trigonometric interpolant of complex periodic samples, evaluable anywhere.
class TrigInterpolant {
public:
    TrigInterpolant() = default;
    explicit TrigInterpolant(std::span<const cd> samples) : n_(samples.size()), c_(forward(samples)) {}
    explicit TrigInterpolant(std::span<const double> samples) : n_(samples.size()), c_(forward(samples)) {}

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] const cvec& coefficients() const noexcept { return c_; }

    /// Value and first derivative at x.
    [[nodiscard]] std::pair<cd, cd> eval_with_derivative(double x) const {
        const std::size_t N = n_;
        const std::size_t half = N / 2;
        cd val = c_[0], der = 0.0;
        const cd e = std::polar(1.0, x);
        const cd eb = std::conj(e);
        cd p = e, pb = eb;
        for (std::size_t n = 1; n < half + (N % 2); ++n) {
            const double dn = static_cast<double>(n);
            const cd a = c_[n] * p, b = c_[N - n] * pb;
            val += a + b;
            der += cd(0.0, dn) * (a - b);
            p *= e;
            pb *= eb;
        }
        if (N % 2 == 0 && N >= 2) {
            const double dh = static_cast<double>(half);
            val += c_[half] * std::cos(dh * x);
            der -= c_[half] * dh * std::sin(dh * x);
        }
        return {val, der};
    }

    [[nodiscard]] cd operator()(double x) const { return eval_with_derivative(x).first; }
    [[nodiscard]] cd derivative(double x) const { return eval_with_derivative(x).second; }

private:
    std::size_t n_ = 0;
    cvec c_;
};

/// Batch evaluation of the trigonometric interpolant of real samples, with derivative.
///
/// Large batches go through an oversampled table and local barycentric interpolation, which agrees
/// with the direct sum to rounding for band-limited data and costs O(1) per point. Coarse grids are
/// oversampled 64x; grids of kFineGrid points or more already sample their band densely and get 8x.
class PeriodicInterpolator {
public:
    static constexpr std::size_t kFineGrid = 4096;

    PeriodicInterpolator() = default;
    explicit PeriodicInterpolator(std::vector<double> samples)
        : samples_(std::move(samples)), interp_(std::span<const double>(samples_)) {}

    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }

    void eval(std::span<const double> x, std::vector<double>& v, std::vector<double>& d) const {
        eval(x, v, &d);
    }

    [[nodiscard]] std::vector<double> values(std::span<const double> x) const {
        std::vector<double> v;
        eval(x, v, nullptr);
        return v;
    }

    /// Value and derivative at a single point. Fine grids answer from the cached table.
    [[nodiscard]] std::pair<double, double> at(double x) const {
        if (samples_.size() >= kFineGrid) {
            build_table(true);
            return {local(table_v_, x), local(table_d_, x)};
        }
        const auto [a, b] = interp_.eval_with_derivative(x);
        return {a.real(), b.real()};
    }

private:
    static constexpr int kStencil = 12;

    void eval(std::span<const double> x, std::vector<double>& v, std::vector<double>* d) const {
        v.resize(x.size());
        if (d) d->resize(x.size());
        if (x.size() * samples_.size() > (std::size_t{1} << 18)) {
            build_table(d != nullptr);
            for (std::size_t i = 0; i < x.size(); ++i) {
                v[i] = local(table_v_, x[i]);
                if (d) (*d)[i] = local(table_d_, x[i]);
            }
            return;
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto [a, b] = interp_.eval_with_derivative(x[i]);
            v[i] = a.real();
            if (d) (*d)[i] = b.real();
        }
    }

    void build_table(bool with_derivative) const {
        if (table_v_.empty()) {
            const std::size_t factor = samples_.size() >= kFineGrid ? 8 : 64;
            table_v_ = resample(std::span<const double>(samples_), factor * samples_.size());
            weights_.resize(kStencil);
            double c = 1.0;
            for (int j = 0; j < kStencil; ++j) {
                weights_[static_cast<std::size_t>(j)] = (j % 2 == 0 ? 1.0 : -1.0) * c;
                c = c * (kStencil - 1 - j) / (j + 1);
            }
        }
        if (with_derivative && table_d_.empty()) table_d_ = derivative(std::span<const double>(table_v_));
    }

    double local(const std::vector<double>& table, double x) const {
        const long M = static_cast<long>(table.size());
        const double u = x / (kTwoPi / static_cast<double>(M));
        const double fl = std::floor(u);
        const long base = static_cast<long>(fl) - (kStencil / 2 - 1);
        const double pos = u - fl + (kStencil / 2 - 1);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < kStencil; ++j) {
            const double dx = pos - j;
            long idx = (base + j) % M;
            if (idx < 0) idx += M;
            if (dx == 0.0) return table[static_cast<std::size_t>(idx)];
            const double w = weights_[static_cast<std::size_t>(j)] / dx;
            num += w * table[static_cast<std::size_t>(idx)];
            den += w;
        }
        return num / den;
    }

    std::vector<double> samples_;
    TrigInterpolant interp_;
    mutable std::vector<double> table_v_, table_d_, weights_;
};

/// Power series sum a_n zeta^n, from the nonnegative modes of discrete boundary data.
class Taylor {
public:
    Taylor() = default;
    explicit Taylor(cvec a) : a_(std::move(a)) { trim(); }

    /// Holomorphic part of boundary samples; the Nyquist slot is kept whole so nodal values are reproduced.
    static Taylor from_boundary(std::span<const cd> f) {
        const std::size_t N = f.size();
        const cvec c = forward(f);
        cvec a(N / 2 + 1);
        for (std::size_t n = 0; n <= N / 2; ++n) a[n] = c[n];
        Taylor t;
        t.grid_ = N;
        t.a_ = std::move(a);
        t.trim();
        return t;
    }

    [[nodiscard]] const cvec& coefficients() const noexcept { return a_; }
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_; }

    [[nodiscard]] cd operator()(cd z) const {
        cd s = 0.0;
        for (std::size_t i = a_.size(); i-- > 0;) s = s * z + a_[i];
        return s;
    }

    [[nodiscard]] cd derivative(cd z) const {
        cd s = 0.0;
        for (std::size_t i = a_.size(); i-- > 1;) s = s * z + static_cast<double>(i) * a_[i];
        return s;
    }

    /// Values at rho e^{i t_k}, t_k = 2 pi k / M. Coefficients are folded modulo M before one M-point FFT.
    [[nodiscard]] cvec ring(double rho, std::size_t M) const { return folded(rho, M, false); }

    /// d/dt of the values on the same ring.
    [[nodiscard]] cvec ring_dt(double rho, std::size_t M) const { return folded(rho, M, true); }

private:
    cvec folded(double rho, std::size_t M, bool dt) const {
        if (M == 0) fail(ErrorCode::GridMismatch, "empty ring");
        if (a_.size() <= 16) {
            cvec out(M);
            for (std::size_t k = 0; k < M; ++k) {
                const cd z = std::polar(rho, node(k, M));
                out[k] = dt ? cd(0.0, 1.0) * z * derivative(z) : (*this)(z);
            }
            return out;
        }
        cvec c(M, cd{});
        double p = 1.0;
        for (std::size_t n = 0; n < a_.size() && p != 0.0; ++n) {
            const cd term = a_[n] * p;
            c[n % M] += dt ? cd(0.0, static_cast<double>(n)) * term : term;
            p *= rho;
        }
        return inverse(c);
    }

    void trim() {
        double mx = 0.0;
        for (const auto& v : a_) mx = std::max(mx, std::abs(v));
        std::size_t n = a_.size();
        while (n > 1 && std::abs(a_[n - 1]) <= 1e-18 * mx) --n;
        if (mx == 0.0) n = 1;
        a_.resize(std::max<std::size_t>(n, 1), cd{});
    }

    cvec a_{cd{}};
    std::size_t grid_ = 1;
};

namespace detail {

template <class F>
double golden_max(F&& f, double a, double b, int iters = 60) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    return std::max(f1, f2);
}

}  // namespace detail

/// Supremum of |f| over the circle for the trigonometric interpolant of the samples.
inline double sup_norm(std::span<const cd> f) {
    const std::size_t N = f.size();
    if (N == 0) return 0.0;
    double node_max = 0.0;
    for (const auto& v : f) node_max = std::max(node_max, std::abs(v));
    if (node_max == 0.0 || N < 4) return node_max;
    const TrigInterpolant I(f);
    // refine around the largest local maxima of the nodal values
    std::vector<std::size_t> cand;
    for (std::size_t k = 0; k < N; ++k) {
        const double a = std::abs(f[(k + N - 1) % N]), b = std::abs(f[k]), c = std::abs(f[(k + 1) % N]);
        if (b >= a && b >= c && b >= 0.5 * node_max) cand.push_back(k);
    }
    std::sort(cand.begin(), cand.end(), [&](std::size_t x, std::size_t y) { return std::abs(f[x]) > std::abs(f[y]); });
    if (cand.size() > 4) cand.resize(4);
    const double h = kTwoPi / static_cast<double>(N);
    double best = node_max;
    for (std::size_t k : cand) {
        const double x0 = node(k, N);
        best = std::max(best, detail::golden_max([&](double x) { return std::abs(I(x)); }, x0 - h, x0 + h));
    }
    return best;
}

inline double sup_norm(std::span<const double> f) {
    cvec in(f.begin(), f.end());
    return sup_norm(std::span<const cd>(in));
}

inline double max_abs(std::span<const double> f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs(std::span<const cd> f) {
    double m = 0.0;
    for (const auto& v : f) m = std::max(m, std::abs(v));
    return m;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace bishop::spectral
