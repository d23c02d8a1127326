#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "param_poly.hpp"

namespace bishop {

using cd = std::complex<double>;

/// Complex coefficient whose real and imaginary parts are polynomials in X.
struct ParamComplex {
    ParamPoly re;
    ParamPoly im;

    ParamComplex() = default;
    ParamComplex(ParamPoly r, ParamPoly i) : re(std::move(r)), im(std::move(i)) {}

    static ParamComplex constant(std::size_t dim, cd c, int bound = ParamPoly::kDefaultDegreeBound) {
        return {ParamPoly::constant(dim, c.real(), bound), ParamPoly::constant(dim, c.imag(), bound)};
    }

    [[nodiscard]] cd evaluate(std::span<const double> x) const { return {re.evaluate(x), im.evaluate(x)}; }
    [[nodiscard]] bool is_zero() const { return re.is_zero() && im.is_zero(); }

    ParamComplex& operator+=(const ParamComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    ParamComplex& operator-=(const ParamComplex& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    friend ParamComplex operator+(ParamComplex a, const ParamComplex& b) { return a += b; }
    friend ParamComplex operator-(ParamComplex a, const ParamComplex& b) { return a -= b; }
    friend ParamComplex operator*(const ParamComplex& a, const ParamComplex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ParamComplex operator*(cd s, const ParamComplex& a) {
        return {s.real() * a.re - s.imag() * a.im, s.real() * a.im + s.imag() * a.re};
    }
    friend bool operator==(const ParamComplex& a, const ParamComplex& b) { return a.re == b.re && a.im == b.im; }
};

inline ParamComplex conj(const ParamComplex& a) { return {a.re, -a.im}; }

template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<cd> {
    static cd zero(std::size_t) { return {}; }
    static cd conj(const cd& c) { return std::conj(c); }
    static bool is_zero(const cd& c) { return c == cd{}; }
    static void check_dim(const cd&, std::size_t) {}
    static cd at(const cd& c, std::span<const double>) { return c; }
};

template <>
struct CoeffTraits<ParamComplex> {
    static ParamComplex zero(std::size_t dim) { return {ParamPoly(dim), ParamPoly(dim)}; }
    static ParamComplex conj(const ParamComplex& c) { return bishop::conj(c); }
    static bool is_zero(const ParamComplex& c) { return c.is_zero(); }
    static void check_dim(const ParamComplex& c, std::size_t dim) {
        if (c.re.dim() != dim || c.im.dim() != dim)
            fail(ErrorCode::ParameterDimensionMismatch, "coefficient parameter dimension differs from series");
    }
    static cd at(const ParamComplex& c, std::span<const double> x) { return c.evaluate(x); }
};

/// Truncated series sum c_{jk} z^j zbar^k with j + k <= max_degree.
template <class C>
class BidegreeSeries {
public:
    using Traits = CoeffTraits<C>;
    static constexpr int kDefaultMaxDegree = 10;

    explicit BidegreeSeries(int max_degree = kDefaultMaxDegree, std::size_t param_dim = 0)
        : max_degree_(max_degree), param_dim_(param_dim),
          coeffs_(slot_count(max_degree), Traits::zero(param_dim)) {
        if (max_degree < 0) fail(ErrorCode::InvalidArgument, "negative max degree");
    }

    [[nodiscard]] int max_degree() const noexcept { return max_degree_; }
    [[nodiscard]] std::size_t param_dim() const noexcept { return param_dim_; }

    [[nodiscard]] const C& coeff(int j, int k) const { return coeffs_[index_checked(j, k)]; }
    C& coeff(int j, int k) { return coeffs_[index_checked(j, k)]; }

    /// Coefficient or zero when (j, k) lies beyond the truncation.
    [[nodiscard]] C coeff_or_zero(int j, int k) const {
        if (j < 0 || k < 0 || j + k > max_degree_) return Traits::zero(param_dim_);
        return coeffs_[index(j, k)];
    }

    /// Setting beyond the truncation degree is silently ignored.
    void set(int j, int k, const C& c) {
        if (j < 0 || k < 0) fail(ErrorCode::InvalidArgument, "negative exponent");
        if (j + k > max_degree_) return;
        Traits::check_dim(c, param_dim_);
        coeffs_[index(j, k)] = c;
    }

    void add(int j, int k, const C& c) {
        if (j < 0 || k < 0 || j + k > max_degree_) return;
        Traits::check_dim(c, param_dim_);
        coeffs_[index(j, k)] += c;
    }

    template <class Fn>
    void for_each_nonzero(Fn&& fn) const {
        for (int d = 0; d <= max_degree_; ++d)
            for (int k = 0; k <= d; ++k) {
                const C& c = coeffs_[index(d - k, k)];
                if (!Traits::is_zero(c)) fn(d - k, k, c);
            }
    }

    [[nodiscard]] bool is_zero() const {
        for (const auto& c : coeffs_)
            if (!Traits::is_zero(c)) return false;
        return true;
    }

    /// Lowest total degree carrying a nonzero coefficient; -1 for the zero series.
    [[nodiscard]] int min_degree() const {
        for (int d = 0; d <= max_degree_; ++d)
            for (int k = 0; k <= d; ++k)
                if (!Traits::is_zero(coeffs_[index(d - k, k)])) return d;
        return -1;
    }

    /// Exact test of c_{jk} == conj(c_{kj}), i.e. the series defines a real-valued function.
    [[nodiscard]] bool is_real() const {
        for (int d = 0; d <= max_degree_; ++d)
            for (int k = 0; k <= d; ++k)
                if (!(coeffs_[index(d - k, k)] == Traits::conj(coeffs_[index(k, d - k)]))) return false;
        return true;
    }

    [[nodiscard]] BidegreeSeries truncated(int degree) const {
        BidegreeSeries out(std::min(degree, max_degree_), param_dim_);
        for (int d = 0; d <= out.max_degree_; ++d)
            for (int k = 0; k <= d; ++k) out.coeffs_[index(d - k, k)] = coeffs_[index(d - k, k)];
        return out;
    }

    /// Copy with a larger or smaller truncation degree.
    [[nodiscard]] BidegreeSeries with_max_degree(int degree) const {
        BidegreeSeries out(degree, param_dim_);
        for (int d = 0; d <= std::min(degree, max_degree_); ++d)
            for (int k = 0; k <= d; ++k) out.coeffs_[index(d - k, k)] = coeffs_[index(d - k, k)];
        return out;
    }

    [[nodiscard]] BidegreeSeries homogeneous_part(int m) const {
        BidegreeSeries out(max_degree_, param_dim_);
        if (m < 0 || m > max_degree_) return out;
        for (int k = 0; k <= m; ++k) out.coeffs_[index(m - k, k)] = coeffs_[index(m - k, k)];
        return out;
    }

    [[nodiscard]] BidegreeSeries conjugate() const {
        BidegreeSeries out(max_degree_, param_dim_);
        for (int d = 0; d <= max_degree_; ++d)
            for (int k = 0; k <= d; ++k) out.coeffs_[index(k, d - k)] = Traits::conj(coeffs_[index(d - k, k)]);
        return out;
    }

    [[nodiscard]] BidegreeSeries derivative_z() const { return derivative(true); }
    [[nodiscard]] BidegreeSeries derivative_zbar() const { return derivative(false); }

    BidegreeSeries& operator+=(const BidegreeSeries& o) {
        check_dim(o);
        int d = std::min(max_degree_, o.max_degree_);
        *this = truncated(d);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    BidegreeSeries& operator-=(const BidegreeSeries& o) {
        check_dim(o);
        int d = std::min(max_degree_, o.max_degree_);
        *this = truncated(d);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }

    friend BidegreeSeries operator+(BidegreeSeries a, const BidegreeSeries& b) { return a += b; }
    friend BidegreeSeries operator-(BidegreeSeries a, const BidegreeSeries& b) { return a -= b; }

    friend BidegreeSeries operator*(cd s, BidegreeSeries a) {
        for (auto& c : a.coeffs_) c = s * c;
        return a;
    }

    /// Cauchy product truncated at the smaller max degree. Real inputs give an exactly real output.
    friend BidegreeSeries operator*(const BidegreeSeries& a, const BidegreeSeries& b) {
        a.check_dim(b);
        const int D = std::min(a.max_degree_, b.max_degree_);
        BidegreeSeries out(D, a.param_dim_);
        const bool mirror = a.is_real() && b.is_real();
        for (int d = 0; d <= D; ++d)
            for (int k = 0; k <= d; ++k) {
                const int j = d - k;
                if (mirror && j < k) continue;
                C acc = Traits::zero(a.param_dim_);
                for (int d1 = 0; d1 <= d; ++d1)
                    for (int k1 = 0; k1 <= d1; ++k1) {
                        const int j1 = d1 - k1;
                        const int j2 = j - j1, k2 = k - k1;
                        if (j2 < 0 || k2 < 0) continue;
                        const C& ca = a.coeffs_[index(j1, k1)];
                        const C& cb = b.coeffs_[index(j2, k2)];
                        if (Traits::is_zero(ca) || Traits::is_zero(cb)) continue;
                        acc += ca * cb;
                    }
                out.coeffs_[index(j, k)] = acc;
            }
        if (mirror)
            for (int d = 0; d <= D; ++d)
                for (int k = 0; k <= d; ++k)
                    if (d - k < k) out.coeffs_[index(d - k, k)] = Traits::conj(out.coeffs_[index(k, d - k)]);
        return out;
    }

    friend bool operator==(const BidegreeSeries& a, const BidegreeSeries& b) {
        return a.max_degree_ == b.max_degree_ && a.param_dim_ == b.param_dim_ && a.coeffs_ == b.coeffs_;
    }

    [[nodiscard]] static std::size_t index(int j, int k) {
        const int d = j + k;
        return static_cast<std::size_t>(d * (d + 1) / 2 + k);
    }

private:
    static std::size_t slot_count(int D) { return D < 0 ? 0 : static_cast<std::size_t>((D + 1) * (D + 2) / 2); }

    std::size_t index_checked(int j, int k) const {
        if (j < 0 || k < 0 || j + k > max_degree_)
            fail(ErrorCode::InvalidArgument,
                 "coefficient (" + std::to_string(j) + "," + std::to_string(k) + ") beyond truncation");
        return index(j, k);
    }

    void check_dim(const BidegreeSeries& o) const {
        if (o.param_dim_ != param_dim_)
            fail(ErrorCode::ParameterDimensionMismatch,
                 "series parameter dimensions " + std::to_string(param_dim_) + " and " +
                     std::to_string(o.param_dim_));
    }

    BidegreeSeries derivative(bool in_z) const {
        if (max_degree_ < 1) fail(ErrorCode::InvalidArgument, "derivative of a degree-0 truncation");
        BidegreeSeries out(max_degree_ - 1, param_dim_);
        for (int d = 1; d <= max_degree_; ++d)
            for (int k = 0; k <= d; ++k) {
                const int j = d - k;
                const int e = in_z ? j : k;
                if (e == 0) continue;
                const C& c = coeffs_[index(j, k)];
                if (Traits::is_zero(c)) continue;
                out.coeffs_[in_z ? index(j - 1, k) : index(j, k - 1)] = cd(static_cast<double>(e), 0.0) * c;
            }
        return out;
    }

    int max_degree_;
    std::size_t param_dim_;
    std::vector<C> coeffs_;
};

using NumericSeries = BidegreeSeries<cd>;
using ParamSeries = BidegreeSeries<ParamComplex>;

/// Freeze the parameters at X.
inline NumericSeries at_parameters(const ParamSeries& s, std::span<const double> x) {
    if (x.size() != s.param_dim())
        fail(ErrorCode::ParameterDimensionMismatch,
             "series expects " + std::to_string(s.param_dim()) + " parameters, got " + std::to_string(x.size()));
    NumericSeries out(s.max_degree());
    s.for_each_nonzero([&](int j, int k, const ParamComplex& c) { out.set(j, k, c.evaluate(x)); });
    return out;
}

inline cd evaluate(const NumericSeries& s, cd z) {
    const int D = s.max_degree();
    std::vector<cd> zp(static_cast<std::size_t>(D) + 1), wp(static_cast<std::size_t>(D) + 1);
    zp[0] = wp[0] = 1.0;
    const cd zb = std::conj(z);
    for (int i = 1; i <= D; ++i) {
        zp[static_cast<std::size_t>(i)] = zp[static_cast<std::size_t>(i) - 1] * z;
        wp[static_cast<std::size_t>(i)] = wp[static_cast<std::size_t>(i) - 1] * zb;
    }
    cd sum = 0.0;
    s.for_each_nonzero([&](int j, int k, const cd& c) {
        sum += c * zp[static_cast<std::size_t>(j)] * wp[static_cast<std::size_t>(k)];
    });
    return sum;
}

inline cd evaluate(const ParamSeries& s, std::span<const double> x, cd z) { return evaluate(at_parameters(s, x), z); }

/// Real part of a series; for a real series this is the series itself.
inline NumericSeries real_part(const NumericSeries& s) {
    NumericSeries out(s.max_degree());
    s.for_each_nonzero([&](int j, int k, const cd& c) {
        out.add(j, k, 0.5 * c);
        out.add(k, j, 0.5 * std::conj(c));
    });
    return out;
}

/// Imaginary part as a real series: (s - conj s) / 2i.
inline NumericSeries imag_part(const NumericSeries& s) {
    NumericSeries out(s.max_degree());
    const cd half_over_i(0.0, -0.5);
    s.for_each_nonzero([&](int j, int k, const cd& c) {
        out.add(j, k, half_over_i * c);
        out.add(k, j, -half_over_i * std::conj(c));
    });
    return out;
}

/// Largest coefficient modulus of degree in [lo, hi].
inline double max_coeff(const NumericSeries& s, int lo, int hi) {
    double m = 0.0;
    s.for_each_nonzero([&](int j, int k, const cd& c) {
        if (j + k >= lo && j + k <= hi) m = std::max(m, std::abs(c));
    });
    return m;
}

/// Substitute z -> z + z0 exactly (finite binomial expansion).
inline NumericSeries translate(const NumericSeries& s, cd z0) {
    const int D = s.max_degree();
    std::vector<std::vector<double>> binom(static_cast<std::size_t>(D) + 1);
    for (int n = 0; n <= D; ++n) {
        binom[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(n) + 1, 1.0);
        for (int i = 1; i < n; ++i)
            binom[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                binom[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(i) - 1] +
                binom[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(i)];
    }
    std::vector<cd> zp(static_cast<std::size_t>(D) + 1), wp(static_cast<std::size_t>(D) + 1);
    zp[0] = wp[0] = 1.0;
    for (int i = 1; i <= D; ++i) {
        zp[static_cast<std::size_t>(i)] = zp[static_cast<std::size_t>(i) - 1] * z0;
        wp[static_cast<std::size_t>(i)] = wp[static_cast<std::size_t>(i) - 1] * std::conj(z0);
    }
    NumericSeries out(D);
    s.for_each_nonzero([&](int j, int k, const cd& c) {
        for (int a = 0; a <= j; ++a)
            for (int b = 0; b <= k; ++b)
                out.add(a, b,
                        c * binom[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)] *
                            binom[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] *
                            zp[static_cast<std::size_t>(j - a)] * wp[static_cast<std::size_t>(k - b)]);
    });
    return out;
}

/// Substitute z -> z e^{i theta}.
inline NumericSeries rotate(const NumericSeries& s, double theta) {
    NumericSeries out(s.max_degree());
    s.for_each_nonzero([&](int j, int k, const cd& c) { out.set(j, k, c * std::polar(1.0, (j - k) * theta)); });
    return out;
}

}  // namespace bishop
