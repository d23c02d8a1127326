#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace bishop {

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

/// Real polynomial in the parameter vector X, truncated at a total degree bound.
class ParamPoly {
public:
    static constexpr int kDefaultDegreeBound = 2;

    ParamPoly() = default;
    explicit ParamPoly(std::size_t dim, int degree_bound = kDefaultDegreeBound)
        : dim_(dim), degree_bound_(degree_bound) {}

    static ParamPoly constant(std::size_t dim, double c, int degree_bound = kDefaultDegreeBound) {
        ParamPoly p(dim, degree_bound);
        p.set(MultiIndex(dim, 0), c);
        return p;
    }

    static ParamPoly variable(std::size_t dim, std::size_t i, int degree_bound = kDefaultDegreeBound) {
        if (i >= dim) fail(ErrorCode::ParameterDimensionMismatch, "variable index out of range");
        ParamPoly p(dim, degree_bound);
        MultiIndex a(dim, 0);
        a[i] = 1;
        p.set(a, 1.0);
        return p;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] int degree_bound() const noexcept { return degree_bound_; }
    [[nodiscard]] const std::map<MultiIndex, double>& terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

    /// Highest total degree present, or -1 for the zero polynomial.
    [[nodiscard]] int degree() const {
        int d = -1;
        for (const auto& [a, c] : terms_) d = std::max(d, total_degree(a));
        return d;
    }

    void set(const MultiIndex& a, double c) {
        check_index(a);
        if (total_degree(a) > degree_bound_) return;
        if (c == 0.0)
            terms_.erase(a);
        else
            terms_[a] = c;
    }

    [[nodiscard]] double coefficient(const MultiIndex& a) const {
        auto it = terms_.find(a);
        return it == terms_.end() ? 0.0 : it->second;
    }

    [[nodiscard]] double constant_term() const { return coefficient(MultiIndex(dim_, 0)); }

    [[nodiscard]] double evaluate(std::span<const double> x) const {
        if (x.size() != dim_)
            fail(ErrorCode::ParameterDimensionMismatch,
                 "expected " + std::to_string(dim_) + " parameters, got " + std::to_string(x.size()));
        double s = 0.0;
        for (const auto& [a, c] : terms_) {
            double m = c;
            for (std::size_t i = 0; i < dim_; ++i)
                for (int e = 0; e < a[i]; ++e) m *= x[i];
            s += m;
        }
        return s;
    }

    ParamPoly& operator+=(const ParamPoly& o) {
        check_compatible(o);
        for (const auto& [a, c] : o.terms_) add_to(a, c);
        return *this;
    }

    ParamPoly& operator-=(const ParamPoly& o) {
        check_compatible(o);
        for (const auto& [a, c] : o.terms_) add_to(a, -c);
        return *this;
    }

    ParamPoly& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [a, c] : terms_) c *= s;
        return *this;
    }

    friend ParamPoly operator+(ParamPoly a, const ParamPoly& b) { return a += b; }
    friend ParamPoly operator-(ParamPoly a, const ParamPoly& b) { return a -= b; }
    friend ParamPoly operator*(ParamPoly a, double s) { return a *= s; }
    friend ParamPoly operator*(double s, ParamPoly a) { return a *= s; }
    friend ParamPoly operator-(ParamPoly a) { return a *= -1.0; }

    /// Product truncated at the smaller of the two degree bounds.
    friend ParamPoly operator*(const ParamPoly& a, const ParamPoly& b) {
        a.check_compatible(b);
        ParamPoly out(a.dim_, std::min(a.degree_bound_, b.degree_bound_));
        MultiIndex e(a.dim_);
        for (const auto& [ia, ca] : a.terms_)
            for (const auto& [ib, cb] : b.terms_) {
                for (std::size_t i = 0; i < a.dim_; ++i) e[i] = ia[i] + ib[i];
                if (total_degree(e) <= out.degree_bound_) out.add_to(e, ca * cb);
            }
        return out;
    }

    friend bool operator==(const ParamPoly& a, const ParamPoly& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }

private:
    void check_index(const MultiIndex& a) const {
        if (a.size() != dim_)
            fail(ErrorCode::ParameterDimensionMismatch,
                 "multi-index of length " + std::to_string(a.size()) + " for dimension " + std::to_string(dim_));
        for (int e : a)
            if (e < 0) fail(ErrorCode::InvalidArgument, "negative exponent in multi-index");
    }

    void check_compatible(const ParamPoly& o) const {
        if (o.dim_ != dim_)
            fail(ErrorCode::ParameterDimensionMismatch,
                 "parameter dimensions " + std::to_string(dim_) + " and " + std::to_string(o.dim_));
    }

    void add_to(const MultiIndex& a, double c) {
        if (total_degree(a) > degree_bound_) return;
        auto [it, inserted] = terms_.try_emplace(a, c);
        if (!inserted) it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }

    std::size_t dim_ = 0;
    int degree_bound_ = kDefaultDegreeBound;
    std::map<MultiIndex, double> terms_;
};

/// All multi-indices of length dim with total degree at most deg, in graded lexicographic order.
inline std::vector<MultiIndex> monomials_up_to(std::size_t dim, int deg) {
    std::vector<MultiIndex> out;
    MultiIndex a(dim, 0);
    for (int d = 0; d <= deg; ++d) {
        // enumerate compositions of d into dim parts
        auto rec = [&](auto&& self, std::size_t i, int left) -> void {
            if (i + 1 == dim || dim == 0) {
                if (dim > 0) a[i] = left;
                if (dim > 0 || left == 0) out.push_back(a);
                return;
            }
            for (int e = left; e >= 0; --e) {
                a[i] = e;
                self(self, i + 1, left - e);
            }
        };
        rec(rec, 0, d);
    }
    return out;
}

/// Least-squares fit of a degree-bounded polynomial to values sampled at the given points.
inline ParamPoly fit_param_poly(const std::vector<std::vector<double>>& points, std::span<const double> values,
                                std::size_t dim, int degree = ParamPoly::kDefaultDegreeBound) {
    if (points.size() != values.size()) fail(ErrorCode::InvalidArgument, "sample/value count mismatch");
    auto basis = monomials_up_to(dim, degree);
    Eigen::MatrixXd A(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(basis.size()));
    Eigen::VectorXd b(static_cast<Eigen::Index>(points.size()));
    for (std::size_t r = 0; r < points.size(); ++r) {
        if (points[r].size() != dim) fail(ErrorCode::ParameterDimensionMismatch, "sample point dimension");
        for (std::size_t c = 0; c < basis.size(); ++c) {
            double m = 1.0;
            for (std::size_t i = 0; i < dim; ++i) m *= std::pow(points[r][i], basis[c][i]);
            A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m;
        }
        b(static_cast<Eigen::Index>(r)) = values[r];
    }
    Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(b);
    ParamPoly p(dim, degree);
    for (std::size_t c = 0; c < basis.size(); ++c) p.set(basis[c], sol(static_cast<Eigen::Index>(c)));
    return p;
}

}  // namespace bishop
