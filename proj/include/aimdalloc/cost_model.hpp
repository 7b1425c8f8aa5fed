#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aimdalloc/errors.hpp"
#include "aimdalloc/rng.hpp"

namespace aimdalloc {

/// One monomial c * (x^1)^e1 * ... * (x^m)^em.
///
/// Coefficients are nonnegative and at least one exponent is >= 1, so every
/// cost built from these terms vanishes at the origin and is nondecreasing
/// on the nonnegative orthant.
struct MonomialTerm {
    double coefficient = 0.0;
    std::vector<int> exponents;

    bool operator==(const MonomialTerm&) const = default;
};

namespace detail {

inline double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace detail

/// Private cost of one agent: a sum of nonnegative-coefficient monomials over
/// the m resources. Immutable after construction; safe to share across threads.
class CostFunction {
public:
    CostFunction() = default;

    CostFunction(int resource_count, std::vector<MonomialTerm> terms)
        : resource_count_(resource_count), terms_(std::move(terms)) {
        std::vector<std::string> violations;
        validate_terms(resource_count_, terms_, "terms", violations);
        if (resource_count_ < 1) violations.push_back("resource_count: must be >= 1");
        if (!violations.empty()) throw ConfigError(std::move(violations));
    }

    int resource_count() const noexcept { return resource_count_; }
    const std::vector<MonomialTerm>& terms() const noexcept { return terms_; }

    /// Cost at allocation x (componentwise nonnegative, length m).
    double evaluate(std::span<const double> x) const {
        check_dimension(x.size());
        double total = 0.0;
        for (const auto& term : terms_) {
            double v = term.coefficient;
            for (int j = 0; j < resource_count_; ++j) v *= detail::ipow(x[j], term.exponents[j]);
            total += v;
        }
        return total;
    }

    /// All m partial derivatives at x.
    ///
    /// For a term with exponent e_j = 1 the factor (x^j)^0 is taken as 1 even
    /// at x^j = 0, matching the analytic limit; e_j >= 2 contributes 0 there.
    std::vector<double> gradient(std::span<const double> x) const {
        check_dimension(x.size());
        std::vector<double> grad(static_cast<std::size_t>(resource_count_), 0.0);
        for (const auto& term : terms_) {
            for (int j = 0; j < resource_count_; ++j) {
                const int ej = term.exponents[j];
                if (ej == 0) continue;
                double v = term.coefficient * static_cast<double>(ej) * detail::ipow(x[j], ej - 1);
                for (int l = 0; l < resource_count_; ++l) {
                    if (l != j) v *= detail::ipow(x[l], term.exponents[l]);
                }
                grad[static_cast<std::size_t>(j)] += v;
            }
        }
        return grad;
    }

    bool operator==(const CostFunction&) const = default;

    /// Appends one message per violated term invariant; used by config loading
    /// so that every problem is reported at once.
    static void validate_terms(int resource_count, const std::vector<MonomialTerm>& terms,
                               const std::string& path, std::vector<std::string>& violations) {
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto& term = terms[t];
            const std::string where = path + "[" + std::to_string(t) + "]";
            if (!(term.coefficient >= 0.0) || !std::isfinite(term.coefficient))
                violations.push_back(where + ".coefficient: must be finite and >= 0");
            if (term.exponents.size() != static_cast<std::size_t>(resource_count))
                violations.push_back(where + ".exponents: expected length " +
                                     std::to_string(resource_count) + ", got " +
                                     std::to_string(term.exponents.size()));
            int sum = 0;
            bool nonneg = true;
            for (int e : term.exponents) {
                if (e < 0) nonneg = false;
                sum += e;
            }
            if (!nonneg) violations.push_back(where + ".exponents: must be >= 0");
            if (sum < 1)
                violations.push_back(where + ".exponents: must sum to >= 1 (no constant terms)");
        }
    }

private:
    void check_dimension(std::size_t got) const {
        if (got != static_cast<std::size_t>(resource_count_))
            throw DimensionError("allocation vector", static_cast<std::size_t>(resource_count_),
                                 got);
    }

    int resource_count_ = 0;
    std::vector<MonomialTerm> terms_;
};

/// Finite-difference gradient: central differences in the interior, forward
/// differences where x^j < h keeps the stencil on the nonnegative orthant.
/// Verification oracle; never used by the allocation dynamics.
inline std::vector<double> finite_diff_gradient(const CostFunction& f,
                                                std::span<const double> x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
    const int m = f.resource_count();
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        const double xj = probe[static_cast<std::size_t>(j)];
        if (xj >= h) {
            probe[static_cast<std::size_t>(j)] = xj + h;
            const double fp = f.evaluate(probe);
            probe[static_cast<std::size_t>(j)] = xj - h;
            const double fm = f.evaluate(probe);
            grad[static_cast<std::size_t>(j)] = (fp - fm) / (2.0 * h);
        } else {
            probe[static_cast<std::size_t>(j)] = xj + h;
            const double fp = f.evaluate(probe);
            probe[static_cast<std::size_t>(j)] = xj;
            const double f0 = f.evaluate(probe);
            grad[static_cast<std::size_t>(j)] = (fp - f0) / h;
        }
        probe[static_cast<std::size_t>(j)] = xj;
    }
    return grad;
}

/// Result of the sampled class-membership check.
///
/// worst_margin is the minimum, over every grid point and resource, of
///   x^j - delta_j * grad_j(x),   delta_j * grad_j(x),
/// and of the positive-semidefiniteness slack min_eig(Hessian) + 1e-8.
/// The class condition holds on the sampled box iff worst_margin > 0.
struct MembershipReport {
    bool holds = false;
    std::vector<double> worst_point;
    double worst_margin = std::numeric_limits<double>::infinity();
};

namespace detail {

// Central-difference Hessian from the analytic gradient, symmetrized.
// Falls back to a forward stencil when a coordinate sits closer to the
// boundary than the step.
inline Eigen::MatrixXd fd_hessian(const CostFunction& f, std::span<const double> x) {
    const int m = f.resource_count();
    Eigen::MatrixXd h_mat(m, m);
    std::vector<double> probe(x.begin(), x.end());
    for (int l = 0; l < m; ++l) {
        const double xl = probe[static_cast<std::size_t>(l)];
        const double h = 1e-5 * std::max(1.0, std::abs(xl));
        std::vector<double> gp, gm;
        double denom;
        if (xl >= h) {
            probe[static_cast<std::size_t>(l)] = xl + h;
            gp = f.gradient(probe);
            probe[static_cast<std::size_t>(l)] = xl - h;
            gm = f.gradient(probe);
            denom = 2.0 * h;
        } else {
            probe[static_cast<std::size_t>(l)] = xl + h;
            gp = f.gradient(probe);
            probe[static_cast<std::size_t>(l)] = xl;
            gm = f.gradient(probe);
            denom = h;
        }
        probe[static_cast<std::size_t>(l)] = xl;
        for (int j = 0; j < m; ++j)
            h_mat(j, l) = (gp[static_cast<std::size_t>(j)] - gm[static_cast<std::size_t>(j)]) / denom;
    }
    return 0.5 * (h_mat + h_mat.transpose());
}

}  // namespace detail

inline constexpr double kPsdSlack = 1e-8;

/// Samples the box (0, box_upper]^m on a regular grid (the origin excluded)
/// and evaluates, at every point, the two per-resource inequalities
/// 0 < delta_j * grad_j(x) < x^j together with convexity (smallest Hessian
/// eigenvalue >= -1e-8, finite-difference Hessian). Sampled, not symbolic.
inline MembershipReport check_membership(const CostFunction& f, std::span<const double> delta,
                                         std::span<const double> box_upper,
                                         int grid_points_per_axis) {
    const int m = f.resource_count();
    {
        std::vector<std::string> violations;
        if (delta.size() != static_cast<std::size_t>(m))
            violations.push_back("delta: expected length " + std::to_string(m));
        if (box_upper.size() != static_cast<std::size_t>(m))
            violations.push_back("box_upper: expected length " + std::to_string(m));
        for (std::size_t j = 0; j < delta.size(); ++j)
            if (!(delta[j] > 0.0)) violations.push_back("delta[" + std::to_string(j) + "]: must be > 0");
        for (std::size_t j = 0; j < box_upper.size(); ++j)
            if (!(box_upper[j] > 0.0))
                violations.push_back("box_upper[" + std::to_string(j) + "]: must be > 0");
        if (grid_points_per_axis < 2)
            violations.push_back("grid_points_per_axis: must be >= 2");
        if (!violations.empty()) throw ConfigError(std::move(violations));
    }

    MembershipReport report;
    report.worst_point.assign(static_cast<std::size_t>(m), 0.0);

    std::vector<int> index(static_cast<std::size_t>(m), 1);  // 1..grid per axis
    std::vector<double> point(static_cast<std::size_t>(m), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;

    const auto consider = [&](double margin) {
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_point = point;
        }
    };

    for (;;) {
        for (int j = 0; j < m; ++j)
            point[static_cast<std::size_t>(j)] =
                box_upper[static_cast<std::size_t>(j)] * static_cast<double>(index[static_cast<std::size_t>(j)]) /
                static_cast<double>(grid_points_per_axis);

        const std::vector<double> grad = f.gradient(point);
        for (int j = 0; j < m; ++j) {
            const double scaled = delta[static_cast<std::size_t>(j)] * grad[static_cast<std::size_t>(j)];
            consider(scaled);                                   // 0 < delta_j grad_j
            consider(point[static_cast<std::size_t>(j)] - scaled);  // delta_j grad_j < x^j
        }

        eig.compute(detail::fd_hessian(f, point), Eigen::EigenvaluesOnly);
        consider(eig.eigenvalues().minCoeff() + kPsdSlack);

        int axis = 0;
        while (axis < m && ++index[static_cast<std::size_t>(axis)] > grid_points_per_axis) {
            index[static_cast<std::size_t>(axis)] = 1;
            ++axis;
        }
        if (axis == m) break;
    }

    report.holds = report.worst_margin > 0.0;
    return report;
}

/// Closed integer interval for a coefficient draw.
struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    bool operator==(const IntRange&) const = default;
};

/// Coefficient ranges of the randomized three-branch camera cost family.
struct CoefficientRanges {
    IntRange a{10, 20};
    IntRange b{25, 35};
    IntRange c{22, 32};
    IntRange d{1, 5};

    bool operator==(const CoefficientRanges&) const = default;

    void validate(const std::string& path, std::vector<std::string>& violations) const {
        const auto check = [&](const IntRange& r, const char* name) {
            if (r.lo > r.hi)
                violations.push_back(path + "." + name + ": empty range [" + std::to_string(r.lo) +
                                     ", " + std::to_string(r.hi) + "]");
            if (r.lo < 0) violations.push_back(path + "." + name + ": must be >= 0");
        };
        check(a, "a");
        check(b, "b");
        check(c, "c");
        check(d, "d");
    }
};

/// Draws one cost function of the three-branch camera family (three
/// resources: memory, storage, bandwidth). The branch is picked uniformly,
/// then a, b, c, d are drawn uniformly from their integer ranges.
///
/// Stream discipline: five draws per call, in the fixed order
/// branch, a, b, c, d, regardless of which coefficients the branch uses.
inline CostFunction sample_paper_cost(Rng& rng, const CoefficientRanges& ranges) {
    {
        std::vector<std::string> violations;
        ranges.validate("ranges", violations);
        if (!violations.empty()) throw ConfigError(std::move(violations));
    }
    const std::int64_t branch = rng.next_int(0, 2);
    const double a = static_cast<double>(rng.next_int(ranges.a.lo, ranges.a.hi));
    const double b = static_cast<double>(rng.next_int(ranges.b.lo, ranges.b.hi));
    const double c = static_cast<double>(rng.next_int(ranges.c.lo, ranges.c.hi));
    const double d = static_cast<double>(rng.next_int(ranges.d.lo, ranges.d.hi));

    std::vector<MonomialTerm> terms;
    switch (branch) {
        case 0:
            terms = {{a, {2, 0, 0}},           {c, {0, 0, 2}},          {a / 2.0, {4, 0, 0}},
                     {2.0 * b, {0, 4, 0}},     {b / 2.0, {0, 6, 0}},    {c / 4.0, {0, 0, 4}},
                     {d / 8.0, {0, 0, 8}}};
            break;
        case 1:
            terms = {{a, {2, 0, 0}}, {b, {0, 2, 0}}, {b / 2.0, {0, 4, 0}}, {1.5 * c, {0, 0, 4}}};
            break;
        default:
            terms = {{b, {0, 2, 0}},        {c, {0, 0, 2}},        {a / 3.0, {6, 0, 0}},
                     {d / 6.0, {0, 6, 0}},  {d / 8.0, {0, 0, 4}}};
            break;
    }
    return CostFunction(3, std::move(terms));
}

}  // namespace aimdalloc
