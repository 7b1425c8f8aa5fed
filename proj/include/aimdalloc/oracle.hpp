#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "aimdalloc/cost_model.hpp"
#include "aimdalloc/errors.hpp"

namespace aimdalloc {

/// Centralized minimizer of the social cost, used as ground truth for the
/// distributed dynamics.
struct OracleSolution {
    std::vector<std::vector<double>> x_star;  // n rows of m
    std::int64_t iterations = 0;
    std::vector<double> kkt_residual;         // per resource
    bool converged = false;
};

/// Euclidean projection of v onto {w >= 0, sum w = total}, by the
/// sort-and-threshold rule: with v sorted descending and cumulative sums
/// cum_i, the threshold is tau = (cum_rho - total) / rho for the largest rho
/// with v_(rho) - (cum_rho - total) / rho > 0, and w = max(v - tau, 0).
inline std::vector<double> project_block_simplex(std::span<const double> v, double total) {
    if (!(total > 0.0)) throw std::invalid_argument("project_block_simplex: total must be > 0");
    const std::size_t n = v.size();
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());

    double tau = 0.0;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += sorted[i];
        const double candidate = (cum - total) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) tau = candidate;
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
    return out;
}

/// Scale-normalized consensus gap of the partial derivatives, per resource:
/// over agents whose allocation exceeds active_eps_j,
///   (max_i grad_j - min_i grad_j) / max(1, mean_i grad_j).
/// Zero means exact consensus; +infinity flags a resource with no active agent.
inline std::vector<double> kkt_residual(const std::vector<CostFunction>& costs,
                                        const std::vector<std::vector<double>>& x,
                                        std::span<const double> active_eps) {
    const std::size_t n = costs.size();
    const std::size_t m = active_eps.size();
    std::vector<double> lo(m, std::numeric_limits<double>::infinity());
    std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
    std::vector<double> sum(m, 0.0);
    std::vector<std::size_t> active(m, 0);

    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> grad = costs[i].gradient(x[i]);
        for (std::size_t j = 0; j < m; ++j) {
            if (x[i][j] > active_eps[j]) {
                lo[j] = std::min(lo[j], grad[j]);
                hi[j] = std::max(hi[j], grad[j]);
                sum[j] += grad[j];
                ++active[j];
            }
        }
    }

    std::vector<double> residual(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (active[j] == 0) {
            residual[j] = std::numeric_limits<double>::infinity();
        } else {
            const double mean = sum[j] / static_cast<double>(active[j]);
            residual[j] = (hi[j] - lo[j]) / std::max(1.0, mean);
        }
    }
    return residual;
}

inline std::vector<double> kkt_residual(const std::vector<CostFunction>& costs,
                                        const std::vector<std::vector<double>>& x,
                                        double active_eps) {
    const std::size_t m = x.empty() ? 0 : x.front().size();
    return kkt_residual(costs, x, std::vector<double>(m, active_eps));
}

namespace detail {

inline double social_cost(const std::vector<CostFunction>& costs,
                          const std::vector<std::vector<double>>& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) total += costs[i].evaluate(x[i]);
    return total;
}

}  // namespace detail

/// Projected gradient descent on the social cost over the product of
/// per-resource simplices {sum_i x_i^j = C^j, x >= 0}.
///
/// Starts from the uniform split, takes gradient steps followed by a
/// per-resource block projection, and backtracks (halving) until the
/// sufficient-decrease condition
///   F(x+) <= F(x) - (1e-4 / t) * ||x+ - x||^2
/// holds. Terminates when the consensus gap drops below tol on every
/// resource, or at max_iter.
inline OracleSolution solve_centralized(const std::vector<CostFunction>& costs,
                                        std::span<const double> capacities, double tol = 1e-6,
                                        std::int64_t max_iter = 200000,
                                        std::vector<double>* objective_history = nullptr) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_centralized: tol must be > 0");
    const std::size_t n = costs.size();
    const std::size_t m = capacities.size();
    if (n == 0) throw std::invalid_argument("solve_centralized: no cost functions");

    std::vector<double> active_eps(m);
    for (std::size_t j = 0; j < m; ++j)
        active_eps[j] = 1e-6 * capacities[j] / static_cast<double>(n);

    OracleSolution sol;
    sol.x_star.assign(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            sol.x_star[i][j] = capacities[j] / static_cast<double>(n);

    const auto check_finite = [&](double value, const std::vector<std::vector<double>>& at) {
        if (!std::isfinite(value)) {
            std::vector<double> flat;
            for (const auto& row : at) flat.insert(flat.end(), row.begin(), row.end());
            throw SolverError("solve_centralized: non-finite cost or gradient", std::move(flat));
        }
    };

    std::vector<std::vector<double>> grad(n, std::vector<double>(m, 0.0));
    std::vector<std::vector<double>> candidate(n, std::vector<double>(m, 0.0));
    std::vector<double> column(n, 0.0);

    double step = 1.0;
    double objective = detail::social_cost(costs, sol.x_star);
    check_finite(objective, sol.x_star);
    if (objective_history) objective_history->push_back(objective);

    for (std::int64_t iter = 0; iter < max_iter; ++iter) {
        sol.kkt_residual = kkt_residual(costs, sol.x_star, active_eps);
        if (*std::max_element(sol.kkt_residual.begin(), sol.kkt_residual.end()) < tol) {
            sol.iterations = iter;
            sol.converged = true;
            return sol;
        }

        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = costs[i].gradient(sol.x_star[i]);
            for (double g : grad[i]) check_finite(g, sol.x_star);
        }

        double t = step;
        for (;;) {
            for (std::size_t j = 0; j < m; ++j) {
                for (std::size_t i = 0; i < n; ++i) column[i] = sol.x_star[i][j] - t * grad[i][j];
                const std::vector<double> projected = project_block_simplex(column, capacities[j]);
                for (std::size_t i = 0; i < n; ++i) candidate[i][j] = projected[i];
            }
            double move_sq = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    const double d = candidate[i][j] - sol.x_star[i][j];
                    move_sq += d * d;
                }
            if (move_sq == 0.0) {
                // Fixed point of the projected step: stationary for every t.
                sol.iterations = iter;
                sol.converged = *std::max_element(sol.kkt_residual.begin(),
                                                  sol.kkt_residual.end()) < tol;
                return sol;
            }
            const double trial = detail::social_cost(costs, candidate);
            check_finite(trial, candidate);
            if (trial <= objective - 1e-4 / t * move_sq) {
                objective = trial;
                break;
            }
            t *= 0.5;
            if (t < 1e-18) {
                sol.iterations = iter;
                sol.converged = false;
                return sol;
            }
        }
        sol.x_star.swap(candidate);
        step = 2.0 * t;  // warm-start the next line search
        if (objective_history) objective_history->push_back(objective);
    }

    sol.kkt_residual = kkt_residual(costs, sol.x_star, active_eps);
    sol.iterations = max_iter;
    sol.converged = *std::max_element(sol.kkt_residual.begin(), sol.kkt_residual.end()) < tol;
    return sol;
}

}  // namespace aimdalloc
