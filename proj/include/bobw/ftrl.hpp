#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bobw/potentials.hpp"

// Exact solver for separable-regularizer FTRL subproblems
//
//   minimize  <linear, q> + sum_a weights_a * phi(q_a)
//   subject   sum_a q_a = 1 on a restricted support (probability simplex),
//         or  sum_a q_a = m on [0,1]^d (m-set polytope).
//
// Per-coordinate stationarity weights_a phi'(q_a) + linear_a = mu reduces the
// problem to a one-dimensional search for the multiplier mu; the barrier
// terms of the potential keep every coordinate strictly inside (0,1), so the
// box constraints of the m-set polytope never need explicit handling.

namespace bobw {

struct SimplexOnSupport {
    std::vector<int> support; // indices with nonzero mass, everything else is exactly 0
};

struct MSetBox {
    int d = 0;
    int m = 0;
};

using FtrlRegion = std::variant<SimplexOnSupport, MSetBox>;

template <class Pot>
struct FtrlProblem {
    std::vector<double> linear;  // cumulative estimated losses (+ optimistic prediction)
    std::vector<double> weights; // per-coordinate regularization strength, all > 0
    FtrlRegion region;
    Pot potential;
};

struct FtrlSolution {
    std::vector<double> point;
    double dual = 0.0;         // Lagrange multiplier of the sum constraint
    double kkt_residual = 0.0; // max_a |w_a phi'(q_a) + linear_a - mu| over active coords
};

namespace detail {

template <class Pot>
struct FtrlActive {
    const FtrlProblem<Pot>& p;
    std::vector<int> active;
    double target;

    explicit FtrlActive(const FtrlProblem<Pot>& problem) : p(problem) {
        const std::size_t n = p.linear.size();
        if (p.weights.size() != n)
            throw std::invalid_argument("ftrl: linear/weights size mismatch");
        for (double w : p.weights)
            if (!(w > 0.0)) throw std::invalid_argument("ftrl: weights must be positive");
        for (double l : p.linear)
            if (!std::isfinite(l)) throw std::invalid_argument("ftrl: non-finite linear term");

        if (const auto* s = std::get_if<SimplexOnSupport>(&p.region)) {
            if (s->support.empty()) throw std::invalid_argument("ftrl: empty support");
            for (int i : s->support)
                if (i < 0 || static_cast<std::size_t>(i) >= n)
                    throw std::invalid_argument("ftrl: support index out of range");
            active = s->support;
            target = 1.0;
        } else {
            const auto& box = std::get<MSetBox>(p.region);
            if (box.d != static_cast<int>(n) || box.m < 1 || box.m > box.d)
                throw std::invalid_argument("ftrl: need 1 <= m <= d matching vector size");
            active.resize(n);
            std::iota(active.begin(), active.end(), 0);
            target = static_cast<double>(box.m);
        }
    }

    double coord(double mu, int a) const {
        return p.potential.grad_inverse((mu - p.linear[a]) / p.weights[a]);
    }

    double mass(double mu) const {
        double s = 0.0;
        for (int a : active) s += coord(mu, a);
        return s;
    }

    double mass_slope(double mu) const {
        double s = 0.0;
        for (int a : active)
            s += 1.0 / (p.weights[a] * p.potential.curvature(coord(mu, a)));
        return s;
    }
};

} // namespace detail

// Finds mu with |sum_a q_a(mu) - target| <= 1e-10, expanding the given
// bracket by doubling (at most 200 times per side) when it does not already
// straddle the target mass.
template <class Pot>
double dual_search(const FtrlProblem<Pot>& problem, double mu_lo, double mu_hi) {
    detail::FtrlActive<Pot> ctx(problem);
    if (mu_lo > mu_hi) std::swap(mu_lo, mu_hi);

    double step = std::max(1.0, mu_hi - mu_lo);
    int doublings = 0;
    while (ctx.mass(mu_lo) >= ctx.target) {
        mu_lo -= step;
        step *= 2.0;
        if (++doublings > 200) throw std::runtime_error("dual_search: lower bracket not expandable");
    }
    step = std::max(1.0, mu_hi - mu_lo);
    while (ctx.mass(mu_hi) <= ctx.target) {
        mu_hi += step;
        step *= 2.0;
        if (++doublings > 200) throw std::runtime_error("dual_search: upper bracket not expandable");
    }

    // Bisection narrows the bracket, Newton on the mass residual finishes.
    double mu = 0.5 * (mu_lo + mu_hi);
    const double span = std::max(1.0, std::abs(mu_lo) + std::abs(mu_hi));
    while (mu_hi - mu_lo > 1e-8 * span) {
        mu = 0.5 * (mu_lo + mu_hi);
        if (ctx.mass(mu) < ctx.target)
            mu_lo = mu;
        else
            mu_hi = mu;
    }
    mu = 0.5 * (mu_lo + mu_hi);
    for (int it = 0; it < 60; ++it) {
        const double r = ctx.mass(mu) - ctx.target;
        if (std::abs(r) <= 1e-10) return mu;
        if (r < 0.0)
            mu_lo = std::max(mu_lo, mu);
        else
            mu_hi = std::min(mu_hi, mu);
        const double slope = ctx.mass_slope(mu);
        double next = mu - r / slope;
        if (!(next > mu_lo) || !(next < mu_hi)) next = 0.5 * (mu_lo + mu_hi);
        mu = next;
    }
    if (std::abs(ctx.mass(mu) - ctx.target) > 1e-10)
        throw std::runtime_error("dual_search: did not reach the mass tolerance");
    return mu;
}

template <class Pot>
FtrlSolution solve(const FtrlProblem<Pot>& problem, std::optional<double> mu_hint = std::nullopt) {
    detail::FtrlActive<Pot> ctx(problem);
    const std::size_t n = problem.linear.size();
    FtrlSolution sol;
    sol.point.assign(n, 0.0);

    // Fully constrained regions: a singleton support, or m = d.
    if (ctx.active.size() == 1 && ctx.target == 1.0) {
        sol.point[ctx.active[0]] = 1.0;
        sol.dual = std::numeric_limits<double>::quiet_NaN();
        return sol;
    }
    if (const auto* box = std::get_if<MSetBox>(&problem.region); box && box->m == box->d) {
        std::fill(sol.point.begin(), sol.point.end(), 1.0);
        sol.dual = std::numeric_limits<double>::quiet_NaN();
        return sol;
    }

    double mu0;
    if (mu_hint) {
        mu0 = *mu_hint;
    } else {
        // Stationarity at the uniform feasible point gives a useful center.
        const double u = ctx.target / static_cast<double>(ctx.active.size());
        double acc = 0.0;
        for (int a : ctx.active)
            acc += problem.linear[a] + problem.weights[a] * problem.potential.grad(u);
        mu0 = acc / static_cast<double>(ctx.active.size());
    }
    const double mu = dual_search(problem, mu0 - 1.0, mu0 + 1.0);

    sol.dual = mu;
    double res = 0.0;
    for (int a : ctx.active) {
        const double q = ctx.coord(mu, a);
        sol.point[a] = q;
        res = std::max(res, std::abs(problem.weights[a] * problem.potential.grad(q) +
                                     problem.linear[a] - mu));
    }
    sol.kkt_residual = res;
    return sol;
}

// Objective value at a feasible point; handy for oracle comparisons.
template <class Pot>
double ftrl_objective(const FtrlProblem<Pot>& problem, const std::vector<double>& q) {
    double v = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (q[a] == 0.0) continue;
        v += problem.linear[a] * q[a] + problem.weights[a] * problem.potential.eval(q[a]);
    }
    return v;
}

} // namespace bobw
