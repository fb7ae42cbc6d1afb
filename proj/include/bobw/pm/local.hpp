#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bobw/ftrl.hpp"
#include "bobw/math/rng.hpp"
#include "bobw/pm/analysis.hpp"
#include "bobw/potentials.hpp"

// BOBW learner for locally observable games. Each round:
//
//   q_t  = argmin_{q in P_Pi} <cum_y, q> + sum_a beta_ta phi(q_a),
//          phi(x) = (-log x + x - 1) + gamma ((1-x) log(1-x) + x),
//   (p_t, G_t) ~= argmin over p in R(q) = {p : p >= q/2} and G in the affine
//          family G_circ + span(H-nullspace over Pareto rows) of
//          max_x [ (p-q)^T L e_x
//                  + sum_b beta_b sum_a p_a S_{q_b}(G(a,Phi_ax)_b / (beta_b p_a)) ],
//   play A_t ~ p_t, observe sigma_t, accumulate y_hat = G_t(A_t,sigma_t)/p_tA.
//
// Learning rates: alpha_ta = min{q_ta, (1-q_ta)/(gamma q_ta)},
// beta'_ta = c sqrt(alpha_0 + sum_{s<t} alpha_sa / gamma), beta = max{4mk, beta'},
// with alpha_0 = gamma^{-3/2} + eps and c = 2mk.
//
// The ExO program is solved by projected subgradient on the max-of-convex
// objective with p parametrized as p = q/2 + s, s in the half-scaled simplex
// over Pareto rows, warm-started from the previous round. The starting point
// (p = q, G = G_circ) is always feasible and the returned solution is never
// worse than it.

namespace bobw::pm {

struct ExOSolution {
    std::vector<double> p;        // length k
    std::vector<double> g_coeffs; // coordinates in the nullspace basis
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    bool fell_back = false; // no improvement over the starting point
};

// Evaluation context for the ExO objective of one round: fixed q and beta,
// G parametrized as G_circ + sum_j c_j N_j over Pareto rows only (non-Pareto
// actions are never played, so mass there would break unbiasedness).
class ExOProblem {
public:
    ExOProblem(const GameAnalysis& an, const std::vector<GTensor>& pareto_row_basis,
               std::vector<double> q, std::vector<double> beta, double gamma)
        : an_(an), game_(an.game), q_(std::move(q)), beta_(std::move(beta)),
          pot_(PotentialKind::HybridLocal, gamma), basis_(pareto_row_basis) {
        if (!an_.local_est) throw game_error("ExOProblem: game is not locally observable");
        np_ = static_cast<int>(an_.pareto.size());
        nc_ = static_cast<int>(basis_.size());
        for (int b : an_.pareto) grad_q_.push_back(pot_.grad_ext(q_[b]));
    }

    int coeff_count() const { return nc_; }
    const std::vector<int>& pareto() const { return an_.pareto; }

    // G(a, Phi_ax)_b for the given coefficients; a, b are Pareto indices.
    double g_value(const std::vector<double>& c, int a, int x, int b) const {
        const int sym = game_.symbol_at(a, x);
        double v = an_.local_est->g_circ.at(a, sym, b);
        for (int j = 0; j < nc_; ++j) v += c[j] * basis_[j].at(a, sym, b);
        return v;
    }

    double objective(const std::vector<double>& p, const std::vector<double>& c) const {
        return eval(p, c, nullptr, nullptr, nullptr);
    }

    // Value together with the subgradient of the active branch; grad_p has
    // length k (entries only on Pareto rows), grad_c length nc.
    double objective_with_subgradient(const std::vector<double>& p, const std::vector<double>& c,
                                      std::vector<double>& grad_p,
                                      std::vector<double>& grad_c) const {
        grad_p.assign(q_.size(), 0.0);
        grad_c.assign(nc_, 0.0);
        int active = -1;
        const double v = eval(p, c, &active, &grad_p, &grad_c);
        return v;
    }

private:
    double eval(const std::vector<double>& p, const std::vector<double>& c, int* active_out,
                std::vector<double>* grad_p, std::vector<double>* grad_c) const {
        double best = -std::numeric_limits<double>::infinity();
        int active = -1;
        std::vector<double> sval(np_ * np_), sslope(np_ * np_);
        std::vector<double> best_sval, best_sslope;
        for (int x = 0; x < game_.d; ++x) {
            double v = 0.0;
            for (int ai = 0; ai < np_; ++ai) {
                const int a = an_.pareto[ai];
                v += (p[a] - q_[a]) * game_.loss_at(a, x);
            }
            for (int bi = 0; bi < np_; ++bi) {
                const int b = an_.pareto[bi];
                for (int ai = 0; ai < np_; ++ai) {
                    const int a = an_.pareto[ai];
                    const double z = g_value(c, a, x, b) / (beta_[b] * p[a]);
                    const auto sv = stability(bi, z);
                    sval[bi * np_ + ai] = sv.value;
                    sslope[bi * np_ + ai] = sv.slope;
                    v += beta_[b] * p[a] * sv.value;
                }
            }
            if (v > best) {
                best = v;
                active = x;
                if (grad_p) {
                    best_sval = sval;
                    best_sslope = sslope;
                }
            }
        }
        if (active_out) *active_out = active;
        if (grad_p) {
            const int x = active;
            for (int ai = 0; ai < np_; ++ai) {
                const int a = an_.pareto[ai];
                double g = game_.loss_at(a, x);
                for (int bi = 0; bi < np_; ++bi) {
                    const int b = an_.pareto[bi];
                    const double z = g_value(c, a, x, b) / (beta_[b] * p[a]);
                    // d/dp [beta p S(g/(beta p))] = beta (S(z) - z S'(z))
                    g += beta_[b] *
                         (best_sval[bi * np_ + ai] - z * best_sslope[bi * np_ + ai]);
                }
                (*grad_p)[a] = g;
            }
            for (int j = 0; j < nc_; ++j) {
                double g = 0.0;
                for (int bi = 0; bi < np_; ++bi) {
                    const int b = an_.pareto[bi];
                    for (int ai = 0; ai < np_; ++ai) {
                        const int a = an_.pareto[ai];
                        const int sym = game_.symbol_at(a, x);
                        g += best_sslope[bi * np_ + ai] * basis_[j].at(a, sym, b);
                    }
                }
                (*grad_c)[j] = g;
            }
        }
        return best;
    }

    StabilityValue stability(int bi, double z) const {
        if (z == 0.0) return {0.0, 0.0}; // maximizer is y = q
        const int b = an_.pareto[bi];
        // inline primal stability with the cached phi'(q_b)
        const double y = pot_.grad_inverse(grad_q_[bi] - z);
        const double val = (q_[b] - y) * z - pot_.bregman_ext(y, q_[b]);
        return {val, q_[b] - y};
    }

    const GameAnalysis& an_;
    const PMGame& game_;
    std::vector<double> q_, beta_;
    Potential pot_;
    const std::vector<GTensor>& basis_;
    std::vector<double> grad_q_;
    int np_ = 0, nc_ = 0;
};

// ExO objective at an explicit estimation function G (no parametrization):
// max_x [(p-q)^T L e_x + sum_b beta_b sum_a p_a S_{q_b}(G(a,Phi_ax)_b/(beta_b p_a))]
// with sums over Pareto rows.
inline double exo_objective_tensor(const GameAnalysis& an, const std::vector<double>& q,
                                   const std::vector<double>& beta, double gamma,
                                   const std::vector<double>& p, const GTensor& g) {
    const Potential pot(PotentialKind::HybridLocal, gamma);
    const auto& game = an.game;
    double best = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < game.d; ++x) {
        double v = 0.0;
        for (int a : an.pareto) v += (p[a] - q[a]) * game.loss_at(a, x);
        for (int b : an.pareto)
            for (int a : an.pareto) {
                if (p[a] <= 0.0) continue;
                const double z = g.at(a, game.symbol_at(a, x), b) / (beta[b] * p[a]);
                v += beta[b] * p[a] * pot.stability(q[b], z);
            }
        best = std::max(best, v);
    }
    return best;
}

namespace detail {

// Euclidean projection onto {s >= 0, sum s = mass} over the given indices.
inline void project_scaled_simplex(std::vector<double>& s, const std::vector<int>& idx,
                                   double mass) {
    std::vector<double> vals;
    vals.reserve(idx.size());
    for (int i : idx) vals.push_back(s[i]);
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double acc = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        acc += sorted[j];
        const double cand = (acc - mass) / static_cast<double>(j + 1);
        if (sorted[j] - cand > 0) theta = cand;
    }
    for (std::size_t j = 0; j < idx.size(); ++j) s[idx[j]] = std::max(0.0, vals[j] - theta);
}

} // namespace detail

struct ExOSolverOptions {
    int iteration_cap = 2000;
    int stall_window = 60;       // stop after this many iterations without improvement
    double stall_tol = 1e-9;     // relative improvement threshold
};

// Projected subgradient with diminishing steps on the max-of-convex ExO
// objective. `warm` optionally provides last round's (p, coeffs).
inline ExOSolution solve_exo(const ExOProblem& prob, const std::vector<double>& q,
                             const ExOSolution* warm = nullptr,
                             const ExOSolverOptions& opt = {}) {
    const auto& pareto = prob.pareto();
    const int k = static_cast<int>(q.size());
    const int nc = prob.coeff_count();

    auto to_p = [&](const std::vector<double>& s) {
        std::vector<double> p(k, 0.0);
        for (int a : pareto) p[a] = 0.5 * q[a] + s[a];
        return p;
    };

    // start: s = q/2 (p = q), coeffs = 0; or the warm solution re-projected
    std::vector<double> s(k, 0.0), coeffs(nc, 0.0);
    for (int a : pareto) s[a] = 0.5 * q[a];
    if (warm && static_cast<int>(warm->g_coeffs.size()) == nc && !warm->p.empty()) {
        for (int a : pareto) s[a] = warm->p[a] - 0.5 * q[a];
        detail::project_scaled_simplex(s, pareto, 0.5);
        coeffs = warm->g_coeffs;
    }

    ExOSolution best;
    best.p = to_p(s);
    best.g_coeffs = coeffs;
    double reference_value; // at the always-feasible point (p = q, G = G_circ)
    {
        std::vector<double> s0(k, 0.0), c0(nc, 0.0);
        for (int a : pareto) s0[a] = 0.5 * q[a];
        reference_value = prob.objective(to_p(s0), c0);
        const double fw = prob.objective(best.p, best.g_coeffs);
        if (!(fw < reference_value)) {
            best.p = to_p(s0);
            best.g_coeffs = c0;
            best.value = reference_value;
            s = s0;
            coeffs = c0;
        } else {
            best.value = fw;
        }
    }

    std::vector<double> gp, gc;
    int since_improve = 0;
    int it = 0;
    for (; it < opt.iteration_cap; ++it) {
        const double f = prob.objective_with_subgradient(to_p(s), coeffs, gp, gc);
        if (f < best.value * (1.0 - opt.stall_tol) - opt.stall_tol) {
            best.value = f;
            best.p = to_p(s);
            best.g_coeffs = coeffs;
            since_improve = 0;
        } else if (++since_improve >= opt.stall_window) {
            best.converged = true;
            break;
        }

        double gnorm2 = 0.0;
        for (int a : pareto) gnorm2 += gp[a] * gp[a];
        for (double g : gc) gnorm2 += g * g;
        const double gnorm = std::sqrt(gnorm2);
        if (!(gnorm > 0.0) || !std::isfinite(gnorm)) break;

        const double step = 0.25 * std::max(0.05, std::min(1.0, std::abs(best.value))) /
                            (gnorm * std::sqrt(1.0 + it));
        for (int a : pareto) s[a] -= step * gp[a];
        detail::project_scaled_simplex(s, pareto, 0.5);
        for (int j = 0; j < nc; ++j) coeffs[j] -= step * gc[j];
    }
    best.iterations = it;
    // fell back: nothing beat the reference point (p = q, G = G_circ)
    best.fell_back = !(best.value < reference_value - 1e-15);
    return best;
}

struct LocalRoundLog {
    std::vector<double> q, p;
    int action = -1;
    int symbol = -1;
    bool exo_converged = true;
    bool exo_fell_back = false;
};

class LocalPMLearner {
public:
    LocalPMLearner(const GameAnalysis& analysis, long horizon, double epsilon = 1e-3)
        : an_(analysis), T_(horizon), epsilon_(epsilon) {
        if (an_.observability != Observability::Locally)
            throw game_error("LocalPMLearner: game must be locally observable");
        if (horizon < 8) throw game_error("LocalPMLearner: horizon must be at least 8");
        gamma_ = std::log(static_cast<double>(horizon));
        k_ = an_.game.k;
        c_ = 2.0 * an_.m * k_;
        alpha0_ = std::pow(gamma_, -1.5) + epsilon_;
        cum_y_.assign(k_, 0.0);
        cum_alpha_.assign(k_, 0.0);
        pareto_basis_ = h_nullspace_basis(an_.game, an_.pareto, an_.pareto);
    }

    double gamma() const { return gamma_; }
    long round() const { return round_; }
    const std::vector<double>& cumulative_estimates() const { return cum_y_; }
    const std::vector<double>& cumulative_alpha() const { return cum_alpha_; }
    const std::vector<GTensor>& pareto_row_basis() const { return pareto_basis_; }
    long fallback_count() const { return fallbacks_; }
    long nonconverged_count() const { return nonconverged_; }

    std::vector<double> beta_prime() const {
        std::vector<double> b(k_, 0.0);
        for (int a : an_.pareto)
            b[a] = c_ * std::sqrt(alpha0_ + cum_alpha_[a] / gamma_);
        return b;
    }

    std::vector<double> beta() const {
        auto b = beta_prime();
        const double floor = 4.0 * an_.m * k_;
        for (int a : an_.pareto) b[a] = std::max(floor, b[a]);
        return b;
    }

    std::vector<double> ftrl_point() {
        FtrlProblem<Potential> prob{cum_y_, beta(), SimplexOnSupport{an_.pareto},
                                    Potential(PotentialKind::HybridLocal, gamma_)};
        auto sol = solve(prob, last_mu_);
        if (an_.pareto.size() > 1) last_mu_ = sol.dual;
        double mass = 0.0;
        for (double v : sol.point) mass += v;
        for (double& v : sol.point) v /= mass;
        return sol.point;
    }

    // alpha_ta = min{q_ta, (1-q_ta)/(gamma q_ta)} accumulated per action.
    void learning_rate_update(const std::vector<double>& q) {
        for (int a : an_.pareto)
            if (q[a] > 0.0)
                cum_alpha_[a] += std::min(q[a], (1.0 - q[a]) / (gamma_ * q[a]));
    }

    LocalRoundLog play_round(int outcome_x, Rng& rng) {
        if (round_ >= T_) throw std::runtime_error("LocalPMLearner: horizon exhausted");
        LocalRoundLog log;
        log.q = ftrl_point();

        if (an_.pareto.size() == 1) {
            log.p = log.q;
            log.action = an_.pareto.front();
            log.symbol = an_.game.symbol_at(log.action, outcome_x);
            learning_rate_update(log.q);
            ++round_;
            return log;
        }

        ExOProblem prob(an_, pareto_basis_, log.q, beta(), gamma_);
        ExOSolverOptions opt;
        opt.iteration_cap = exo_iteration_cap;
        opt.stall_window = exo_stall_window;
        warm_ = solve_exo(prob, log.q, round_ > 0 ? &warm_ : nullptr, opt);
        log.p = warm_.p;
        log.exo_converged = warm_.converged;
        log.exo_fell_back = warm_.fell_back;
        if (warm_.fell_back) ++fallbacks_;
        if (!warm_.converged) ++nonconverged_;

        std::vector<double> weights(k_, 0.0);
        for (int a : an_.pareto) weights[a] = log.p[a];
        log.action = rng.sample_index(weights);
        log.symbol = an_.game.symbol_at(log.action, outcome_x);

        for (int b : an_.pareto)
            cum_y_[b] += prob.g_value(warm_.g_coeffs, log.action, outcome_x, b) /
                         log.p[log.action];

        learning_rate_update(log.q);
        ++round_;
        return log;
    }

    int exo_iteration_cap = 2000;
    int exo_stall_window = 60;

private:
    const GameAnalysis& an_;
    long T_;
    double epsilon_, gamma_ = 0.0, c_ = 0.0, alpha0_ = 0.0;
    int k_ = 0;
    std::vector<double> cum_y_, cum_alpha_;
    std::vector<GTensor> pareto_basis_;
    long round_ = 0, fallbacks_ = 0, nonconverged_ = 0;
    std::optional<double> last_mu_;
    ExOSolution warm_;
};

} // namespace bobw::pm
