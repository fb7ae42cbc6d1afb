#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bobw/ftrl.hpp"
#include "bobw/math/rng.hpp"
#include "bobw/pm/analysis.hpp"
#include "bobw/potentials.hpp"

// BOBW learner for globally observable games. FTRL over the Pareto simplex
// with the barrier-pair regularizer
//
//   psi_t(q) = beta_t sum_a (-log q_a - log(1 - q_a)),
//   beta_t   = c1 (k + sum_{s<t} z_s)^{2/3},  z_t = sum_a min{q_ta, 1-q_ta},
//
// and uniform-mixing exploration
//
//   p_t = (1 - gamma_t) q_t + gamma_t 1/k,  gamma_t = sqrt(2) c_G z_t / sqrt(beta_t)
//
// clamped at 1 (the unclamped value can exceed 1 in early rounds; the clamp
// count is logged). The default c1 = (3 c_G / (k log T))^(2/3). Estimates use
// the global-mode in-tree G_circ and all k actions are eligible under the
// uniform mixture.

namespace bobw::pm {

struct GlobalRoundLog {
    std::vector<double> q, p;
    double beta_t = 0.0, gamma_t = 0.0, z_t = 0.0;
    bool gamma_clamped = false;
    int action = -1;
    int symbol = -1;
};

class GlobalPMLearner {
public:
    GlobalPMLearner(const GameAnalysis& analysis, long horizon,
                    std::optional<double> c1_override = std::nullopt)
        : an_(analysis), T_(horizon) {
        if (an_.observability == Observability::NotGlobal)
            throw game_error("GlobalPMLearner: game must be globally observable");
        if (!an_.global_est) throw game_error("GlobalPMLearner: missing global estimators");
        if (horizon < 8) throw game_error("GlobalPMLearner: horizon must be at least 8");
        k_ = an_.game.k;
        c_g_ = an_.global_est->c_g;
        c1_ = c1_override ? *c1_override
                          : std::pow(3.0 * c_g_ / (k_ * std::log(static_cast<double>(horizon))),
                                     2.0 / 3.0);
        if (!(c1_ > 0.0)) throw game_error("GlobalPMLearner: c1 must be positive");
        cum_y_.assign(k_, 0.0);
    }

    long round() const { return round_; }
    double c1() const { return c1_; }
    double c_g() const { return c_g_; }
    long clamp_count() const { return clamps_; }
    const std::vector<double>& cumulative_estimates() const { return cum_y_; }

    double beta_t() const { return c1_ * std::pow(k_ + cum_z_, 2.0 / 3.0); }

    std::vector<double> ftrl_point() {
        if (an_.pareto.size() == 1) {
            std::vector<double> q(k_, 0.0);
            q[an_.pareto.front()] = 1.0;
            return q;
        }
        const double b = beta_t();
        FtrlProblem<BarrierPairPotential> prob{cum_y_, std::vector<double>(k_, b),
                                               SimplexOnSupport{an_.pareto},
                                               BarrierPairPotential{}};
        auto sol = solve(prob, last_mu_);
        last_mu_ = sol.dual;
        double mass = 0.0;
        for (double v : sol.point) mass += v;
        for (double& v : sol.point) v /= mass;
        return sol.point;
    }

    // z_t = sum_a min{q_a, 1-q_a}; gamma_t = min{1, sqrt(2) c_G z_t / sqrt(beta_t)};
    // p = (1 - gamma_t) q + gamma_t / k.
    GlobalRoundLog mix_and_rate(const std::vector<double>& q) const {
        GlobalRoundLog log;
        log.q = q;
        log.beta_t = beta_t();
        double z = 0.0;
        for (int a = 0; a < k_; ++a) z += std::min(q[a], 1.0 - q[a]);
        log.z_t = z;
        const double raw = std::sqrt(2.0) * c_g_ * z / std::sqrt(log.beta_t);
        log.gamma_t = std::min(1.0, raw);
        log.gamma_clamped = raw > 1.0;
        log.p.assign(k_, 0.0);
        for (int a = 0; a < k_; ++a)
            log.p[a] = (1.0 - log.gamma_t) * q[a] + log.gamma_t / k_;
        return log;
    }

    GlobalRoundLog play_round(int outcome_x, Rng& rng) {
        if (round_ >= T_) throw std::runtime_error("GlobalPMLearner: horizon exhausted");
        GlobalRoundLog log = mix_and_rate(ftrl_point());
        if (log.gamma_clamped) ++clamps_;

        log.action = rng.sample_index(log.p);
        log.symbol = an_.game.symbol_at(log.action, outcome_x);
        if (log.p[log.action] > 0.0) {
            const auto& g0 = an_.global_est->g_circ;
            for (int b : an_.pareto)
                cum_y_[b] += g0.at(log.action, log.symbol, b) / log.p[log.action];
        }
        cum_z_ += log.z_t;
        ++round_;
        return log;
    }

private:
    const GameAnalysis& an_;
    long T_;
    int k_ = 0;
    double c_g_ = 1.0, c1_ = 1.0, cum_z_ = 0.0;
    std::vector<double> cum_y_;
    long round_ = 0, clamps_ = 0;
    std::optional<double> last_mu_;
};

} // namespace bobw::pm
