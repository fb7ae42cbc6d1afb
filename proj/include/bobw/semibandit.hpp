#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bobw/ftrl.hpp"
#include "bobw/math/rng.hpp"
#include "bobw/math/simplex_lp.hpp"
#include "bobw/potentials.hpp"

// LBINFV for combinatorial semi-bandits: optimistic FTRL over conv(A) with
// the hybrid regularizer
//
//   psi_t(x) = sum_i beta_i(t) phi(x_i),
//   phi(z)   = z - 1 - log z + gamma (z + (1-z) log(1-z)),  gamma = log T,
//
// least-squares or gradient-descent optimistic predictions m(t), the
// unbiased estimator l_hat_i = m_i + (a_i/x_i)(l_i - m_i), and adaptive
// regularization
//
//   beta_i(t) = sqrt((1+eps)^2 + (1/gamma) sum_{s<t} alpha_i(s)),
//   alpha_i(t) = a_i (l_i - m_i)^2 min{1, 2(1-x_i)/(x_i^2 gamma)}.
//
// Each round the fractional point x(t) is decomposed into a convex
// combination of actions and one atom is sampled, so E[a(t)|x(t)] = x(t).

namespace bobw {

struct MSetActions {
    int m = 1; // actions are all 0/1 vectors with exactly m ones
};

struct ExplicitVertexActions {
    std::vector<std::vector<int>> vertices; // 0/1 vectors
};

using SemiBanditActionSet = std::variant<MSetActions, ExplicitVertexActions>;

struct LsPredictor {};
struct GdPredictor {
    double eta = 0.25; // in (0, 1/2)
};
using SemiBanditPredictor = std::variant<LsPredictor, GdPredictor>;

struct DecompositionAtom {
    double weight;
    std::vector<int> action;
};

// Greedy Caratheodory decomposition on the m-set polytope: repeatedly pick
// the m largest residual coordinates (lowest index on ties) and subtract the
// largest feasible multiple of that action. Terminates within d iterations.
inline std::vector<DecompositionAtom> decompose_mset(const std::vector<double>& x, int m) {
    const int d = static_cast<int>(x.size());
    if (m < 1 || m > d) throw std::invalid_argument("decompose_mset: need 1 <= m <= d");
    std::vector<double> r = x;
    double rho = 1.0;
    std::vector<DecompositionAtom> atoms;

    std::vector<int> order(d);
    for (int it = 0; it < d + 2 && rho > 1e-14; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return r[i] > r[j]; });
        std::vector<int> action(d, 0);
        double min_in = 1e300, max_out = 0.0;
        for (int i = 0; i < d; ++i) {
            if (i < m) {
                action[order[i]] = 1;
                min_in = std::min(min_in, r[order[i]]);
            } else {
                max_out = std::max(max_out, r[order[i]]);
            }
        }
        double lam = std::min(rho, std::min(min_in, rho - max_out));
        if (!(lam > 0.0)) {
            if (rho <= 1e-10) break;
            throw std::runtime_error("decompose_mset: stalled; x outside conv(A)?");
        }
        for (int i = 0; i < d; ++i)
            if (action[i]) r[i] = std::max(0.0, r[i] - lam);
        rho -= lam;
        atoms.push_back({lam, std::move(action)});
    }

    double res = std::abs(rho);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (const auto& at : atoms) acc += at.weight * at.action[i];
        res = std::max(res, std::abs(acc - x[i]));
    }
    if (res > 1e-10) throw std::runtime_error("decompose_mset: residual not driven to zero");
    return atoms;
}

// Decomposition over an explicit vertex list via a feasibility LP; a basic
// feasible solution has at most d+1 atoms.
inline std::vector<DecompositionAtom> decompose_vertices(const std::vector<double>& x,
                                                         const std::vector<std::vector<int>>& verts) {
    const int d = static_cast<int>(x.size());
    const int nj = static_cast<int>(verts.size());
    LinearProgram lp;
    std::vector<int> lam(nj);
    for (int j = 0; j < nj; ++j) lam[j] = lp.add_variable(0.0, true);
    for (int i = 0; i < d; ++i) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < nj; ++j)
            if (verts[j][i]) row.push_back({lam[j], 1.0});
        lp.add_constraint(row, LpRelation::Equal, x[i]);
    }
    std::vector<std::pair<int, double>> ones;
    for (int j = 0; j < nj; ++j) ones.push_back({lam[j], 1.0});
    lp.add_constraint(ones, LpRelation::Equal, 1.0);
    const auto res = lp.solve();
    if (res.status != LpStatus::Optimal)
        throw std::runtime_error("decompose_vertices: x outside conv(A)");
    std::vector<DecompositionAtom> atoms;
    for (int j = 0; j < nj; ++j)
        if (res.x[lam[j]] > 1e-12) atoms.push_back({res.x[lam[j]], verts[j]});
    return atoms;
}

inline std::vector<DecompositionAtom> decompose(const std::vector<double>& x,
                                                const SemiBanditActionSet& aset) {
    if (const auto* ms = std::get_if<MSetActions>(&aset)) return decompose_mset(x, ms->m);
    return decompose_vertices(x, std::get<ExplicitVertexActions>(aset).vertices);
}

// l_hat_i = m_i + (a_i / x_i) (l_i - m_i); a selected coordinate with
// x_i ~ 0 indicates an upstream sampling bug.
inline std::vector<double> estimate_loss(const std::vector<double>& m, const std::vector<double>& x,
                                         const std::vector<int>& action,
                                         const std::vector<double>& losses) {
    std::vector<double> lhat(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (action[i]) {
            if (x[i] < 1e-12)
                throw std::runtime_error("estimate_loss: selected coordinate has x ~ 0");
            lhat[i] = m[i] + (losses[i] - m[i]) / x[i];
        } else {
            lhat[i] = m[i];
        }
    }
    return lhat;
}

struct SemiBanditRound {
    std::vector<double> x;
    std::vector<int> action;
    std::vector<DecompositionAtom> certificate;
    double loss_incurred = 0.0; // <l(t), a(t)>
};

class SemiBanditLearner {
public:
    SemiBanditLearner(int d, SemiBanditActionSet action_set, long horizon,
                      SemiBanditPredictor predictor, double epsilon = 0.1)
        : d_(d), aset_(std::move(action_set)), T_(horizon), predictor_(predictor),
          epsilon_(epsilon) {
        if (d <= 0) throw std::invalid_argument("SemiBanditLearner: d must be positive");
        if (horizon < 2) throw std::invalid_argument("SemiBanditLearner: horizon too small");
        if (!(epsilon > 0.0 && epsilon <= 0.5))
            throw std::invalid_argument("SemiBanditLearner: epsilon must lie in (0, 1/2]");
        if (const auto* gd = std::get_if<GdPredictor>(&predictor_)) {
            if (!(gd->eta > 0.0 && gd->eta < 0.5))
                throw std::invalid_argument("SemiBanditLearner: GD step must lie in (0, 1/2)");
        }
        if (const auto* ms = std::get_if<MSetActions>(&aset_)) {
            if (ms->m < 1 || ms->m > d) throw std::invalid_argument("SemiBanditLearner: bad m");
        } else {
            const auto& vs = std::get<ExplicitVertexActions>(aset_).vertices;
            if (vs.empty()) throw std::invalid_argument("SemiBanditLearner: no vertices");
            for (const auto& v : vs)
                if (static_cast<int>(v.size()) != d)
                    throw std::invalid_argument("SemiBanditLearner: vertex length mismatch");
        }
        gamma_ = std::log(static_cast<double>(horizon));
        m_vec_.assign(d, 0.5);
        cum_loss_est_.assign(d, 0.0);
        cum_obs_loss_.assign(d, 0.0);
        counts_.assign(d, 0);
        cum_alpha_.assign(d, 0.0);
    }

    long round() const { return round_; }
    double gamma() const { return gamma_; }
    const std::vector<double>& optimistic_prediction() const { return m_vec_; }
    const std::vector<double>& cumulative_loss_estimate() const { return cum_loss_est_; }
    const std::vector<long>& counts() const { return counts_; }

    std::vector<double> beta() const {
        std::vector<double> b(d_);
        for (int i = 0; i < d_; ++i)
            b[i] = std::sqrt((1.0 + epsilon_) * (1.0 + epsilon_) + cum_alpha_[i] / gamma_);
        return b;
    }

    // m_i(t) = (1/2 + sum_{s<t} a_i(s) l_i(s)) / (1 + N_i(t-1))
    std::vector<double> predict_ls() const {
        std::vector<double> m(d_);
        for (int i = 0; i < d_; ++i)
            m[i] = (0.5 + cum_obs_loss_[i]) / (1.0 + static_cast<double>(counts_[i]));
        return m;
    }

    void predict_gd_update(const std::vector<int>& action, const std::vector<double>& losses) {
        const double eta = std::get<GdPredictor>(predictor_).eta;
        for (int i = 0; i < d_; ++i)
            if (action[i]) m_vec_[i] = (1.0 - eta) * m_vec_[i] + eta * losses[i];
    }

    void update_alpha_beta(const std::vector<int>& action, const std::vector<double>& x,
                           const std::vector<double>& losses, const std::vector<double>& m) {
        for (int i = 0; i < d_; ++i) {
            if (!action[i]) continue;
            const double err = losses[i] - m[i];
            const double cap = std::min(1.0, 2.0 * (1.0 - x[i]) / (x[i] * x[i] * gamma_));
            cum_alpha_[i] += err * err * cap;
        }
    }

    std::vector<double> compute_x() {
        if (const auto* ms = std::get_if<MSetActions>(&aset_)) {
            FtrlProblem<Potential> prob{linear_term(), beta(), MSetBox{d_, ms->m},
                                        Potential(PotentialKind::HybridLbinfv, gamma_)};
            auto sol = solve(prob, last_mu_);
            last_mu_ = sol.dual;
            // rescale onto the constraint surface so the decomposition
            // marginals match x to machine precision
            double mass = 0.0;
            for (double v : sol.point) mass += v;
            const double f = static_cast<double>(ms->m) / mass;
            for (double& v : sol.point) v = std::min(1.0, v * f);
            return sol.point;
        }
        return compute_x_vertices();
    }

    SemiBanditRound step(const std::vector<double>& losses, Rng& rng) {
        if (round_ >= T_) throw std::runtime_error("SemiBanditLearner: horizon exhausted");
        if (static_cast<int>(losses.size()) != d_)
            throw std::invalid_argument("SemiBanditLearner: loss vector size mismatch");

        const std::vector<double> m_t = m_vec_;
        SemiBanditRound out;
        out.x = compute_x();
        out.certificate = decompose(out.x, aset_);
        std::vector<double> weights;
        weights.reserve(out.certificate.size());
        for (const auto& at : out.certificate) weights.push_back(at.weight);
        out.action = out.certificate[rng.sample_index(weights)].action;

        for (int i = 0; i < d_; ++i)
            if (out.action[i]) out.loss_incurred += losses[i];

        const auto lhat = estimate_loss(m_t, out.x, out.action, losses);
        for (int i = 0; i < d_; ++i) cum_loss_est_[i] += lhat[i];
        update_alpha_beta(out.action, out.x, losses, m_t);
        for (int i = 0; i < d_; ++i) {
            if (out.action[i]) {
                counts_[i] += 1;
                cum_obs_loss_[i] += losses[i];
            }
        }
        if (std::holds_alternative<LsPredictor>(predictor_))
            m_vec_ = predict_ls();
        else
            predict_gd_update(out.action, losses);
        ++round_;
        return out;
    }

private:
    std::vector<double> linear_term() const {
        std::vector<double> l(d_);
        for (int i = 0; i < d_; ++i) l[i] = cum_loss_est_[i] + m_vec_[i];
        return l;
    }

    // FTRL over convex-combination weights of the explicit vertices, with the
    // regularizer applied to the induced coordinates. Entropic mirror descent
    // keeps the weights strictly positive, which keeps every non-pinned
    // coordinate interior.
    std::vector<double> compute_x_vertices() {
        const auto& verts = std::get<ExplicitVertexActions>(aset_).vertices;
        const int nj = static_cast<int>(verts.size());
        const auto lin = linear_term();
        const auto bw = beta();
        const Potential pot(PotentialKind::HybridLbinfv, gamma_);

        std::vector<int> cover(d_, 0);
        for (const auto& v : verts)
            for (int i = 0; i < d_; ++i) cover[i] += v[i];
        std::vector<int> interior;
        for (int i = 0; i < d_; ++i)
            if (cover[i] > 0 && cover[i] < nj) interior.push_back(i);

        if (last_lambda_.size() != static_cast<std::size_t>(nj))
            last_lambda_.assign(nj, 1.0 / nj);
        std::vector<double> lam = last_lambda_;

        auto coords = [&](const std::vector<double>& l) {
            std::vector<double> x(d_, 0.0);
            for (int j = 0; j < nj; ++j)
                for (int i = 0; i < d_; ++i)
                    if (verts[j][i]) x[i] += l[j];
            return x;
        };
        auto objective = [&](const std::vector<double>& x) {
            double f = 0.0;
            for (int i = 0; i < d_; ++i) f += lin[i] * x[i];
            for (int i : interior) f += bw[i] * pot.eval(std::clamp(x[i], 1e-300, 1.0 - 1e-16));
            return f;
        };

        double fcur = objective(coords(lam));
        double step = 0.5;
        std::vector<double> grad_l(nj), xv;
        for (int it = 0; it < 20000; ++it) {
            xv = coords(lam);
            for (int j = 0; j < nj; ++j) {
                double gj = 0.0;
                for (int i = 0; i < d_; ++i)
                    if (verts[j][i]) gj += lin[i];
                for (int i : interior)
                    if (verts[j][i]) gj += bw[i] * pot.grad(std::clamp(xv[i], 1e-300, 1.0 - 1e-16));
                grad_l[j] = gj;
            }
            double gdotl = 0.0, gmin = grad_l[0];
            for (int j = 0; j < nj; ++j) {
                gdotl += grad_l[j] * lam[j];
                gmin = std::min(gmin, grad_l[j]);
            }
            const double fw_gap = gdotl - gmin;
            if (fw_gap <= 1e-10 * std::max(1.0, std::abs(fcur))) break;

            bool accepted = false;
            for (int bt = 0; bt < 40 && !accepted; ++bt) {
                std::vector<double> trial(nj);
                double norm = 0.0;
                for (int j = 0; j < nj; ++j) {
                    trial[j] = lam[j] * std::exp(-step * (grad_l[j] - gmin));
                    norm += trial[j];
                }
                for (double& t : trial) t /= norm;
                const double ftrial = objective(coords(trial));
                if (ftrial <= fcur) {
                    lam = std::move(trial);
                    fcur = ftrial;
                    step *= 1.2;
                    accepted = true;
                } else {
                    step *= 0.5;
                }
            }
            if (!accepted) break;
        }
        last_lambda_ = lam;
        return coords(lam);
    }

    int d_;
    SemiBanditActionSet aset_;
    long T_;
    SemiBanditPredictor predictor_;
    double epsilon_;
    double gamma_ = 1.0;
    std::vector<double> m_vec_, cum_loss_est_, cum_obs_loss_, cum_alpha_;
    std::vector<long> counts_;
    long round_ = 0;
    std::optional<double> last_mu_;
    std::vector<double> last_lambda_;
};

} // namespace bobw
