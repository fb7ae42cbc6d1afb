#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "bobw/math/linalg.hpp"
#include "bobw/math/simplex_lp.hpp"
#include "bobw/pm/game.hpp"

// Game analysis: cell decomposition (Pareto / dominated / degenerate),
// neighbor detection, observability classification, minimum-norm edge
// estimators w_e, the in-tree estimation function G_circ with
//
//   sum_a (G(a, Phi_ax)_b - G(a, Phi_ax)_c) = L_bx - L_cx
//
// for all Pareto b, c and outcomes x, and a basis of the homogeneous space
// that turns G_circ into an affine parametrization of all such functions.

namespace bobw::pm {

// All cell/neighbor dimension tests use this slack on the simplex. Passing
// with slack below 10x the tolerance is reported as a warning.
inline constexpr double kGeometryTol = 1e-7;

enum class ActionClass { Pareto, Dominated };

enum class Observability { Locally, GloballyOnly, NotGlobal };

inline const char* to_string(Observability o) {
    switch (o) {
    case Observability::Locally: return "Locally";
    case Observability::GloballyOnly: return "GloballyOnly";
    case Observability::NotGlobal: return "NotGlobal";
    }
    return "?";
}

// Dense function [k] x Sigma -> R^k, indexed (action, symbol, component).
struct GTensor {
    int k = 0, s = 0;
    std::vector<double> v;

    GTensor() = default;
    GTensor(int k_, int s_) : k(k_), s(s_), v(static_cast<std::size_t>(k_) * s_ * k_, 0.0) {}

    double& at(int a, int sym, int b) {
        return v[(static_cast<std::size_t>(a) * s + sym) * k + b];
    }
    double at(int a, int sym, int b) const {
        return v[(static_cast<std::size_t>(a) * s + sym) * k + b];
    }
    double inf_norm() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

struct EdgeEstimator {
    int a = 0, b = 0;   // sum_c w(c, Phi_cx) = L_ax - L_bx for all x
    Mat w;              // k x S, zero outside the allowed rows
    double inf_norm = 0.0;
};

struct EstimationData {
    std::vector<EdgeEstimator> edge_w; // one per neighbor edge, oriented (lo, hi)
    int root = -1;
    std::vector<int> parent;           // in-tree parent, -1 for root and non-Pareto actions
    GTensor g_circ;
    double g_inf_norm = 0.0;
    double c_g = 1.0;
};

struct GameAnalysis {
    PMGame game;
    int m = 0; // max distinct symbols per row
    std::vector<ActionClass> action_class;
    std::vector<int> pareto;
    std::vector<std::pair<int, int>> neighbors;
    std::vector<double> pareto_slack;              // per action
    std::vector<double> neighbor_slack;            // aligned with neighbors
    Observability observability = Observability::NotGlobal;
    std::optional<EstimationData> local_est;   // present iff locally observable
    std::optional<EstimationData> global_est;  // present iff globally observable
    std::vector<GTensor> h_null_basis;         // homogeneous space over all k rows
    std::vector<std::string> warnings;
};

namespace detail {

// max s  s.t.  u in P_d,  (l_a - l_b)^T u + s <= 0 for all competitors b.
// The cap s <= 1 keeps the LP bounded when no competitor exists.
inline double cell_slack(const PMGame& g, int a) {
    LinearProgram lp;
    std::vector<int> u(g.d);
    for (int x = 0; x < g.d; ++x) u[x] = lp.add_variable(0.0, true);
    const int s = lp.add_variable(1.0, false);
    lp.set_maximize(true);

    std::vector<std::pair<int, double>> sum1;
    for (int x = 0; x < g.d; ++x) sum1.push_back({u[x], 1.0});
    lp.add_constraint(sum1, LpRelation::Equal, 1.0);
    lp.add_constraint({{s, 1.0}}, LpRelation::LessEq, 1.0);
    for (int b = 0; b < g.k; ++b) {
        if (b == a) continue;
        std::vector<std::pair<int, double>> row{{s, 1.0}};
        for (int x = 0; x < g.d; ++x) row.push_back({u[x], g.loss_at(a, x) - g.loss_at(b, x)});
        lp.add_constraint(row, LpRelation::LessEq, 0.0);
    }
    const auto res = lp.solve();
    if (res.status != LpStatus::Optimal) throw game_error("cell_slack: LP did not solve");
    return res.objective;
}

// max s  s.t.  u in P_d,  (l_a - l_b)^T u = 0,
//              (l_a - l_c)^T u + s <= 0 for all c outside {a,b}.
inline double neighbor_slack(const PMGame& g, int a, int b) {
    LinearProgram lp;
    std::vector<int> u(g.d);
    for (int x = 0; x < g.d; ++x) u[x] = lp.add_variable(0.0, true);
    const int s = lp.add_variable(1.0, false);
    lp.set_maximize(true);

    std::vector<std::pair<int, double>> sum1;
    for (int x = 0; x < g.d; ++x) sum1.push_back({u[x], 1.0});
    lp.add_constraint(sum1, LpRelation::Equal, 1.0);
    lp.add_constraint({{s, 1.0}}, LpRelation::LessEq, 1.0);
    std::vector<std::pair<int, double>> plane;
    for (int x = 0; x < g.d; ++x) plane.push_back({u[x], g.loss_at(a, x) - g.loss_at(b, x)});
    lp.add_constraint(plane, LpRelation::Equal, 0.0);
    for (int c = 0; c < g.k; ++c) {
        if (c == a || c == b) continue;
        std::vector<std::pair<int, double>> row{{s, 1.0}};
        for (int x = 0; x < g.d; ++x) row.push_back({u[x], g.loss_at(a, x) - g.loss_at(c, x)});
        lp.add_constraint(row, LpRelation::LessEq, 0.0);
    }
    const auto res = lp.solve();
    if (res.status == LpStatus::Infeasible) return -1.0; // cells do not even touch
    if (res.status != LpStatus::Optimal) throw game_error("neighbor_slack: LP did not solve");
    return res.objective;
}

} // namespace detail

// Minimum-infinity-norm estimator for a neighbor edge (a,b). Local mode
// restricts the support to rows a and b; infeasibility is a classification
// result (the edge is not locally / globally observable), not a fault.
inline std::optional<EdgeEstimator> solve_edge_estimator(const PMGame& g, int a, int b,
                                                         bool local_mode) {
    std::vector<int> rows;
    if (local_mode) {
        rows = {a, b};
    } else {
        rows.resize(g.k);
        for (int c = 0; c < g.k; ++c) rows[c] = c;
    }

    LinearProgram lp;
    // variable per (row, symbol used in that row), plus the norm bound t
    std::vector<std::vector<int>> var(g.k, std::vector<int>(g.sigma_count(), -1));
    for (int c : rows)
        for (int sym : g.row_symbols(c)) var[c][sym] = lp.add_variable(0.0, false);
    const int t = lp.add_variable(1.0, true);
    lp.set_maximize(false);

    for (int x = 0; x < g.d; ++x) {
        std::vector<std::pair<int, double>> row;
        for (int c : rows) row.push_back({var[c][g.symbol_at(c, x)], 1.0});
        // symbols can repeat across rows of the same column; merge coefficients
        std::sort(row.begin(), row.end());
        std::vector<std::pair<int, double>> merged;
        for (const auto& term : row) {
            if (!merged.empty() && merged.back().first == term.first)
                merged.back().second += term.second;
            else
                merged.push_back(term);
        }
        lp.add_constraint(merged, LpRelation::Equal, g.loss_at(a, x) - g.loss_at(b, x));
    }
    for (int c : rows)
        for (int sym : g.row_symbols(c)) {
            lp.add_constraint({{var[c][sym], 1.0}, {t, -1.0}}, LpRelation::LessEq, 0.0);
            lp.add_constraint({{var[c][sym], -1.0}, {t, -1.0}}, LpRelation::LessEq, 0.0);
        }

    const auto res = lp.solve();
    if (res.status != LpStatus::Optimal) return std::nullopt;

    EdgeEstimator e;
    e.a = a;
    e.b = b;
    e.w = Mat(g.k, g.sigma_count());
    for (int c : rows)
        for (int sym : g.row_symbols(c)) e.w(c, sym) = res.x[var[c][sym]];
    e.inf_norm = res.objective;

    for (int x = 0; x < g.d; ++x) {
        double acc = 0.0;
        for (int c = 0; c < g.k; ++c) acc += e.w(c, g.symbol_at(c, x));
        if (std::abs(acc - (g.loss_at(a, x) - g.loss_at(b, x))) > 1e-9)
            throw game_error("edge estimator failed its defining identity");
    }
    return e;
}

// Basis of { N : sum_a (N(a, Phi_ax)_b - N(a, Phi_ax)_c) = 0 for all Pareto
// b, c and all x }, with unknowns restricted to the given rows and to Pareto
// components.
inline std::vector<GTensor> h_nullspace_basis(const PMGame& g, const std::vector<int>& pareto,
                                              const std::vector<int>& rows) {
    struct Occ {
        int a, sym;
    };
    std::vector<Occ> occ;
    for (int a : rows)
        for (int sym : g.row_symbols(a)) occ.push_back({a, sym});
    const int np = static_cast<int>(pareto.size());
    const int n = static_cast<int>(occ.size()) * np;
    if (n == 0) return {};

    auto col = [&](int occ_idx, int b_idx) { return occ_idx * np + b_idx; };

    const int b0 = 0; // constraints against the first Pareto action
    const int mrows = (np - 1) * g.d;
    Mat a_mat(std::max(mrows, 0), n);
    int r = 0;
    for (int bi = 1; bi < np; ++bi) {
        for (int x = 0; x < g.d; ++x) {
            for (int oi = 0; oi < static_cast<int>(occ.size()); ++oi) {
                if (g.symbol_at(occ[oi].a, x) != occ[oi].sym) continue;
                a_mat(r, col(oi, bi)) += 1.0;
                a_mat(r, col(oi, b0)) -= 1.0;
            }
            ++r;
        }
    }

    std::vector<GTensor> basis;
    for (const auto& vec : nullspace(a_mat)) {
        GTensor t(g.k, g.sigma_count());
        for (int oi = 0; oi < static_cast<int>(occ.size()); ++oi)
            for (int bi = 0; bi < np; ++bi)
                t.at(occ[oi].a, occ[oi].sym, pareto[bi]) = vec[col(oi, bi)];
        basis.push_back(std::move(t));
    }
    return basis;
}

namespace detail {

inline EstimationData build_estimation(const PMGame& g, const std::vector<int>& pareto,
                                       const std::vector<std::pair<int, int>>& neighbors,
                                       bool local_mode) {
    EstimationData est;
    est.edge_w.reserve(neighbors.size());
    for (auto [a, b] : neighbors) {
        auto e = solve_edge_estimator(g, a, b, local_mode);
        if (!e) throw game_error("build_estimation: estimator unexpectedly infeasible");
        est.edge_w.push_back(std::move(*e));
    }

    // In-tree rooted at the lowest-index Pareto action, built by BFS.
    est.root = pareto.front();
    est.parent.assign(g.k, -1);
    std::vector<bool> seen(g.k, false);
    seen[est.root] = true;
    std::deque<int> queue{est.root};
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (const auto& [a, b] : neighbors) {
            const int other = (a == u) ? b : (b == u ? a : -1);
            if (other < 0 || seen[other]) continue;
            seen[other] = true;
            est.parent[other] = u;
            queue.push_back(other);
        }
    }
    for (int a : pareto)
        if (!seen[a])
            throw game_error("neighbor graph over Pareto actions is disconnected "
                             "(game input anomaly)");

    // G_circ(a, sigma)_b accumulates the edge estimators along the path from
    // b to the root; the stored orientation (e.a - e.b) flips sign when the
    // path traverses the edge upward from e.b.
    est.g_circ = GTensor(g.k, g.sigma_count());
    auto edge_lookup = [&](int u, int v) -> std::pair<const EdgeEstimator*, double> {
        for (const auto& e : est.edge_w) {
            if (e.a == u && e.b == v) return {&e, 1.0};
            if (e.a == v && e.b == u) return {&e, -1.0};
        }
        throw game_error("build_estimation: tree edge has no estimator");
    };
    for (int b : pareto) {
        int u = b;
        while (est.parent[u] >= 0) {
            const auto [e, sign] = edge_lookup(u, est.parent[u]);
            for (int a = 0; a < g.k; ++a)
                for (int sym = 0; sym < g.sigma_count(); ++sym)
                    est.g_circ.at(a, sym, b) += sign * e->w(a, sym);
            u = est.parent[u];
        }
    }

    for (std::size_t i = 0; i < pareto.size(); ++i)
        for (std::size_t j = i + 1; j < pareto.size(); ++j) {
            const int b = pareto[i], c = pareto[j];
            for (int x = 0; x < g.d; ++x) {
                double acc = 0.0;
                for (int a = 0; a < g.k; ++a) {
                    const int sym = g.symbol_at(a, x);
                    acc += est.g_circ.at(a, sym, b) - est.g_circ.at(a, sym, c);
                }
                if (std::abs(acc - (g.loss_at(b, x) - g.loss_at(c, x))) > 1e-9)
                    throw game_error("G_circ failed the loss-difference identity");
            }
        }

    est.g_inf_norm = est.g_circ.inf_norm();
    est.c_g = std::max(1.0, g.k * est.g_inf_norm);
    return est;
}

} // namespace detail

// Full analysis. Throws game_error on duplicate loss rows, degenerate
// actions, or a disconnected Pareto neighbor graph.
inline GameAnalysis analyze(const PMGame& g) {
    GameAnalysis an;
    an.game = g;
    an.m = g.max_symbols_per_row();

    for (int a = 0; a < g.k; ++a)
        for (int b = a + 1; b < g.k; ++b) {
            double diff = 0.0;
            for (int x = 0; x < g.d; ++x)
                diff = std::max(diff, std::abs(g.loss_at(a, x) - g.loss_at(b, x)));
            if (diff <= 1e-12)
                throw game_error("duplicate actions " + std::to_string(a) + " and " +
                                 std::to_string(b) + " (identical loss rows); games with "
                                 "duplicates are rejected");
        }

    an.action_class.resize(g.k, ActionClass::Dominated);
    an.pareto_slack.resize(g.k, 0.0);
    for (int a = 0; a < g.k; ++a) {
        const double s = detail::cell_slack(g, a);
        an.pareto_slack[a] = s;
        if (s >= kGeometryTol) {
            an.action_class[a] = ActionClass::Pareto;
            an.pareto.push_back(a);
            if (s < 10 * kGeometryTol)
                an.warnings.push_back("action " + std::to_string(a) +
                                      " passed the Pareto test with slack < 10*tol");
        } else if (s > -kGeometryTol) {
            throw game_error("action " + std::to_string(a) +
                             " is degenerate (cell of intermediate dimension); the game is "
                             "rejected");
        }
    }
    if (an.pareto.empty()) throw game_error("no Pareto-optimal actions found");

    for (std::size_t i = 0; i < an.pareto.size(); ++i)
        for (std::size_t j = i + 1; j < an.pareto.size(); ++j) {
            const int a = an.pareto[i], b = an.pareto[j];
            const double s = detail::neighbor_slack(g, a, b);
            if (s >= kGeometryTol) {
                an.neighbors.push_back({a, b});
                an.neighbor_slack.push_back(s);
                if (s < 10 * kGeometryTol)
                    an.warnings.push_back("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                          ") passed the neighbor test with slack < 10*tol");
            }
        }

    bool all_local = true, all_global = true;
    for (auto [a, b] : an.neighbors) {
        if (!solve_edge_estimator(g, a, b, true)) all_local = false;
        if (!all_local && !solve_edge_estimator(g, a, b, false)) {
            all_global = false;
            break;
        }
    }
    an.observability = all_local    ? Observability::Locally
                       : all_global ? Observability::GloballyOnly
                                    : Observability::NotGlobal;

    if (an.observability == Observability::Locally)
        an.local_est = detail::build_estimation(g, an.pareto, an.neighbors, true);
    if (an.observability != Observability::NotGlobal)
        an.global_est = detail::build_estimation(g, an.pareto, an.neighbors, false);

    std::vector<int> all_rows(g.k);
    for (int a = 0; a < g.k; ++a) all_rows[a] = a;
    an.h_null_basis = h_nullspace_basis(g, an.pareto, all_rows);
    return an;
}

inline nlohmann::json analysis_to_json(const GameAnalysis& an) {
    nlohmann::json j;
    j["k"] = an.game.k;
    j["d"] = an.game.d;
    j["m"] = an.m;
    j["observability"] = to_string(an.observability);
    j["pareto"] = an.pareto;
    nlohmann::json cls = nlohmann::json::array();
    for (int a = 0; a < an.game.k; ++a)
        cls.push_back(an.action_class[a] == ActionClass::Pareto ? "pareto" : "dominated");
    j["action_class"] = cls;
    j["pareto_slack"] = an.pareto_slack;
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t i = 0; i < an.neighbors.size(); ++i)
        edges.push_back({{"a", an.neighbors[i].first},
                         {"b", an.neighbors[i].second},
                         {"slack", an.neighbor_slack[i]}});
    j["neighbors"] = edges;
    j["h_nullspace_dim"] = an.h_null_basis.size();
    j["warnings"] = an.warnings;

    auto est_json = [&](const EstimationData& est) {
        nlohmann::json e;
        e["root"] = est.root;
        e["parent"] = est.parent;
        e["g_inf_norm"] = est.g_inf_norm;
        e["c_g"] = est.c_g;
        nlohmann::json ws = nlohmann::json::array();
        for (const auto& ew : est.edge_w) {
            nlohmann::json w;
            w["edge"] = {ew.a, ew.b};
            w["inf_norm"] = ew.inf_norm;
            nlohmann::json entries = nlohmann::json::object();
            for (int c = 0; c < an.game.k; ++c)
                for (int sym : an.game.row_symbols(c))
                    if (ew.w(c, sym) != 0.0)
                        entries[std::to_string(c) + ":" + an.game.symbols[sym]] = ew.w(c, sym);
            w["w"] = entries;
            ws.push_back(w);
        }
        e["edge_estimators"] = ws;
        return e;
    };
    if (an.local_est) j["local"] = est_json(*an.local_est);
    if (an.global_est) j["global"] = est_json(*an.global_est);
    return j;
}

} // namespace bobw::pm
