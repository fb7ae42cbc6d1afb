#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

// Dense two-phase simplex method with Bland's rule, sized for the tiny
// linear programs that come out of cell decompositions and estimator
// fitting (tens of variables). Free variables are handled by splitting.

namespace bobw {

enum class LpStatus { Optimal, Infeasible, Unbounded };

enum class LpRelation { LessEq, GreaterEq, Equal };

class LinearProgram {
public:
    // Returns the index of a new variable. lower_bounded=false means free.
    int add_variable(double objective_coeff, bool lower_bounded = true) {
        obj_.push_back(objective_coeff);
        free_.push_back(!lower_bounded);
        return static_cast<int>(obj_.size()) - 1;
    }

    void add_constraint(const std::vector<std::pair<int, double>>& terms, LpRelation rel,
                        double rhs) {
        rows_.push_back({terms, rel, rhs});
    }

    void set_maximize(bool maximize) { maximize_ = maximize; }

    struct Result {
        LpStatus status = LpStatus::Infeasible;
        std::vector<double> x;
        double objective = 0.0;
    };

    Result solve() const {
        // Standard form: split free vars, add slack/surplus, b >= 0.
        const int n0 = static_cast<int>(obj_.size());
        std::vector<int> pos(n0), neg(n0, -1);
        int n = 0;
        for (int j = 0; j < n0; ++j) {
            pos[j] = n++;
            if (free_[j]) neg[j] = n++;
        }
        const int m = static_cast<int>(rows_.size());
        int nslack = 0;
        for (const auto& r : rows_)
            if (r.rel != LpRelation::Equal) ++nslack;

        const int ncols = n + nslack;
        std::vector<std::vector<double>> a(m, std::vector<double>(ncols, 0.0));
        std::vector<double> b(m, 0.0);
        std::vector<double> c(ncols, 0.0);
        for (int j = 0; j < n0; ++j) {
            const double s = maximize_ ? -obj_[j] : obj_[j];
            c[pos[j]] = s;
            if (neg[j] >= 0) c[neg[j]] = -s;
        }
        int slack_at = n;
        for (int i = 0; i < m; ++i) {
            for (const auto& [j, coef] : rows_[i].terms) {
                if (j < 0 || j >= n0) throw std::invalid_argument("lp: bad variable index");
                a[i][pos[j]] += coef;
                if (neg[j] >= 0) a[i][neg[j]] -= coef;
            }
            b[i] = rows_[i].rhs;
            if (rows_[i].rel == LpRelation::LessEq)
                a[i][slack_at++] = 1.0;
            else if (rows_[i].rel == LpRelation::GreaterEq)
                a[i][slack_at++] = -1.0;
            if (b[i] < 0.0) {
                for (double& v : a[i]) v = -v;
                b[i] = -b[i];
            }
        }

        Tableau t(a, b, ncols);
        if (!t.phase1()) return {LpStatus::Infeasible, {}, 0.0};
        const auto st = t.phase2(c);
        if (st == LpStatus::Unbounded) return {LpStatus::Unbounded, {}, 0.0};

        Result res;
        res.status = LpStatus::Optimal;
        res.x.assign(n0, 0.0);
        const auto xs = t.solution(ncols);
        for (int j = 0; j < n0; ++j) {
            res.x[j] = xs[pos[j]];
            if (neg[j] >= 0) res.x[j] -= xs[neg[j]];
        }
        for (int j = 0; j < n0; ++j) res.objective += obj_[j] * res.x[j];
        return res;
    }

private:
    struct Row {
        std::vector<std::pair<int, double>> terms;
        LpRelation rel;
        double rhs;
    };

    // Full-tableau simplex over [A | I_art | b] with Bland's anti-cycling rule.
    struct Tableau {
        int m, n, width; // n structural+slack columns, then m artificials, then rhs
        std::vector<std::vector<double>> t;
        std::vector<int> basis;
        static constexpr double eps = 1e-9;

        Tableau(const std::vector<std::vector<double>>& a, const std::vector<double>& b, int ncols)
            : m(static_cast<int>(b.size())), n(ncols), width(ncols + m + 1) {
            t.assign(m, std::vector<double>(width, 0.0));
            basis.resize(m);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) t[i][j] = a[i][j];
                t[i][n + i] = 1.0;
                t[i][width - 1] = b[i];
                basis[i] = n + i;
            }
        }

        void pivot(int row, int col) {
            const double p = t[row][col];
            for (int j = 0; j < width; ++j) t[row][j] /= p;
            for (int i = 0; i < m; ++i) {
                if (i == row) continue;
                const double f = t[i][col];
                if (f == 0.0) continue;
                for (int j = 0; j < width; ++j) t[i][j] -= f * t[row][j];
            }
            basis[row] = col;
        }

        // Minimizes c over the current feasible basis. limit_cols restricts the
        // candidate entering columns (phase 1 may enter anything, phase 2 must
        // keep artificials out).
        LpStatus run(const std::vector<double>& cost, int limit_cols) {
            std::vector<double> z(width, 0.0);
            // reduced-cost row: z = c - c_B B^{-1} A, tracked incrementally
            for (int j = 0; j < limit_cols; ++j) z[j] = j < static_cast<int>(cost.size()) ? cost[j] : 0.0;
            z[width - 1] = 0.0;
            for (int i = 0; i < m; ++i) {
                const double cb = basis[i] < static_cast<int>(cost.size()) ? cost[basis[i]] : 0.0;
                if (cb == 0.0) continue;
                for (int j = 0; j < width; ++j) z[j] -= cb * t[i][j];
            }
            for (long guard = 0;; ++guard) {
                if (guard > 100000) throw std::runtime_error("lp: iteration guard tripped");
                int enter = -1;
                for (int j = 0; j < limit_cols; ++j) { // Bland: first improving index
                    if (z[j] < -eps) {
                        enter = j;
                        break;
                    }
                }
                if (enter < 0) return LpStatus::Optimal;
                int leave = -1;
                double best = std::numeric_limits<double>::infinity();
                for (int i = 0; i < m; ++i) {
                    if (t[i][enter] > eps) {
                        const double ratio = t[i][width - 1] / t[i][enter];
                        if (ratio < best - eps || (ratio < best + eps && (leave < 0 || basis[i] < basis[leave]))) {
                            best = ratio;
                            leave = i;
                        }
                    }
                }
                if (leave < 0) return LpStatus::Unbounded;
                const double zf = z[enter];
                pivot(leave, enter);
                for (int j = 0; j < width; ++j) z[j] -= zf * t[leave][j];
            }
        }

        bool phase1() {
            std::vector<double> c(n + m, 0.0);
            for (int i = 0; i < m; ++i) c[n + i] = 1.0;
            run(c, n + m);
            double art = 0.0;
            for (int i = 0; i < m; ++i)
                if (basis[i] >= n) art += t[i][width - 1];
            if (art > 1e-7) return false;
            // drive remaining degenerate artificials out of the basis
            for (int i = 0; i < m; ++i) {
                if (basis[i] < n) continue;
                int col = -1;
                for (int j = 0; j < n; ++j)
                    if (std::abs(t[i][j]) > eps) {
                        col = j;
                        break;
                    }
                if (col >= 0) pivot(i, col);
                // else: the row is all-zero, the artificial stays at value 0
            }
            return true;
        }

        LpStatus phase2(const std::vector<double>& c) { return run(c, n); }

        std::vector<double> solution(int ncols) const {
            std::vector<double> x(ncols + m, 0.0);
            for (int i = 0; i < m; ++i)
                if (basis[i] < ncols + m) x[basis[i]] = t[i][width - 1];
            x.resize(ncols);
            return x;
        }
    };

    std::vector<double> obj_;
    std::vector<bool> free_;
    std::vector<Row> rows_;
    bool maximize_ = false;
};

} // namespace bobw
