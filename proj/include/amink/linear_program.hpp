#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace amink {

// Dense two-phase simplex for small equality-form programs:
//   maximize c.x  subject to  A x = b, x >= 0.
// Bland's rule throughout, so the iteration cannot cycle.
struct LpResult {
    enum class Status { Optimal, Infeasible, Unbounded };
    Status status = Status::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;
};

class SimplexSolver {
public:
    explicit SimplexSolver(double pivot_tol = 1e-12) : tol_(pivot_tol) {}

    LpResult maximize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& c) const {
        const int m = static_cast<int>(A.rows());
        const int n = static_cast<int>(A.cols());
        const int ncols = n + m;  // real vars then artificials

        Eigen::MatrixXd tab(m + 1, ncols + 1);
        tab.setZero();
        std::vector<int> basis(m);
        for (int i = 0; i < m; ++i) {
            double sgn = b(i) < 0 ? -1.0 : 1.0;
            tab.block(i, 0, 1, n) = sgn * A.row(i);
            tab(i, n + i) = 1.0;
            tab(i, ncols) = sgn * b(i);
            basis[i] = n + i;
        }

        // Phase 1: minimize the artificial sum.
        for (int j = 0; j <= ncols; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s -= tab(i, j);
            tab(m, j) = s;
        }
        for (int i = 0; i < m; ++i) tab(m, n + i) = 0.0;
        if (!iterate(tab, basis, m, ncols, ncols)) {
            return {LpResult::Status::Unbounded, 0.0, {}};  // cannot happen in phase 1
        }
        double art_sum = -tab(m, ncols);
        if (art_sum > 1e-8) return {LpResult::Status::Infeasible, 0.0, {}};

        // Pivot remaining artificial basics onto real columns where possible.
        for (int i = 0; i < m; ++i) {
            if (basis[i] < n) continue;
            int enter = -1;
            for (int j = 0; j < n; ++j) {
                if (std::abs(tab(i, j)) > tol_) {
                    enter = j;
                    break;
                }
            }
            if (enter >= 0) pivot(tab, basis, i, enter, ncols);
            // else: redundant row, artificial stays basic at value 0
        }

        // Phase 2: minimize -c.x with artificials barred from entering.
        for (int j = 0; j < n; ++j) tab(m, j) = -c(j);
        for (int j = n; j < ncols; ++j) tab(m, j) = 0.0;
        tab(m, ncols) = 0.0;
        for (int i = 0; i < m; ++i) {
            if (basis[i] < n && std::abs(tab(m, basis[i])) > 0.0) {
                tab.row(m) -= tab(m, basis[i]) * tab.row(i);
            }
        }
        if (!iterate(tab, basis, m, ncols, n)) {
            return {LpResult::Status::Unbounded, 0.0, {}};
        }

        LpResult res;
        res.status = LpResult::Status::Optimal;
        res.x = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i) {
            if (basis[i] < n) res.x(basis[i]) = tab(i, ncols);
        }
        res.objective = c.dot(res.x);
        return res;
    }

    // Is {x >= 0 : A x = b} nonempty?
    bool feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(A.cols());
        return maximize(A, b, c).status == LpResult::Status::Optimal;
    }

private:
    double tol_;

    void pivot(Eigen::MatrixXd& tab, std::vector<int>& basis, int row, int col,
               int ncols) const {
        double inv = 1.0 / tab(row, col);
        tab.row(row) *= inv;
        tab(row, col) = 1.0;
        for (int i = 0; i < static_cast<int>(tab.rows()); ++i) {
            if (i == row) continue;
            double f = tab(i, col);
            if (f != 0.0) {
                tab.row(i) -= f * tab.row(row);
                tab(i, col) = 0.0;
            }
        }
        basis[row] = col;
        (void)ncols;
    }

    // Minimizes the current objective row. enter_limit bounds the entering
    // column index (used to bar artificials in phase 2).
    bool iterate(Eigen::MatrixXd& tab, std::vector<int>& basis, int m, int ncols,
                 int enter_limit) const {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < enter_limit; ++j) {
                if (tab(m, j) < -tol_) {
                    enter = j;  // Bland: first improving index
                    break;
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m; ++i) {
                if (tab(i, enter) > tol_) {
                    double ratio = tab(i, ncols) / tab(i, enter);
                    if (leave < 0 || ratio < best - tol_ ||
                        (ratio < best + tol_ && basis[i] < basis[leave])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(tab, basis, leave, enter, ncols);
        }
    }
};

}  // namespace amink
