#pragma once

// Method of Moving Asymptotes (Svanberg), for min f0(x) s.t. f_i(x) <= 0,
// xmin <= x <= xmax, with an absolute per-variable move limit on each step.
// The convex subproblem is solved by the primal-dual interior-point method
// with elastic variables y (c = 1000, d = 1, a0 = 1, a = 0).
//
// The curvature term raa of each function adapts between outer iterations:
// when the previous approximation underestimated the function at the point it
// proposed, raa grows as in the conservative (GCMMA) update; otherwise it
// relaxes back towards raa0. No inner iterations are taken.

#include <Eigen/Core>

#include <vector>

namespace rudder {

struct MmaParams {
    double asyinit = 0.5;
    double asyincr = 1.2;
    double asydecr = 0.7;
    double albefa = 0.1;
    double raa0 = 1e-5;
    double asymin = 0.01;  // closest asymptote distance, fraction of the range
    double c = 1000.0;
};

struct MmaStepInfo {
    double max_elastic = 0.0;  // largest y of the accepted subproblem
    double raa_objective = 0.0;
    int restorations = 0;      // move-limit halvings taken
    int subproblem_iterations = 0;
};

class Mma {
public:
    Mma(Eigen::VectorXd xmin, Eigen::VectorXd xmax, Eigen::VectorXd move_limit, int constraints,
        MmaParams params = {});

    /// One outer iteration. `dfdx` is constraints x variables.
    Eigen::VectorXd step(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& df0dx,
                         const Eigen::VectorXd& fval, const Eigen::MatrixXd& dfdx);

    const MmaStepInfo& last_step() const { return info_; }
    const Eigen::VectorXd& low() const { return low_; }
    const Eigen::VectorXd& upp() const { return upp_; }
    int iteration() const { return iter_; }

private:
    Eigen::VectorXd xmin_, xmax_, move_;
    int m_;
    MmaParams p_;
    Eigen::VectorXd xold1_, xold2_, low_, upp_;
    int iter_ = 0;
    // Previous approximations: row 0 objective, rows 1..m constraints.
    Eigen::MatrixXd prev_p_, prev_q_;
    Eigen::VectorXd prev_r_, prev_low_, prev_upp_, prev_x_, raa_;
    bool have_prev_ = false;
    MmaStepInfo info_;
};

struct ConvergenceParams {
    int consecutive = 5;
    double objective_tol = 1e-2;
    double volume_tol = 1e-2;
};

/// Converged after `consecutive` steps in a row with relative objective change
/// at most objective_tol and (V - Vbar)/Vbar at most volume_tol.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(ConvergenceParams p = {}) : p_(p) {}

    /// Feed the objective and V/Vbar after an update; true once converged.
    bool update(double objective, double volume_ratio);

    int counter() const { return counter_; }
    const std::vector<double>& history() const { return history_; }

private:
    ConvergenceParams p_;
    std::vector<double> history_;
    int counter_ = 0;
};

}  // namespace rudder
