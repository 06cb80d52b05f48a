#include "rudder/eigensolver.hpp"

#include "rudder/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

namespace rudder {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

using Solver = Eigen::SimplicialLDLT<SparseMatrix>;

bool factor_ok(const Solver& s, const SparseMatrix& A) {
    if (s.info() != Eigen::Success) return false;
    const Eigen::VectorXd D = s.vectorD();
    const Eigen::VectorXd diag = s.permutationP() * Eigen::VectorXd(A.diagonal());
    for (Eigen::Index i = 0; i < D.size(); ++i) {
        if (!(D(i) > 1e-12 * std::abs(diag(i)))) return false;
    }
    return true;
}

struct RitzSet {
    std::vector<double> values;
    std::vector<Eigen::VectorXd> vectors;  // reduced, M-normalized
};

double residual_of(const SystemMatrices& sys, const Eigen::VectorXd& x, double lambda, double shift) {
    const Eigen::VectorXd kx = sys.K * x;
    const Eigen::VectorXd mx = sys.M * x;
    const double denom = std::max({kx.norm(), std::abs(shift) * mx.norm(), 1e-300});
    return (kx - lambda * mx).norm() / denom;
}

RitzSet lanczos(const SystemMatrices& sys, const Solver& solver, double shift, int m) {
    const int n = sys.dofs.size();
    Eigen::MatrixXd Q(n, m), MQ(n, m);
    std::vector<double> alpha, beta;
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = 1.0 + 0.25 * std::sin(0.7 * i + 0.3);
    auto mnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(std::max(v.dot(sys.M * v), 0.0)); };
    Eigen::VectorXd q = r / mnorm(r);
    int steps = 0;
    for (int j = 0; j < m; ++j) {
        Q.col(j) = q;
        MQ.col(j) = sys.M * q;
        Eigen::VectorXd w = solver.solve(Eigen::VectorXd(MQ.col(j)));
        const double a = MQ.col(j).dot(w);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd c = MQ.leftCols(j + 1).transpose() * w;
            w -= Q.leftCols(j + 1) * c;
        }
        steps = j + 1;
        if (j + 1 == m) break;
        double b = mnorm(w);
        if (!(b > 1e-12 * std::abs(a))) {
            // Invariant subspace found: restart with a fresh direction.
            Eigen::VectorXd fresh(n);
            for (int i = 0; i < n; ++i) fresh(i) = std::cos(1.3 * i + 0.1 * (j + 1));
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd c = MQ.leftCols(j + 1).transpose() * fresh;
                fresh -= Q.leftCols(j + 1) * c;
            }
            const double fn = mnorm(fresh);
            if (!(fn > 0.0)) break;
            beta.push_back(0.0);
            q = fresh / fn;
            continue;
        }
        beta.push_back(b);
        q = w / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
        T(j, j) = alpha[static_cast<std::size_t>(j)];
        if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    RitzSet out;
    for (int j = steps - 1; j >= 0; --j) {
        const double theta = es.eigenvalues()(j);
        if (!(theta > 0.0)) continue;
        out.values.push_back(shift + 1.0 / theta);
        Eigen::VectorXd x = Q.leftCols(steps) * es.eigenvectors().col(j);
        out.vectors.push_back(x / mnorm(x));
    }
    return out;
}

// Modified Gram-Schmidt in the M inner product (two passes). Columns that
// collapse are replaced by fresh pseudo-random directions.
void m_orthonormalize(const SystemMatrices& sys, Eigen::MatrixXd& Y, int salt) {
    const Eigen::Index n = Y.rows();
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            Eigen::VectorXd v = Y.col(j);
            const double before = std::sqrt(std::max(v.dot(sys.M * v), 0.0));
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index i = 0; i < j; ++i) {
                    const Eigen::VectorXd mi = sys.M * Y.col(i);
                    v -= mi.dot(v) * Y.col(i);
                }
            }
            const double after = std::sqrt(std::max(v.dot(sys.M * v), 0.0));
            if (after > 1e-10 * before && after > 0.0) {
                Y.col(j) = v / after;
                break;
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                Y(i, j) = std::sin(0.53 * static_cast<double>(i + 1) * static_cast<double>(j + 3 + attempt) + 0.17 * salt);
            }
        }
    }
}

}  // namespace

double ModalResult::frequency(int j) const {
    return std::sqrt(std::max(eigenvalues.at(static_cast<std::size_t>(j)), 0.0)) / kTwoPi;
}

ModalResult solve_modal(const SystemMatrices& sys, int count, double tol, double accept) {
    const int n = sys.dofs.size();
    if (count < 1) throw AnalysisError("modal solve needs at least one eigenpair");
    if (n == 0) throw AnalysisError("no free degrees of freedom");
    if (sys.M.rows() != n) throw AnalysisError("mass matrix not assembled");
    const int want = std::min(n, std::max(count, 2));

    double shift = 0.0;
    Solver solver;
    solver.compute(sys.K);
    if (!factor_ok(solver, sys.K)) {
        const double scale = sys.K.diagonal().sum() / std::max(sys.M.diagonal().sum(), 1e-300);
        shift = -1e-6 * scale;
        const SparseMatrix A = sys.K - shift * sys.M;
        solver.compute(A);
        if (!factor_ok(solver, A)) throw AnalysisError("shifted stiffness factorization failed");
    }

    // Dense reorthogonalization costs n m^2, so the basis stops growing at
    // max_m; the subspace polish below then has to finish the job.
    const int max_m = std::min(n, std::max(8 * want + 160, 320));
    int m = std::min(n, std::max(2 * want + 20, 40));
    RitzSet ritz;
    for (;;) {
        ritz = lanczos(sys, solver, shift, m);
        bool ok = static_cast<int>(ritz.values.size()) >= want;
        for (int j = 0; ok && j < want; ++j) {
            ok = residual_of(sys, ritz.vectors[static_cast<std::size_t>(j)], ritz.values[static_cast<std::size_t>(j)], shift) <= tol;
        }
        if (ok || m >= max_m) break;
        m = std::min(max_m, 2 * m);
    }
    if (static_cast<int>(ritz.values.size()) < want) throw AnalysisError("eigen solver found too few eigenpairs");

    // Subspace iteration polish. A few extra pseudo-random columns pick up
    // eigenvalue multiplicities a single Lanczos run cannot see.
    const int nritz = std::min(static_cast<int>(ritz.values.size()), want + 2);
    const int block = std::min(n, want + 4);
    Eigen::MatrixXd X(n, block);
    for (int j = 0; j < block; ++j) {
        if (j < nritz) {
            X.col(j) = ritz.vectors[static_cast<std::size_t>(j)];
        } else {
            for (int i = 0; i < n; ++i) X(i, j) = std::sin(0.37 * (i + 1) * (j + 2) + 0.11 * j);
        }
    }
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(block);
    for (int j = 0; j < nritz; ++j) lam(j) = ritz.values[static_cast<std::size_t>(j)];
    auto worst_residual = [&]() {
        double r = 0.0;
        for (int j = 0; j < want; ++j) r = std::max(r, residual_of(sys, X.col(j), lam(j), shift));
        return r;
    };
    // Rounding in K phi puts a floor under the residual of low modes of badly
    // conditioned models, so sweeps also stop once progress stalls.
    double best = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int sweep = 0; sweep < 60; ++sweep) {
        if (sweep >= 3) {
            const double r = worst_residual();
            if (r <= tol) break;
            stalled = r < 0.5 * best ? 0 : stalled + 1;
            best = std::min(best, r);
            if (stalled >= 4) break;
        }
        Eigen::MatrixXd Y(n, block);
        for (int j = 0; j < block; ++j) Y.col(j) = solver.solve(Eigen::VectorXd(sys.M * X.col(j)));
        m_orthonormalize(sys, Y, sweep);
        const Eigen::MatrixXd Kr = Y.transpose() * (sys.K * Y);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (Kr + Kr.transpose()));
        if (ges.info() != Eigen::Success) throw AnalysisError("Rayleigh-Ritz step failed");
        X = Y * ges.eigenvectors();
        lam = ges.eigenvalues();
    }

    ModalResult res;
    res.shift = shift;
    std::vector<int> order(static_cast<std::size_t>(block));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return lam(a) < lam(b); });
    for (int jj = 0; jj < want; ++jj) {
        const int j = order[static_cast<std::size_t>(jj)];
        Eigen::VectorXd x = X.col(j);
        x /= std::sqrt(x.dot(sys.M * x));
        Eigen::Index imax = 0;
        x.cwiseAbs().maxCoeff(&imax);
        if (x(imax) < 0.0) x = -x;
        const double r = residual_of(sys, x, lam(j), shift);
        if (!(r <= accept) && jj < count) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "eigenpair %d residual %.3g above %.3g", jj, r, accept);
            throw AnalysisError(msg);
        }
        res.eigenvalues.push_back(lam(j));
        res.modes.push_back(sys.dofs.expand(x));
        res.residuals.push_back(r);
    }
    if (res.eigenvalues.size() >= 2 && res.eigenvalues[0] > 0.0) {
        res.repeated_warning = (res.eigenvalues[1] - res.eigenvalues[0]) / res.eigenvalues[0] < 1e-3;
    }
    return res;
}

}  // namespace rudder
