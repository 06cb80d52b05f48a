#include "rudder/mma.hpp"

#include "rudder/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace rudder {

namespace {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Subproblem {
    VectorXd low, upp, alfa, beta, p0, q0, b;
    MatrixXd P, Q;
    double a0 = 1.0;
    VectorXd a, c, d;
};

struct SubResult {
    VectorXd x, y;
    double z = 0.0;
    int iterations = 0;
};

// Primal-dual interior point for the MMA subproblem.
SubResult subsolv(const Subproblem& sp) {
    const Eigen::Index n = sp.low.size(), m = sp.b.size();
    const ArrayXd een = ArrayXd::Ones(n), eem = ArrayXd::Ones(m);
    const ArrayXd alfa = sp.alfa.array(), beta = sp.beta.array(), low = sp.low.array(), upp = sp.upp.array();
    const ArrayXd p0 = sp.p0.array(), q0 = sp.q0.array(), a = sp.a.array(), c = sp.c.array(), d = sp.d.array();
    const ArrayXd b = sp.b.array();
    const double a0 = sp.a0;
    const double epsimin = 1e-7;

    double epsi = 1.0;
    ArrayXd x = 0.5 * (alfa + beta);
    ArrayXd y = eem;
    double z = 1.0;
    ArrayXd lam = eem;
    ArrayXd xsi = (een / (x - alfa)).max(een);
    ArrayXd eta = (een / (beta - x)).max(een);
    ArrayXd mu = eem.max(0.5 * c);
    double zet = 1.0;
    ArrayXd s = eem;
    int itera = 0;

    auto residual = [&](const ArrayXd& x_, const ArrayXd& y_, double z_, const ArrayXd& lam_, const ArrayXd& xsi_,
                        const ArrayXd& eta_, const ArrayXd& mu_, double zet_, const ArrayXd& s_, double& rmax) {
        const ArrayXd ux1 = upp - x_, xl1 = x_ - low;
        const ArrayXd plam = p0 + (sp.P.transpose() * lam_.matrix()).array();
        const ArrayXd qlam = q0 + (sp.Q.transpose() * lam_.matrix()).array();
        const ArrayXd gvec = (sp.P * (1.0 / ux1).matrix() + sp.Q * (1.0 / xl1).matrix()).array();
        const ArrayXd rex = plam / ux1.square() - qlam / xl1.square() - xsi_ + eta_;
        const ArrayXd rey = c + d * y_ - mu_ - lam_;
        const double rez = a0 - zet_ - (a * lam_).sum();
        const ArrayXd relam = gvec - a * z_ - y_ + s_ - b;
        const ArrayXd rexsi = xsi_ * (x_ - alfa) - epsi;
        const ArrayXd reeta = eta_ * (beta - x_) - epsi;
        const ArrayXd remu = mu_ * y_ - epsi;
        const double rezet = zet_ * z_ - epsi;
        const ArrayXd res = lam_ * s_ - epsi;
        double sq = rex.square().sum() + rey.square().sum() + rez * rez + relam.square().sum() +
                    rexsi.square().sum() + reeta.square().sum() + remu.square().sum() + rezet * rezet +
                    res.square().sum();
        rmax = std::max({rex.abs().maxCoeff(), rey.abs().maxCoeff(), std::abs(rez), relam.abs().maxCoeff(),
                         rexsi.abs().maxCoeff(), reeta.abs().maxCoeff(), remu.abs().maxCoeff(), std::abs(rezet),
                         res.abs().maxCoeff()});
        return std::sqrt(sq);
    };

    while (epsi > epsimin) {
        double residumax = 0.0;
        double residunorm = residual(x, y, z, lam, xsi, eta, mu, zet, s, residumax);
        int ittt = 0;
        while (residumax > 0.9 * epsi && ittt < 200) {
            ++ittt;
            ++itera;
            const ArrayXd ux1 = upp - x, xl1 = x - low;
            const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
            const ArrayXd ux3 = ux1 * ux2, xl3 = xl1 * xl2;
            const ArrayXd plam = p0 + (sp.P.transpose() * lam.matrix()).array();
            const ArrayXd qlam = q0 + (sp.Q.transpose() * lam.matrix()).array();
            const ArrayXd gvec = (sp.P * (1.0 / ux1).matrix() + sp.Q * (1.0 / xl1).matrix()).array();
            const MatrixXd GG = sp.P * (1.0 / ux2).matrix().asDiagonal() - sp.Q * (1.0 / xl2).matrix().asDiagonal();
            const ArrayXd dpsidx = plam / ux2 - qlam / xl2;
            const ArrayXd delx = dpsidx - epsi / (x - alfa) + epsi / (beta - x);
            const ArrayXd dely = c + d * y - lam - epsi / y;
            const double delz = a0 - (a * lam).sum() - epsi / z;
            const ArrayXd dellam = gvec - a * z - y - b + epsi / lam;
            const ArrayXd diagx = 2.0 * (plam / ux3 + qlam / xl3) + xsi / (x - alfa) + eta / (beta - x);
            const ArrayXd diagy = d + mu / y;
            const ArrayXd diaglamyi = s / lam + 1.0 / diagy;

            const ArrayXd blam = dellam + dely / diagy - (GG * (delx / diagx).matrix()).array();
            MatrixXd AA(m + 1, m + 1);
            AA.topLeftCorner(m, m) = MatrixXd(diaglamyi.matrix().asDiagonal()) +
                                     GG * (1.0 / diagx).matrix().asDiagonal() * GG.transpose();
            AA.topRightCorner(m, 1) = a.matrix();
            AA.bottomLeftCorner(1, m) = a.matrix().transpose();
            AA(m, m) = -zet / z;
            VectorXd bb(m + 1);
            bb.head(m) = blam.matrix();
            bb(m) = delz;
            const VectorXd solut = AA.fullPivLu().solve(bb);
            const ArrayXd dlam = solut.head(m).array();
            const double dz = solut(m);
            const ArrayXd dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
            const ArrayXd dy = -dely / diagy + dlam / diagy;
            const ArrayXd dxsi = -xsi + epsi / (x - alfa) - (xsi * dx) / (x - alfa);
            const ArrayXd deta = -eta + epsi / (beta - x) + (eta * dx) / (beta - x);
            const ArrayXd dmu = -mu + epsi / y - (mu * dy) / y;
            const double dzet = -zet + epsi / z - zet * dz / z;
            const ArrayXd ds = -s + epsi / lam - (s * dlam) / lam;

            double stmxx = std::max({(-1.01 * dy / y).maxCoeff(), -1.01 * dz / z, (-1.01 * dlam / lam).maxCoeff(),
                                     (-1.01 * dxsi / xsi).maxCoeff(), (-1.01 * deta / eta).maxCoeff(),
                                     (-1.01 * dmu / mu).maxCoeff(), -1.01 * dzet / zet, (-1.01 * ds / s).maxCoeff()});
            const double stmalfa = (-1.01 * dx / (x - alfa)).maxCoeff();
            const double stmbeta = (1.01 * dx / (beta - x)).maxCoeff();
            double steg = 1.0 / std::max({stmalfa, stmbeta, stmxx, 1.0});

            const ArrayXd xold = x, yold = y, lamold = lam, xsiold = xsi, etaold = eta, muold = mu, sold = s;
            const double zold = z, zetold = zet;
            double resinew = 2.0 * residunorm;
            int itto = 0;
            while (resinew > residunorm && itto < 50) {
                ++itto;
                x = xold + steg * dx;
                y = yold + steg * dy;
                z = zold + steg * dz;
                lam = lamold + steg * dlam;
                xsi = xsiold + steg * dxsi;
                eta = etaold + steg * deta;
                mu = muold + steg * dmu;
                zet = zetold + steg * dzet;
                s = sold + steg * ds;
                resinew = residual(x, y, z, lam, xsi, eta, mu, zet, s, residumax);
                steg /= 2.0;
            }
            residunorm = resinew;
        }
        epsi *= 0.1;
    }
    if (!x.allFinite()) throw AnalysisError("MMA subproblem produced a non-finite design");
    return {x.matrix(), y.matrix(), z, itera};
}

}  // namespace

Mma::Mma(Eigen::VectorXd xmin, Eigen::VectorXd xmax, Eigen::VectorXd move_limit, int constraints, MmaParams params)
    : xmin_(std::move(xmin)), xmax_(std::move(xmax)), move_(std::move(move_limit)), m_(constraints), p_(params) {
    if (xmin_.size() != xmax_.size() || move_.size() != xmin_.size()) throw ConfigError("MMA bound sizes differ");
    if ((xmax_.array() <= xmin_.array()).any()) throw ConfigError("MMA needs xmin < xmax for every variable");
    if ((move_.array() <= 0.0).any()) throw ConfigError("MMA move limits must be positive");
    if (m_ < 1) throw ConfigError("MMA needs at least one constraint");
}

Eigen::VectorXd Mma::step(const Eigen::VectorXd& xval, double f0, const Eigen::VectorXd& df0dx,
                          const Eigen::VectorXd& fval, const Eigen::MatrixXd& dfdx) {
    const Eigen::Index n = xval.size();
    if (n != xmin_.size() || df0dx.size() != n || fval.size() != m_ || dfdx.rows() != m_ || dfdx.cols() != n) {
        throw AnalysisError("MMA input sizes do not match the problem");
    }
    if (!df0dx.allFinite() || !fval.allFinite() || !dfdx.allFinite()) throw AnalysisError("non-finite gradient passed to MMA");
    ++iter_;
    const ArrayXd range = (xmax_ - xmin_).array();
    const ArrayXd x = xval.array();
    if (iter_ <= 2) {
        low_ = (x - p_.asyinit * range).matrix();
        upp_ = (x + p_.asyinit * range).matrix();
    } else {
        const ArrayXd zzz = (x - xold1_.array()) * (xold1_.array() - xold2_.array());
        ArrayXd factor = ArrayXd::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (zzz(i) > 0.0) factor(i) = p_.asyincr;
            else if (zzz(i) < 0.0) factor(i) = p_.asydecr;
        }
        ArrayXd low = x - factor * (xold1_.array() - low_.array());
        ArrayXd upp = x + factor * (upp_.array() - xold1_.array());
        low = low.max(x - 10.0 * range).min(x - p_.asymin * range);
        upp = upp.min(x + 10.0 * range).max(x + p_.asymin * range);
        low_ = low.matrix();
        upp_ = upp.matrix();
    }

    const ArrayXd xmami = range.max(1e-5);
    const ArrayXd ux1 = upp_.array() - x, xl1 = x - low_.array();
    const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();

    // Adapt the curvature terms from how the previous approximations did at
    // the point they proposed.
    if (raa_.size() != m_ + 1) raa_ = VectorXd::Constant(m_ + 1, p_.raa0);
    if (have_prev_ && (prev_x_ - xval).norm() == 0.0) {
        const ArrayXd pu = prev_upp_.array() - x, pl = x - prev_low_.array();
        const double w = 0.5 * ((x - xold1_.array()).square() * (prev_upp_ - prev_low_).array() /
                                (pu * pl * xmami)).sum();
        for (int i = 0; i <= m_; ++i) {
            const double actual = i == 0 ? f0 : fval(i - 1);
            const double predicted = prev_r_(i) + (prev_p_.row(i).transpose().array() / pu +
                                                   prev_q_.row(i).transpose().array() / pl).sum();
            const double gap = actual - predicted;
            if (w > 0.0 && gap > 1e-12 * std::max(1.0, std::abs(actual))) {
                raa_(i) = std::min(1.1 * (raa_(i) + gap / w), 10.0 * raa_(i));
            } else {
                raa_(i) = std::max(0.5 * raa_(i), p_.raa0);
            }
        }
    }

    Subproblem sp;
    sp.low = low_;
    sp.upp = upp_;
    const ArrayXd g0 = df0dx.array();
    const ArrayXd pq0 = 0.001 * g0.abs() + raa_(0) / xmami;
    sp.p0 = ((g0.max(0.0) + pq0) * ux2).matrix();
    sp.q0 = (((-g0).max(0.0) + pq0) * xl2).matrix();
    sp.P.resize(m_, n);
    sp.Q.resize(m_, n);
    for (int i = 0; i < m_; ++i) {
        const ArrayXd gi = dfdx.row(i).transpose().array();
        const ArrayXd pq = 0.001 * gi.abs() + raa_(i + 1) / xmami;
        sp.P.row(i) = ((gi.max(0.0) + pq) * ux2).matrix().transpose();
        sp.Q.row(i) = (((-gi).max(0.0) + pq) * xl2).matrix().transpose();
    }
    sp.b = (sp.P * (1.0 / ux1).matrix() + sp.Q * (1.0 / xl1).matrix()) - fval;
    sp.a = VectorXd::Zero(m_);
    sp.c = VectorXd::Constant(m_, p_.c);
    sp.d = VectorXd::Ones(m_);

    info_ = {};
    SubResult r;
    ArrayXd move = move_.array();
    for (;;) {
        sp.alfa = (low_.array() + p_.albefa * (x - low_.array())).max(x - move).max(xmin_.array()).matrix();
        sp.beta = (upp_.array() - p_.albefa * (upp_.array() - x)).min(x + move).min(xmax_.array()).matrix();
        r = subsolv(sp);
        info_.subproblem_iterations += r.iterations;
        info_.max_elastic = r.y.maxCoeff();
        // A subproblem that needs the elastic variables is locally infeasible:
        // retry with halved move limits, twice at most.
        if (info_.max_elastic <= 1e-6 || info_.restorations >= 2) break;
        ++info_.restorations;
        move *= 0.5;
    }
    xold2_ = iter_ >= 2 ? xold1_ : xval;
    xold1_ = xval;
    info_.raa_objective = raa_(0);
    // Guard the box and move limits against round-off in the interior point solve.
    Eigen::VectorXd xnew = r.x;
    for (Eigen::Index i = 0; i < n; ++i) {
        xnew(i) = std::clamp(xnew(i), std::max(xmin_(i), xval(i) - move_(i)), std::min(xmax_(i), xval(i) + move_(i)));
    }
    prev_p_.resize(m_ + 1, n);
    prev_q_.resize(m_ + 1, n);
    prev_r_.resize(m_ + 1);
    prev_p_.row(0) = sp.p0.transpose();
    prev_q_.row(0) = sp.q0.transpose();
    prev_p_.bottomRows(m_) = sp.P;
    prev_q_.bottomRows(m_) = sp.Q;
    prev_r_(0) = f0 - (sp.p0.array() / ux1 + sp.q0.array() / xl1).sum();
    for (int i = 0; i < m_; ++i) {
        prev_r_(i + 1) = fval(i) - (sp.P.row(i).transpose().array() / ux1 + sp.Q.row(i).transpose().array() / xl1).sum();
    }
    prev_low_ = low_;
    prev_upp_ = upp_;
    prev_x_ = xnew;
    have_prev_ = true;
    return xnew;
}

bool ConvergenceMonitor::update(double objective, double volume_ratio) {
    const bool feasible = volume_ratio - 1.0 <= p_.volume_tol;
    bool quiet = false;
    if (!history_.empty()) {
        const double denom = std::abs(objective);
        quiet = denom > 0.0 && std::abs(objective - history_.back()) / denom <= p_.objective_tol;
    }
    history_.push_back(objective);
    counter_ = quiet && feasible ? counter_ + 1 : 0;
    return counter_ >= p_.consecutive;
}

}  // namespace rudder
