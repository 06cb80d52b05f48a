#include "rudder/shell_element.hpp"

#include "rudder/error.hpp"

#include <cmath>

namespace rudder {

namespace {

using Mat18 = Eigen::Matrix<double, 18, 18>;
using Vec18 = Eigen::Matrix<double, 18, 1>;

constexpr std::array<int, 9> kBendDofs{2, 3, 4, 8, 9, 10, 14, 15, 16};
constexpr std::array<int, 6> kMembraneDofs{0, 1, 6, 7, 12, 13};
constexpr std::array<int, 3> kDrillDofs{5, 11, 17};

Eigen::Matrix<double, 3, 6> membrane_operator(const TriangleFrame& f) {
    const auto& p = f.xy;
    const double b1 = p[1].y() - p[2].y(), b2 = p[2].y() - p[0].y(), b3 = p[0].y() - p[1].y();
    const double c1 = p[2].x() - p[1].x(), c2 = p[0].x() - p[2].x(), c3 = p[1].x() - p[0].x();
    Eigen::Matrix<double, 3, 6> B;
    B << b1, 0, b2, 0, b3, 0,
         0, c1, 0, c2, 0, c3,
         c1, b1, c2, b2, c3, b3;
    return B / (2.0 * f.area);
}

Mat18 frame_transform(const Eigen::Matrix3d& R) {
    Mat18 T = Mat18::Zero();
    for (int k = 0; k < 6; ++k) T.block<3, 3>(3 * k, 3 * k) = R;
    return T;
}

struct TriangleParts {
    Mat18 membrane = Mat18::Zero();
    Mat18 bending = Mat18::Zero();
    Mat18 drilling = Mat18::Zero();
    Mat18 mass_translation = Mat18::Zero();
    Mat18 mass_rotation = Mat18::Zero();
};

TriangleParts triangle_matrices(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                                const Section& s) {
    const TriangleFrame f = triangle_frame(a, b, c);
    const Eigen::Matrix3d Q = plane_stress(s.E, s.nu);
    TriangleParts out;

    Mat18 km = Mat18::Zero();
    const auto Bm = membrane_operator(f);
    const Eigen::Matrix<double, 6, 6> kmm = f.area * s.t * Bm.transpose() * Q * Bm;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) km(kMembraneDofs[i], kMembraneDofs[j]) = kmm(i, j);

    Mat18 kb = Mat18::Zero();
    const Eigen::Matrix3d Db = Q * (s.t * s.t * s.t / 12.0);
    Eigen::Matrix<double, 9, 9> kbb = Eigen::Matrix<double, 9, 9>::Zero();
    for (const auto& [xi, eta] : {std::pair{0.5, 0.0}, std::pair{0.0, 0.5}, std::pair{0.5, 0.5}}) {
        const auto Bb = dkt_curvature_operator(f, xi, eta);
        kbb += (f.area / 3.0) * Bb.transpose() * Db * Bb;
    }
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) kb(kBendDofs[i], kBendDofs[j]) = kbb(i, j);

    Mat18 kd = Mat18::Zero();
    const double kdrill = kDrillingFactor * s.E * s.t * f.area;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) kd(kDrillDofs[i], kDrillDofs[j]) = kdrill * ((i == j ? 1.0 : 0.0) - 1.0 / 3.0);

    const Mat18 T = frame_transform(f.R);
    out.membrane = T.transpose() * km * T;
    out.bending = T.transpose() * kb * T;
    out.drilling = T.transpose() * kd * T;

    // Isotropic in the three directions, so no frame rotation is needed.
    const double mt = s.rho * s.t * f.area / 12.0;
    const double mr = s.rho * s.t * s.t * s.t / 12.0 * f.area / 3.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int d = 0; d < 3; ++d) out.mass_translation(6 * i + d, 6 * j + d) = mt * (i == j ? 2.0 : 1.0);
        }
        for (int d = 3; d < 6; ++d) out.mass_rotation(6 * i + d, 6 * i + d) = mr;
    }
    return out;
}

}  // namespace

Eigen::Matrix3d plane_stress(double E, double nu) {
    Eigen::Matrix3d Q;
    Q << 1.0, nu, 0.0,
         nu, 1.0, 0.0,
         0.0, 0.0, 0.5 * (1.0 - nu);
    return Q * (E / (1.0 - nu * nu));
}

TriangleFrame triangle_frame(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    const Eigen::Vector3d d1 = b - a;
    const Eigen::Vector3d n = d1.cross(c - a);
    const double twice_area = n.norm();
    if (!(twice_area > 1e-12 * d1.squaredNorm()) || !(twice_area > 0.0)) {
        throw AnalysisError("degenerate shell triangle (zero Jacobian)");
    }
    TriangleFrame f;
    const Eigen::Vector3d e1 = d1.normalized();
    const Eigen::Vector3d e3 = n / twice_area;
    const Eigen::Vector3d e2 = e3.cross(e1);
    f.R.row(0) = e1;
    f.R.row(1) = e2;
    f.R.row(2) = e3;
    f.xy[0] = Eigen::Vector2d::Zero();
    f.xy[1] = Eigen::Vector2d(d1.dot(e1), 0.0);
    f.xy[2] = Eigen::Vector2d((c - a).dot(e1), (c - a).dot(e2));
    f.area = 0.5 * twice_area;
    return f;
}

Eigen::Matrix<double, 3, 9> dkt_curvature_operator(const TriangleFrame& f, double xi, double eta) {
    const auto& p = f.xy;
    // Side k = 4, 5, 6 joins nodes (2,3), (3,1), (1,2).
    const double x23 = p[1].x() - p[2].x(), y23 = p[1].y() - p[2].y();
    const double x31 = p[2].x() - p[0].x(), y31 = p[2].y() - p[0].y();
    const double x12 = p[0].x() - p[1].x(), y12 = p[0].y() - p[1].y();
    const double l4 = x23 * x23 + y23 * y23, l5 = x31 * x31 + y31 * y31, l6 = x12 * x12 + y12 * y12;
    const double P4 = -6.0 * x23 / l4, P5 = -6.0 * x31 / l5, P6 = -6.0 * x12 / l6;
    const double q4 = 3.0 * x23 * y23 / l4, q5 = 3.0 * x31 * y31 / l5, q6 = 3.0 * x12 * y12 / l6;
    const double r4 = 3.0 * y23 * y23 / l4, r5 = 3.0 * y31 * y31 / l5, r6 = 3.0 * y12 * y12 / l6;
    const double t4 = -6.0 * y23 / l4, t5 = -6.0 * y31 / l5, t6 = -6.0 * y12 / l6;

    const double a = 1.0 - 2.0 * xi;
    const double b = 1.0 - 2.0 * eta;
    Eigen::Matrix<double, 9, 1> Hx_xi, Hy_xi, Hx_eta, Hy_eta;
    Hx_xi << P6 * a + (P5 - P6) * eta,
             q6 * a - (q5 + q6) * eta,
             -4.0 + 6.0 * (xi + eta) + r6 * a - eta * (r5 + r6),
             -P6 * a + eta * (P4 + P6),
             q6 * a - eta * (q6 - q4),
             -2.0 + 6.0 * xi + r6 * a + eta * (r4 - r6),
             -eta * (P5 + P4),
             eta * (q4 - q5),
             -eta * (r5 - r4);
    Hy_xi << t6 * a + eta * (t5 - t6),
             1.0 + r6 * a - eta * (r5 + r6),
             -q6 * a + eta * (q5 + q6),
             -t6 * a + eta * (t4 + t6),
             -1.0 + r6 * a + eta * (r4 - r6),
             -q6 * a - eta * (q4 - q6),
             -eta * (t4 + t5),
             eta * (r4 - r5),
             -eta * (q4 - q5);
    Hx_eta << -P5 * b - xi * (P6 - P5),
              q5 * b - xi * (q5 + q6),
              -4.0 + 6.0 * (xi + eta) + r5 * b - xi * (r5 + r6),
              xi * (P4 + P6),
              xi * (q4 - q6),
              -xi * (r6 - r4),
              P5 * b - xi * (P4 + P5),
              q5 * b + xi * (q4 - q5),
              -2.0 + 6.0 * eta + r5 * b + xi * (r4 - r5);
    Hy_eta << -t5 * b - xi * (t6 - t5),
              1.0 + r5 * b - xi * (r5 + r6),
              -q5 * b + xi * (q5 + q6),
              xi * (t4 + t6),
              xi * (r4 - r6),
              -xi * (q4 - q6),
              t5 * b - xi * (t4 + t5),
              -1.0 + r5 * b + xi * (r4 - r5),
              -q5 * b - xi * (q4 - q5);

    // x31 etc. in the usual DKT notation are x3 - x1, y12 = y1 - y2.
    const double X31 = p[2].x() - p[0].x(), Y31 = p[2].y() - p[0].y();
    const double X12 = p[0].x() - p[1].x(), Y12 = p[0].y() - p[1].y();
    Eigen::Matrix<double, 3, 9> B;
    B.row(0) = (Y31 * Hx_xi + Y12 * Hx_eta).transpose();
    B.row(1) = (-X31 * Hy_xi - X12 * Hy_eta).transpose();
    B.row(2) = (-X31 * Hx_xi - X12 * Hx_eta + Y31 * Hy_xi + Y12 * Hy_eta).transpose();
    return B / (2.0 * f.area);
}

ElementMatrices element_matrices(const std::vector<Eigen::Vector3d>& x, const Section& s) {
    const int n = static_cast<int>(x.size());
    ElementMatrices m;
    const int nd = 6 * n;
    m.membrane = Eigen::MatrixXd::Zero(nd, nd);
    m.bending = Eigen::MatrixXd::Zero(nd, nd);
    m.drilling = Eigen::MatrixXd::Zero(nd, nd);
    m.mass_translation = Eigen::MatrixXd::Zero(nd, nd);
    m.mass_rotation = Eigen::MatrixXd::Zero(nd, nd);
    auto scatter = [&](const TriangleParts& tp, const std::array<int, 3>& ids, double w) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const int gi = 6 * ids[static_cast<std::size_t>(i)], gj = 6 * ids[static_cast<std::size_t>(j)];
                m.membrane.block<6, 6>(gi, gj) += w * tp.membrane.block<6, 6>(6 * i, 6 * j);
                m.bending.block<6, 6>(gi, gj) += w * tp.bending.block<6, 6>(6 * i, 6 * j);
                m.drilling.block<6, 6>(gi, gj) += w * tp.drilling.block<6, 6>(6 * i, 6 * j);
                m.mass_translation.block<6, 6>(gi, gj) += w * tp.mass_translation.block<6, 6>(6 * i, 6 * j);
                m.mass_rotation.block<6, 6>(gi, gj) += w * tp.mass_rotation.block<6, 6>(6 * i, 6 * j);
            }
        }
    };
    if (n == 3) {
        scatter(triangle_matrices(x[0], x[1], x[2], s), {0, 1, 2}, 1.0);
    } else if (n == 4) {
        for (const auto& t : kQuadSplits) {
            scatter(triangle_matrices(x[static_cast<std::size_t>(t[0])], x[static_cast<std::size_t>(t[1])],
                                      x[static_cast<std::size_t>(t[2])], s),
                    t, 0.5);
        }
    } else {
        throw AnalysisError("shell elements need 3 or 4 nodes");
    }
    return m;
}

StrainState triangle_strain(const std::array<Eigen::Vector3d, 3>& x, const Eigen::Matrix<double, 18, 1>& u,
                            const Section& s, double xi, double eta) {
    const TriangleFrame f = triangle_frame(x[0], x[1], x[2]);
    const Vec18 ul = frame_transform(f.R) * u;
    Eigen::Matrix<double, 6, 1> um;
    Eigen::Matrix<double, 9, 1> ub;
    Eigen::Vector3d ud;
    for (int i = 0; i < 6; ++i) um(i) = ul(kMembraneDofs[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 9; ++i) ub(i) = ul(kBendDofs[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 3; ++i) ud(i) = ul(kDrillDofs[static_cast<std::size_t>(i)]);
    StrainState st;
    st.membrane = membrane_operator(f) * um;
    st.curvature = dkt_curvature_operator(f, xi, eta) * ub;
    const double mean = ud.mean();
    const double kdrill = kDrillingFactor * s.E * s.t * f.area;
    const double energy = 0.5 * kdrill * (ud.array() - mean).square().sum();
    st.drill_density = energy / (f.area * s.t);
    return st;
}

double fiber_energy_density(const StrainState& st, const Section& s, int side) {
    const Eigen::Vector3d eps = st.membrane + (0.5 * side * s.t) * st.curvature;
    return 0.5 * eps.dot(plane_stress(s.E, s.nu) * eps) + st.drill_density;
}

double von_mises(const Eigen::Vector3d& sigma) {
    const double sx = sigma(0), sy = sigma(1), txy = sigma(2);
    return std::sqrt(std::max(0.0, sx * sx - sx * sy + sy * sy + 3.0 * txy * txy));
}

double fiber_von_mises(const StrainState& st, const Section& s, int side) {
    const Eigen::Vector3d eps = st.membrane + (0.5 * side * s.t) * st.curvature;
    return von_mises(plane_stress(s.E, s.nu) * eps);
}

}  // namespace rudder
