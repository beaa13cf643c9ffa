#include "uqtraj/types.hpp"

#include <Eigen/Eigenvalues>

namespace uqtraj {

namespace {

Eigen::Matrix2d clamp2(const Eigen::Matrix2d& m, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    Eigen::Vector2d ev = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Cov2 psd_clamp(const Cov2& c, double floor) {
    if (!c.finite()) throw InvalidCovariance("psd_clamp: non-finite 2x2 covariance");
    if (c.sxx >= floor && c.syy >= floor && c.det() >= 0.0) return c;
    return Cov2::fromMatrix(clamp2(c.mat(), floor));
}

Cov4 psd_clamp(const Cov4& c, double floor) {
    if (!c.finite()) throw InvalidCovariance("psd_clamp: non-finite 4x4 covariance");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(c.m);
    if (es.eigenvalues().minCoeff() >= floor) return c;
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(floor);
    return Cov4::fromMatrix(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

bool is_psd(const Cov2& c, double tol) {
    return c.finite() && c.sxx >= -tol && c.syy >= -tol && c.det() >= -tol;
}

bool is_psd(const Cov4& c, double tol) {
    if (!c.finite()) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(c.m);
    return es.eigenvalues().minCoeff() >= -tol;
}

EllipseAxes ellipse_axes(const Ellipse& e) {
    if (!e.cov.finite() || !std::isfinite(e.scale))
        throw InvalidCovariance("ellipse_axes: non-finite input");
    Cov2 c = psd_clamp(e.cov, 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c.mat());
    // eigenvalues() is ascending: [minor^2, major^2]
    double minor = e.scale * std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    double major = e.scale * std::sqrt(std::max(0.0, es.eigenvalues()(1)));
    Eigen::Vector2d principal = es.eigenvectors().col(1);
    double angle = std::atan2(principal.y(), principal.x());
    // fold into [-pi/2, pi/2)
    if (angle >= M_PI_2) angle -= M_PI;
    if (angle < -M_PI_2) angle += M_PI;
    return {major, minor, angle};
}

bool contains(const Ellipse& e, const Eigen::Vector2d& p) {
    double det = e.cov.det();
    if (!(det > 1e-12))
        throw DegenerateEllipse("contains: covariance determinant below 1e-12");
    Eigen::Matrix2d s = e.scale * e.scale * e.cov.mat();
    Eigen::Vector2d d = p - e.center;
    double md = d.dot(s.inverse() * d);
    return md <= 1.0;
}

Cov2 cov_from_axes(double major, double minor, double angle, double scale) {
    double a = major / scale;
    double b = minor / scale;
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Eigen::Vector2d ev(a * a, b * b);
    return Cov2::fromMatrix(rot * ev.asDiagonal() * rot.transpose());
}

}  // namespace uqtraj
