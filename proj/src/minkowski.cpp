#include "uqtraj/minkowski.hpp"

namespace uqtraj {

namespace {

Eigen::Matrix2d shape(const Ellipse& e) { return (e.scale * e.scale) * e.cov.mat(); }

Eigen::Matrix2d inv2(const Eigen::Matrix2d& m) {
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    Eigen::Matrix2d inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv / det;
}

}  // namespace

TotalUncertainty minkowski_total(const Ellipse& e1, const Ellipse& e2,
                                 const Eigen::Vector2d& center) {
    if (!is_psd(e1.cov) || !is_psd(e2.cov))
        throw InvalidCovariance("minkowski_total: covariance not PSD");

    const Eigen::Matrix2d s1 = shape(e1);
    const Eigen::Matrix2d s2 = shape(e2);
    const double t1 = s1.trace();
    const double t2 = s2.trace();

    Eigen::Matrix2d outer;
    if (t1 <= 0.0 && t2 <= 0.0) {
        outer = Eigen::Matrix2d::Zero();  // degenerate point set
    } else if (t2 <= 0.0) {
        outer = s1;  // sum with a point
    } else if (t1 <= 0.0) {
        outer = s2;
    } else {
        // trace of the bound, (1 + 1/c)·tr S1 + (1 + c)·tr S2, is minimized at
        // c = sqrt(t1/t2), giving total trace (sqrt(t1) + sqrt(t2))^2
        const double c = std::sqrt(t1 / t2);
        outer = (1.0 + 1.0 / c) * s1 + (1.0 + c) * s2;
    }

    TotalUncertainty tu;
    tu.center = center;
    tu.e1 = e1;
    tu.e2 = e2;
    tu.e1.center = center;
    tu.e2.center = center;
    tu.outer = Ellipse{center, Cov2::fromMatrix(outer), 1.0};
    return tu;
}

bool in_minkowski_sum(const Ellipse& e1, const Ellipse& e2,
                      const Eigen::Vector2d& center, const Eigen::Vector2d& p) {
    const Eigen::Matrix2d s1 = shape(e1);
    if (!(s1.determinant() > 1e-12))
        throw DegenerateEllipse("in_minkowski_sum: e1 degenerate");

    const Eigen::Vector2d q = p - center;
    const Eigen::Matrix2d a = inv2(s1);

    Eigen::Matrix2d s2 = shape(e2);
    if (s2.trace() <= 0.0) {
        return q.dot(a * q) <= 1.0;  // e2 is a point
    }
    // rank-deficient prediction ellipses are floored to keep B finite
    if (!(s2.determinant() > 1e-14 * s2.trace() * s2.trace()))
        s2 = psd_clamp(Cov2::fromMatrix(s2), 1e-12 * s2.trace()).mat();
    const Eigen::Matrix2d b = inv2(s2);

    if (q.dot(b * q) <= 1.0) return true;  // q itself reachable from E2

    // minimize (q-x2)^T A (q-x2) over x2 on the boundary of E2:
    // x2(nu) = (A + nu B)^{-1} A q, find nu with x2^T B x2 = 1
    auto boundary_gap = [&](double nu, Eigen::Vector2d& x2) {
        x2 = inv2(Eigen::Matrix2d(a + nu * b)) * (a * q);
        return x2.dot(b * x2) - 1.0;
    };

    Eigen::Vector2d x2;
    double lo = 0.0;
    double hi = 1.0;
    int it = 0;
    while (boundary_gap(hi, x2) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++it > 200) throw NumericalFailure("in_minkowski_sum: bracket expansion failed");
    }
    for (it = 0; it < 200 && (hi - lo) > 1e-10 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (boundary_gap(mid, x2) > 0.0 ? lo : hi) = mid;
    }
    boundary_gap(0.5 * (lo + hi), x2);

    const Eigen::Vector2d d = q - x2;
    return d.dot(a * d) <= 1.0;
}

}  // namespace uqtraj
