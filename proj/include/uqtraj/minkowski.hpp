#pragma once

#include <Eigen/Dense>

#include "uqtraj/types.hpp"

namespace uqtraj {

// Sensing and prediction ellipses composed by Minkowski addition, plus the
// trace-minimal ellipsoidal outer bound of the sum.
struct TotalUncertainty {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    Ellipse e1;     // sensing
    Ellipse e2;     // prediction
    Ellipse outer;  // outer approximation of e1 (+) e2, translated to center
};

// outer.cov = (1 + 1/c) S1 + (1 + c) S2 with c = sqrt(tr S1 / tr S2),
// where Si already include the ellipses' sigma scaling.
TotalUncertainty minkowski_total(const Ellipse& e1, const Ellipse& e2,
                                 const Eigen::Vector2d& center);

// Exact membership in the Minkowski sum of the two centered ellipses translated
// to `center`. Lagrange-multiplier bisection on the constrained minimization.
bool in_minkowski_sum(const Ellipse& e1, const Ellipse& e2,
                      const Eigen::Vector2d& center, const Eigen::Vector2d& p);

}  // namespace uqtraj
