#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "uqtraj/errors.hpp"

namespace uqtraj {

// One step equals 0.4 s throughout (2.5 Hz annotation rate).
inline constexpr double kStepSeconds = 0.4;
inline constexpr int kPastSteps = 8;
inline constexpr int kFutureSteps = 12;
inline constexpr int kSeqSteps = kPastSteps + kFutureSteps;

inline constexpr double kPsdTol = 1e-12;

// 2D kinematic state at a discrete step index.
struct TrackState {
    double x = 0.0;   // m
    double y = 0.0;   // m
    double u = 0.0;   // m/s
    double v = 0.0;   // m/s
    int t = 0;        // step index, t >= 0

    Eigen::Vector4d vec() const { return {x, y, u, v}; }
    Eigen::Vector2d pos() const { return {x, y}; }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(u) && std::isfinite(v);
    }
};

// Symmetric 2x2 position covariance, compact storage.
struct Cov2 {
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;

    Cov2() = default;
    Cov2(double xx, double xy, double yy) : sxx(xx), sxy(xy), syy(yy) {}

    static Cov2 identity() { return {1.0, 0.0, 1.0}; }
    static Cov2 fromMatrix(const Eigen::Matrix2d& m) {
        return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
    }

    Eigen::Matrix2d mat() const {
        Eigen::Matrix2d m;
        m << sxx, sxy, sxy, syy;
        return m;
    }

    double trace() const { return sxx + syy; }
    double det() const { return sxx * syy - sxy * sxy; }
    bool finite() const { return std::isfinite(sxx) && std::isfinite(sxy) && std::isfinite(syy); }

    Cov2 operator+(const Cov2& o) const { return {sxx + o.sxx, sxy + o.sxy, syy + o.syy}; }
    Cov2 operator*(double s) const { return {sxx * s, sxy * s, syy * s}; }
};

// Symmetric 4x4 full-state covariance over (x, y, u, v).
struct Cov4 {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();

    Cov4() = default;
    static Cov4 fromMatrix(const Eigen::Matrix4d& a) {
        Cov4 c;
        c.m = 0.5 * (a + a.transpose());
        return c;
    }
    static Cov4 identity() { return fromMatrix(Eigen::Matrix4d::Identity()); }

    Cov2 posBlock() const { return Cov2::fromMatrix(m.topLeftCorner<2, 2>()); }
    double trace() const { return m.trace(); }
    bool finite() const { return m.allFinite(); }
};

// Clamp eigenvalues below `floor` up to `floor`; keeps eigenvectors.
Cov2 psd_clamp(const Cov2& c, double floor = kPsdTol);
Cov4 psd_clamp(const Cov4& c, double floor = kPsdTol);

bool is_psd(const Cov2& c, double tol = kPsdTol);
bool is_psd(const Cov4& c, double tol = kPsdTol);

// sigma-scaled covariance ellipse centered at `center`.
struct Ellipse {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    Cov2 cov;
    double scale = 1.0;  // sigma multiplier
};

struct EllipseAxes {
    double major = 0.0;  // halfwidth, m
    double minor = 0.0;  // halfwidth, m
    double angle = 0.0;  // rad, principal eigenvector ccw from +x, in [-pi/2, pi/2)
};

// Halfwidths are scale*sqrt(eigenvalues of cov).
EllipseAxes ellipse_axes(const Ellipse& e);

// Mahalanobis containment w.r.t. scale^2 * cov. Throws DegenerateEllipse when det <= 1e-12.
bool contains(const Ellipse& e, const Eigen::Vector2d& p);

// Inverse of ellipse_axes, for round-trip checks and plot dumps.
Cov2 cov_from_axes(double major, double minor, double angle, double scale = 1.0);

// Ordered pedestrian track. covs, when present, parallels states.
struct Trajectory {
    std::vector<TrackState> states;
    std::optional<std::vector<Cov2>> covs;
    int ped_id = -1;

    std::size_t size() const { return states.size(); }
};

}  // namespace uqtraj
