#include "uqtraj/kalman.hpp"

namespace uqtraj {

KfConfig KfConfig::defaults() {
    KfConfig cfg;
    cfg.r = Cov2::identity() * 0.01;
    Eigen::Matrix4d p0 = Eigen::Matrix4d::Zero();
    p0.diagonal() << cfg.r.sxx, cfg.r.syy, 1.0, 1.0;
    cfg.p0 = Cov4::fromMatrix(p0);
    return cfg;
}

Eigen::Matrix4d KfConfig::transition() const {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

Eigen::Matrix4d KfConfig::processNoise() const {
    // discrete white-noise acceleration, independent per axis
    const double d2 = dt * dt;
    const double q11 = 0.25 * d2 * d2;  // dt^4/4
    const double q13 = 0.5 * d2 * dt;   // dt^3/2
    const double q33 = d2;
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
    q(0, 0) = q11; q(0, 2) = q13;
    q(2, 0) = q13; q(2, 2) = q33;
    q(1, 1) = q11; q(1, 3) = q13;
    q(3, 1) = q13; q(3, 3) = q33;
    return q_scale * q;
}

Eigen::Matrix<double, 2, 4> observationMatrix() {
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return h;
}

std::pair<TrackState, Cov4> kf_predict(const TrackState& x, const Cov4& p, const KfConfig& cfg) {
    if (!is_psd(p)) throw InvalidCovariance("kf_predict: prior covariance not PSD");
    const Eigen::Matrix4d f = cfg.transition();
    Eigen::Vector4d xv = f * x.vec();
    TrackState out{xv(0), xv(1), xv(2), xv(3), x.t + 1};
    Cov4 pbar = Cov4::fromMatrix(f * p.m * f.transpose() + cfg.processNoise());
    return {out, pbar};
}

std::pair<TrackState, Cov4> kf_update(const TrackState& xbar, const Cov4& pbar,
                                      const Eigen::Vector2d& z, const KfConfig& cfg) {
    const auto h = observationMatrix();
    Eigen::Matrix2d s = h * pbar.m * h.transpose() + cfg.r.mat();
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    if (std::abs(det) < 1e-15)
        throw SingularInnovation("kf_update: innovation covariance singular");
    // closed-form 2x2 adjugate inverse
    Eigen::Matrix2d sinv;
    sinv << s(1, 1), -s(0, 1), -s(1, 0), s(0, 0);
    sinv /= det;

    Eigen::Matrix<double, 4, 2> k = pbar.m * h.transpose() * sinv;
    Eigen::Vector2d innov = z - h * xbar.vec();
    Eigen::Vector4d xv = xbar.vec() + k * innov;
    TrackState out{xv(0), xv(1), xv(2), xv(3), xbar.t};

    Eigen::Matrix4d p = (Eigen::Matrix4d::Identity() - k * h) * pbar.m;
    Cov4 post = psd_clamp(Cov4::fromMatrix(p));
    return {out, post};
}

KfPosterior filter_trajectory(const std::vector<Eigen::Vector2d>& measurements,
                              const KfConfig& cfg) {
    if (measurements.size() < 2)
        throw InvalidArgument("filter_trajectory: need at least 2 measurements");

    KfPosterior post;
    post.states.reserve(measurements.size());
    post.covs.reserve(measurements.size());
    post.innovations.reserve(measurements.size());

    Eigen::Vector2d v0 = (measurements[1] - measurements[0]) / cfg.dt;
    TrackState x{measurements[0].x(), measurements[0].y(), v0.x(), v0.y(), 0};
    Cov4 p = cfg.p0;
    post.states.push_back(x);
    post.covs.push_back(p);
    post.innovations.push_back(Eigen::Vector2d::Zero());

    for (std::size_t k = 1; k < measurements.size(); ++k) {
        try {
            auto [xbar, pbar] = kf_predict(x, p, cfg);
            post.innovations.push_back(measurements[k] - observationMatrix() * xbar.vec());
            std::tie(x, p) = kf_update(xbar, pbar, measurements[k], cfg);
        } catch (const Error& e) {
            throw NumericalFailure("filter_trajectory: step " + std::to_string(k) + ": " + e.what());
        }
        post.states.push_back(x);
        post.covs.push_back(p);
    }
    return post;
}

double noise_sigma_for(const std::vector<Eigen::Vector2d>& truth, double fraction) {
    if (truth.empty()) throw InvalidArgument("noise_sigma_for: empty track");
    Eigen::Vector2d lo = truth.front(), hi = truth.front();
    for (const auto& p : truth) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    double diag = (hi - lo).norm();
    // degenerate (stationary) tracks fall back to a 1 m reference scale
    if (diag < 1e-9) diag = 1.0;
    return fraction * diag;
}

}  // namespace uqtraj
