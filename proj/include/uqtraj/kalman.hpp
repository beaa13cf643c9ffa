#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "uqtraj/types.hpp"

namespace uqtraj {

// Constant-velocity filter configuration.
struct KfConfig {
    double dt = kStepSeconds;
    double q_scale = 0.05;        // discrete white-noise-acceleration intensity
    Cov2 r = Cov2::identity();    // measurement noise
    Cov4 p0 = Cov4::identity();   // initial covariance

    static KfConfig defaults();

    Eigen::Matrix4d transition() const;
    Eigen::Matrix4d processNoise() const;
};

// H extracts position from (x, y, u, v).
Eigen::Matrix<double, 2, 4> observationMatrix();

struct KfPosterior {
    std::vector<TrackState> states;
    std::vector<Cov4> covs;
    std::vector<Eigen::Vector2d> innovations;

    std::size_t size() const { return states.size(); }
};

std::pair<TrackState, Cov4> kf_predict(const TrackState& x, const Cov4& p, const KfConfig& cfg);

std::pair<TrackState, Cov4> kf_update(const TrackState& xbar, const Cov4& pbar,
                                      const Eigen::Vector2d& z, const KfConfig& cfg);

// Initializes from the first two measurements, then runs predict/update over the rest.
KfPosterior filter_trajectory(const std::vector<Eigen::Vector2d>& measurements,
                              const KfConfig& cfg);

// Measurement std as a fraction of the track's bounding-box diagonal; R = sigma^2 I.
double noise_sigma_for(const std::vector<Eigen::Vector2d>& truth, double fraction);

}  // namespace uqtraj
