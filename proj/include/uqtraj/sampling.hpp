#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "uqtraj/kalman.hpp"
#include "uqtraj/rng.hpp"
#include "uqtraj/types.hpp"

namespace uqtraj {

// Conditional trajectory sampling: AR(1)-persistent deviations around the
// posterior mean, propagated through the constant-velocity transition and
// rescaled so every step marginally tracks its posterior N(mu_t, P_t).
struct CtsConfig {
    int m = 3;              // number of sampled trajectories (one per ensemble member)
    double lambda = 0.9;    // deviation persistence, in [0, 1)
    std::uint64_t rng_seed = 0;
    double dt = kStepSeconds;  // dt = 0 gives identity dynamics
};

Eigen::VectorXd sample_multivariate_normal(const Eigen::VectorXd& mean,
                                           const Eigen::MatrixXd& cov, Rng& rng);

std::vector<Trajectory> sample_trajectories(const KfPosterior& post, const CtsConfig& cfg);

}  // namespace uqtraj
