#pragma once

#include <string>
#include <vector>

#include "uqtraj/metrics.hpp"
#include "uqtraj/net.hpp"

namespace uqtraj {

struct Ensemble {
    NetConfig cfg;
    std::vector<NetParams> members;

    int size() const { return static_cast<int>(members.size()); }
};

struct SummaryStep {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Cov2 total;
    Cov2 aleatoric;
    Cov2 epistemic;
    Cov2 sens;  // member-mean of the sensing head
};

struct PredictiveSummary {
    std::vector<SummaryStep> steps;
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();
    std::vector<ForecastOutput> raw;  // per-member / per-sample outputs, for audit

    // world-coordinate forecast for the metrics module; prediction covariance
    // is the total (aleatoric + epistemic) covariance
    Forecast forecast() const;
};

// Moment-matched Gaussian mixture over members: mean of means, mean of
// covariances plus covariance of means.
PredictiveSummary ensemble_predict(const Ensemble& ens, const SequencePair& input);

// Same aggregation over B stochastic dropout passes.
PredictiveSummary mc_dropout_predict(const NetParams& params, const NetConfig& cfg,
                                     const SequencePair& input, int b_samples,
                                     std::uint64_t seed);

void save_ensemble(const Ensemble& ens, const std::string& dir);
Ensemble load_ensemble(const std::string& dir);

}  // namespace uqtraj
