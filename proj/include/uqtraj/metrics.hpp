#pragma once

#include <Eigen/Dense>
#include <string>
#include <tuple>
#include <vector>

#include "uqtraj/minkowski.hpp"
#include "uqtraj/types.hpp"

namespace uqtraj {

enum class UncertaintyMode { PredictionOnly, TotalExact, TotalOuter };

std::string to_string(UncertaintyMode mode);
UncertaintyMode uncertainty_mode_from(const std::string& name);

// One forecast step: predicted mean plus sensing / prediction covariances.
struct StepForecast {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Cov2 sens;
    Cov2 pred;
};

using Forecast = std::vector<StepForecast>;
using Truth = std::vector<Eigen::Vector2d>;

struct MetricReport {
    double ade = 0.0;
    double fde = 0.0;
    double picp = 0.0;
    double mpiw_x = 0.0;
    double mpiw_y = 0.0;
    double mpiw = 0.0;
    int n_sequences = 0;
    int n_degenerate = 0;  // steps counted as uncovered due to degenerate ellipses
    double sigma_scale = 1.0;
    UncertaintyMode mode = UncertaintyMode::PredictionOnly;

    std::string csv_header() const;
    std::string csv_row() const;
    std::string json() const;
};

double ade(const std::vector<Forecast>& preds, const std::vector<Truth>& truths);
double fde(const std::vector<Forecast>& preds, const std::vector<Truth>& truths);

// fraction of (sequence, step) pairs whose truth lies inside the mode's region
double picp(const std::vector<Forecast>& preds, const std::vector<Truth>& truths,
            double sigma_scale, UncertaintyMode mode, int* degenerate_steps = nullptr);

// mean full widths of the major/minor axes, rms-combined
std::tuple<double, double, double> mpiw(const std::vector<Forecast>& preds, double sigma_scale,
                                        UncertaintyMode mode);

MetricReport compute_metrics(const std::vector<Forecast>& preds, const std::vector<Truth>& truths,
                             double sigma_scale, UncertaintyMode mode);

}  // namespace uqtraj
