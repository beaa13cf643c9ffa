#include "uqtraj/metrics.hpp"

#include <cmath>
#include <sstream>

namespace uqtraj {

std::string to_string(UncertaintyMode mode) {
    switch (mode) {
        case UncertaintyMode::PredictionOnly: return "prediction-only";
        case UncertaintyMode::TotalExact: return "total-exact";
        case UncertaintyMode::TotalOuter: return "total-outer";
    }
    return "?";
}

UncertaintyMode uncertainty_mode_from(const std::string& name) {
    if (name == "prediction-only") return UncertaintyMode::PredictionOnly;
    if (name == "total-exact") return UncertaintyMode::TotalExact;
    if (name == "total-outer") return UncertaintyMode::TotalOuter;
    throw InvalidArgument("unknown uncertainty mode: " + name);
}

namespace {

void check_pairs(const std::vector<Forecast>& preds, const std::vector<Truth>& truths) {
    if (preds.size() != truths.size())
        throw InvalidArgument("metrics: forecast/truth sequence count mismatch");
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i].size() != truths[i].size())
            throw InvalidArgument("metrics: step count mismatch at sequence " + std::to_string(i));
}

// region ellipse for MPIW and outer-mode PICP
Ellipse region_ellipse(const StepForecast& f, double sigma_scale, UncertaintyMode mode) {
    Ellipse pred{f.mean, f.pred, sigma_scale};
    if (mode == UncertaintyMode::PredictionOnly) return pred;
    Ellipse sens{f.mean, f.sens, sigma_scale};
    return minkowski_total(sens, pred, f.mean).outer;
}

}  // namespace

double ade(const std::vector<Forecast>& preds, const std::vector<Truth>& truths) {
    check_pairs(preds, truths);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < preds[i].size(); ++k) {
            sum += (preds[i][k].mean - truths[i][k]).norm();
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double fde(const std::vector<Forecast>& preds, const std::vector<Truth>& truths) {
    check_pairs(preds, truths);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].empty()) throw InvalidArgument("fde: empty forecast");
        sum += (preds[i].back().mean - truths[i].back()).norm();
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double picp(const std::vector<Forecast>& preds, const std::vector<Truth>& truths,
            double sigma_scale, UncertaintyMode mode, int* degenerate_steps) {
    check_pairs(preds, truths);
    std::size_t covered = 0, total = 0;
    int degenerate = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < preds[i].size(); ++k) {
            const StepForecast& f = preds[i][k];
            ++total;
            try {
                bool in = false;
                if (mode == UncertaintyMode::TotalExact) {
                    Ellipse sens{Eigen::Vector2d::Zero(), f.sens, sigma_scale};
                    Ellipse pred{Eigen::Vector2d::Zero(), f.pred, sigma_scale};
                    in = in_minkowski_sum(pred, sens, f.mean, truths[i][k]);
                } else {
                    in = contains(region_ellipse(f, sigma_scale, mode), truths[i][k]);
                }
                if (in) ++covered;
            } catch (const DegenerateEllipse&) {
                ++degenerate;  // counted as uncovered
            }
        }
    }
    if (degenerate_steps) *degenerate_steps = degenerate;
    return total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0;
}

std::tuple<double, double, double> mpiw(const std::vector<Forecast>& preds, double sigma_scale,
                                        UncertaintyMode mode) {
    double wx = 0.0, wy = 0.0;
    std::size_t n = 0;
    for (const Forecast& f : preds) {
        for (const StepForecast& s : f) {
            EllipseAxes axes = ellipse_axes(region_ellipse(s, sigma_scale, mode));
            wx += 2.0 * axes.major;
            wy += 2.0 * axes.minor;
            ++n;
        }
    }
    if (n) {
        wx /= static_cast<double>(n);
        wy /= static_cast<double>(n);
    }
    const double combined = std::sqrt(0.5 * wx * wx + 0.5 * wy * wy);
    return {wx, wy, combined};
}

MetricReport compute_metrics(const std::vector<Forecast>& preds, const std::vector<Truth>& truths,
                             double sigma_scale, UncertaintyMode mode) {
    MetricReport r;
    r.ade = ade(preds, truths);
    r.fde = fde(preds, truths);
    r.picp = picp(preds, truths, sigma_scale, mode, &r.n_degenerate);
    std::tie(r.mpiw_x, r.mpiw_y, r.mpiw) = mpiw(preds, sigma_scale, mode);
    r.n_sequences = static_cast<int>(preds.size());
    r.sigma_scale = sigma_scale;
    r.mode = mode;
    return r;
}

std::string MetricReport::csv_header() const {
    return "ade,fde,picp,mpiw_x,mpiw_y,mpiw,n_sequences,n_degenerate,sigma_scale,mode";
}

std::string MetricReport::csv_row() const {
    std::ostringstream os;
    os.precision(10);
    os << ade << ',' << fde << ',' << picp << ',' << mpiw_x << ',' << mpiw_y << ',' << mpiw << ','
       << n_sequences << ',' << n_degenerate << ',' << sigma_scale << ',' << to_string(mode);
    return os.str();
}

std::string MetricReport::json() const {
    std::ostringstream os;
    os.precision(10);
    os << "{\"ade\":" << ade << ",\"fde\":" << fde << ",\"picp\":" << picp
       << ",\"mpiw_x\":" << mpiw_x << ",\"mpiw_y\":" << mpiw_y << ",\"mpiw\":" << mpiw
       << ",\"n_sequences\":" << n_sequences << ",\"n_degenerate\":" << n_degenerate
       << ",\"sigma_scale\":" << sigma_scale << ",\"mode\":\"" << to_string(mode) << "\"}";
    return os.str();
}

}  // namespace uqtraj
