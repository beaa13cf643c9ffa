#include "uqtraj/uq.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace uqtraj {

namespace fs = std::filesystem;

namespace {

PredictiveSummary aggregate(std::vector<ForecastOutput> outputs, const Eigen::Vector2d& origin) {
    if (outputs.empty()) throw InvalidArgument("aggregate: no member outputs");
    const std::size_t n_steps = outputs.front().steps.size();
    const double inv_m = 1.0 / static_cast<double>(outputs.size());

    PredictiveSummary summary;
    summary.origin = origin;
    summary.steps.resize(n_steps);

    for (std::size_t k = 0; k < n_steps; ++k) {
        Eigen::Vector2d mu_star = Eigen::Vector2d::Zero();
        Eigen::Matrix2d aleatoric = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d second_moment = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d sens = Eigen::Matrix2d::Zero();
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            if (outputs[i].steps.size() != n_steps)
                throw InvalidArgument("aggregate: member " + std::to_string(i) +
                                      " step count mismatch");
            const StepOutput& s = outputs[i].steps[k];
            if (!s.mean.allFinite() || !s.pred.finite() || !s.sens.finite())
                throw NumericalOverflow("aggregate: non-finite output from member " +
                                        std::to_string(i));
            mu_star += inv_m * s.mean;
            aleatoric += inv_m * s.pred.mat();
            second_moment += inv_m * (s.mean * s.mean.transpose());
            sens += inv_m * s.sens.mat();
        }
        Eigen::Matrix2d epistemic = second_moment - mu_star * mu_star.transpose();
        // empirical covariance of means; round-off can leave tiny negatives
        epistemic = psd_clamp(Cov2::fromMatrix(epistemic), 0.0).mat();

        SummaryStep& out = summary.steps[k];
        out.mean = mu_star;
        out.aleatoric = Cov2::fromMatrix(aleatoric);
        out.epistemic = Cov2::fromMatrix(epistemic);
        out.total = Cov2::fromMatrix(aleatoric + epistemic);
        out.sens = Cov2::fromMatrix(sens);
    }
    summary.raw = std::move(outputs);
    return summary;
}

}  // namespace

Forecast PredictiveSummary::forecast() const {
    Forecast f;
    f.reserve(steps.size());
    for (const auto& s : steps) f.push_back({s.mean + origin, s.sens, s.total});
    return f;
}

PredictiveSummary ensemble_predict(const Ensemble& ens, const SequencePair& input) {
    if (ens.members.empty()) throw InvalidArgument("ensemble_predict: empty ensemble");
    std::vector<ForecastOutput> outputs;
    outputs.reserve(ens.members.size());
    for (const auto& member : ens.members) outputs.push_back(forward(member, ens.cfg, input));
    return aggregate(std::move(outputs), input.origin);
}

PredictiveSummary mc_dropout_predict(const NetParams& params, const NetConfig& cfg,
                                     const SequencePair& input, int b_samples,
                                     std::uint64_t seed) {
    if (b_samples < 2) throw InvalidArgument("mc_dropout_predict: B must be >= 2");
    Rng rng(seed);
    std::vector<ForecastOutput> outputs;
    outputs.reserve(static_cast<std::size_t>(b_samples));
    Rng* drop = cfg.dropout_p > 0.0 ? &rng : nullptr;
    for (int b = 0; b < b_samples; ++b) outputs.push_back(forward(params, cfg, input, drop));
    return aggregate(std::move(outputs), input.origin);
}

void save_ensemble(const Ensemble& ens, const std::string& dir) {
    fs::create_directories(dir);
    nlohmann::json meta;
    meta["members"] = ens.size();
    std::ofstream(fs::path(dir) / "ensemble.json") << meta.dump() << '\n';
    for (int i = 0; i < ens.size(); ++i)
        save_checkpoint(ens.members[static_cast<std::size_t>(i)], ens.cfg,
                        (fs::path(dir) / ("member_" + std::to_string(i) + ".json")).string());
}

Ensemble load_ensemble(const std::string& dir) {
    std::ifstream meta_in(fs::path(dir) / "ensemble.json");
    if (!meta_in) throw Error("load_ensemble: missing ensemble.json in " + dir);
    nlohmann::json meta;
    meta_in >> meta;
    const int m = meta.at("members");
    Ensemble ens;
    for (int i = 0; i < m; ++i) {
        auto [params, cfg] =
            load_checkpoint((fs::path(dir) / ("member_" + std::to_string(i) + ".json")).string());
        if (i == 0) ens.cfg = cfg;
        ens.members.push_back(std::move(params));
    }
    return ens;
}

}  // namespace uqtraj
