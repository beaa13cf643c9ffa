#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "uqtraj/data.hpp"
#include "uqtraj/rng.hpp"
#include "uqtraj/types.hpp"

namespace uqtraj {

// Feedforward encoder-decoder over the flattened past window.
// Input per step: position (2) + position covariance (3). Output per future
// step: mean (2) + sensing-cov factor (3) + prediction-cov factor (3).
struct NetConfig {
    int past_steps = kPastSteps;
    int future_steps = kFutureSteps;
    std::vector<int> hidden{128, 64, 32, 64, 128};  // encoder, latent, decoder
    double beta = 0.5;           // beta-NLL exponent, in [0, 1]
    double loss_weight_mse = 1.0;
    double dropout_p = 0.0;      // 0 for ensemble members, 0.5 for MC dropout

    int input_dim() const { return past_steps * 5; }
    int output_dim() const { return future_steps * 8; }
    std::vector<int> layer_sizes() const;

    void validate() const;
};

struct NetParams {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    std::uint64_t init_seed = 0;

    static NetParams init(const NetConfig& cfg, std::uint64_t seed);
    std::size_t count() const;
    bool finite() const;
};

// Gradient accumulator with the same shapes as NetParams.
struct NetGrads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    static NetGrads zeros(const NetParams& p);
};

struct StepOutput {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();  // relative to pair origin
    Cov2 sens;
    Cov2 pred;
};

struct ForecastOutput {
    std::vector<StepOutput> steps;
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // add to means for world coords
};

// Batched training data, one column per sequence.
struct Batch {
    Eigen::MatrixXd inputs;       // input_dim x B
    Eigen::MatrixXd target_pos;   // 2*future x B, origin-normalized
    Eigen::MatrixXd target_cov;   // 3*future x B (sxx, sxy, syy per step)
    std::vector<Eigen::Vector2d> origins;
};

Batch make_batch(const std::vector<SequencePair>& pairs, const NetConfig& cfg,
                 std::size_t begin = 0, std::size_t count = SIZE_MAX);

// Raw head matrix for a batch; dropout masks drawn from rng when dropout_p > 0.
Eigen::MatrixXd forward_raw(const NetParams& params, const NetConfig& cfg,
                            const Eigen::MatrixXd& inputs, Rng* dropout_rng = nullptr);

ForecastOutput decode_forecast(const Eigen::VectorXd& raw, const NetConfig& cfg,
                               const Eigen::Vector2d& origin);

ForecastOutput forward(const NetParams& params, const NetConfig& cfg, const SequencePair& pair,
                       Rng* dropout_rng = nullptr);

// Per-step bivariate beta-NLL. `raw_l` is the (a, b, c) head triple for the
// prediction covariance; gradients are w.r.t. mu and raw_l of the surrogate
// (beta-weighted) objective. `nll` is the unweighted value.
struct StepNll {
    double nll = 0.0;
    double weight = 1.0;  // stop-gradient (det Sigma)^beta
    Eigen::Vector2d d_mu = Eigen::Vector2d::Zero();
    Eigen::Vector3d d_raw = Eigen::Vector3d::Zero();
};

StepNll beta_nll_step(const Eigen::Vector2d& mu, const Eigen::Vector3d& raw_l,
                      const Eigen::Vector2d& target, double beta);

// Squared Frobenius distance between the decoded sensing covariance and the
// KF target; gradient w.r.t. the raw (a, b, c) head triple.
double cov_mse_step(const Eigen::Vector3d& raw_l, const Cov2& target, Eigen::Vector3d* d_raw);

struct LossTerms {
    double nll = 0.0;      // unweighted, averaged over steps and batch
    double cov_mse = 0.0;  // averaged over steps and batch
    double lambda = 1.0;   // cov_mse weight used for the total
    double total() const { return nll + lambda * cov_mse; }
};

// Joint loss with hand-derived gradients. When `frozen_weights` is non-null
// (future_steps x B), the beta factors are treated as fixed multipliers of the
// NLL value as well, which makes the objective differentiable end-to-end for
// finite-difference checks.
LossTerms loss_and_grad(const NetParams& params, const NetConfig& cfg, const Batch& batch,
                        NetGrads* grads, Rng* dropout_rng = nullptr,
                        const Eigen::MatrixXd* frozen_weights = nullptr,
                        double lambda_cov_override = -1.0, double nll_weight = 1.0);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimState {
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    long step = 0;

    static OptimState zeros(const NetParams& p);
    void apply(NetParams& p, const NetGrads& g, const AdamConfig& cfg);
};

struct TrainConfig {
    int epochs = 150;
    int batch_size = 64;
    std::uint64_t seed = 0;
    AdamConfig adam;
};

struct TrainResult {
    NetParams params;
    std::vector<LossTerms> history;  // per epoch, training set
    bool aborted = false;            // overflow -> last-good params
};

TrainResult train(const std::vector<SequencePair>& pairs, const NetConfig& cfg,
                  const TrainConfig& tcfg, std::uint64_t init_seed);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_param = 0;
    std::size_t n_params = 0;
};

// Central finite differences of the surrogate objective vs analytic gradients.
GradCheckReport grad_check(const NetParams& params, const NetConfig& cfg, const Batch& batch,
                           double tolerance, double h = 1e-5);

// JSON checkpoint: config echo + per-layer parameter arrays.
void save_checkpoint(const NetParams& params, const NetConfig& cfg, const std::string& path);
std::pair<NetParams, NetConfig> load_checkpoint(const std::string& path);

}  // namespace uqtraj
