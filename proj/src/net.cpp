#include "uqtraj/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace uqtraj {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Chol2 {
    double l11, l21, l22;  // lower-triangular factor
    double sig_a, sig_c;   // softplus derivatives of the diagonal entries

    Eigen::Matrix2d cov() const {
        Eigen::Matrix2d m;
        m << l11 * l11, l11 * l21, l11 * l21, l21 * l21 + l22 * l22;
        return m;
    }
};

Chol2 decode_chol(const Eigen::Vector3d& raw) {
    Chol2 c;
    c.l11 = softplus(raw(0));
    c.l21 = raw(1);
    c.l22 = softplus(raw(2));
    c.sig_a = sigmoid(raw(0));
    c.sig_c = sigmoid(raw(2));
    return c;
}

// d(loss)/d(raw) given symmetric G = d(loss)/d(Sigma) with Sigma = L L^T
Eigen::Vector3d chol_backward(const Eigen::Matrix2d& g, const Chol2& c) {
    Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
    l(0, 0) = c.l11;
    l(1, 0) = c.l21;
    l(1, 1) = c.l22;
    Eigen::Matrix2d dl = 2.0 * g * l;
    return {dl(0, 0) * c.sig_a, dl(1, 0), dl(1, 1) * c.sig_c};
}

}  // namespace

std::vector<int> NetConfig::layer_sizes() const {
    std::vector<int> sizes;
    sizes.push_back(input_dim());
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output_dim());
    return sizes;
}

void NetConfig::validate() const {
    if (past_steps < 1 || future_steps < 1) throw InvalidArgument("NetConfig: bad step counts");
    if (beta < 0.0 || beta > 1.0) throw InvalidArgument("NetConfig: beta outside [0, 1]");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw InvalidArgument("NetConfig: bad dropout_p");
    if (hidden.empty()) throw InvalidArgument("NetConfig: no hidden layers");
    for (int h : hidden)
        if (h < 1) throw InvalidArgument("NetConfig: hidden size < 1");
}

NetParams NetParams::init(const NetConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    NetParams p;
    p.init_seed = seed;
    Rng rng(seed);
    const auto sizes = cfg.layer_sizes();
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) w(i, j) = u(rng);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(fan_out);
        p.w.push_back(std::move(w));
        p.b.push_back(std::move(b));
    }
    return p;
}

std::size_t NetParams::count() const {
    std::size_t n = 0;
    for (const auto& m : w) n += static_cast<std::size_t>(m.size());
    for (const auto& v : b) n += static_cast<std::size_t>(v.size());
    return n;
}

bool NetParams::finite() const {
    for (const auto& m : w)
        if (!m.allFinite()) return false;
    for (const auto& v : b)
        if (!v.allFinite()) return false;
    return true;
}

NetGrads NetGrads::zeros(const NetParams& p) {
    NetGrads g;
    for (const auto& m : p.w) g.w.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
    for (const auto& v : p.b) g.b.push_back(Eigen::VectorXd::Zero(v.size()));
    return g;
}

Batch make_batch(const std::vector<SequencePair>& pairs, const NetConfig& cfg, std::size_t begin,
                 std::size_t count) {
    const std::size_t end = std::min(pairs.size(), count == SIZE_MAX ? pairs.size() : begin + count);
    if (begin >= end) throw InvalidArgument("make_batch: empty range");
    const std::size_t bsz = end - begin;

    Batch batch;
    batch.inputs.resize(cfg.input_dim(), static_cast<Eigen::Index>(bsz));
    batch.target_pos.resize(2 * cfg.future_steps, static_cast<Eigen::Index>(bsz));
    batch.target_cov.resize(3 * cfg.future_steps, static_cast<Eigen::Index>(bsz));
    batch.origins.reserve(bsz);

    for (std::size_t j = 0; j < bsz; ++j) {
        const SequencePair& p = pairs[begin + j];
        if (static_cast<int>(p.past.size()) != cfg.past_steps ||
            static_cast<int>(p.future.size()) != cfg.future_steps)
            throw InvalidArgument("make_batch: sequence length mismatch");
        if (!p.augmented())
            throw InvalidArgument("make_batch: pair lacks covariance channels (run augmentation)");
        const Eigen::Vector2d origin = p.origin;
        batch.origins.push_back(origin);
        const auto col = static_cast<Eigen::Index>(j);
        for (int i = 0; i < cfg.past_steps; ++i) {
            const auto& s = p.past[static_cast<std::size_t>(i)];
            const auto& c = p.past_cov[static_cast<std::size_t>(i)];
            batch.inputs(5 * i + 0, col) = s.x - origin.x();
            batch.inputs(5 * i + 1, col) = s.y - origin.y();
            batch.inputs(5 * i + 2, col) = c.sxx;
            batch.inputs(5 * i + 3, col) = c.sxy;
            batch.inputs(5 * i + 4, col) = c.syy;
        }
        for (int k = 0; k < cfg.future_steps; ++k) {
            const auto& s = p.future[static_cast<std::size_t>(k)];
            const auto& c = p.future_cov[static_cast<std::size_t>(k)];
            batch.target_pos(2 * k + 0, col) = s.x - origin.x();
            batch.target_pos(2 * k + 1, col) = s.y - origin.y();
            batch.target_cov(3 * k + 0, col) = c.sxx;
            batch.target_cov(3 * k + 1, col) = c.sxy;
            batch.target_cov(3 * k + 2, col) = c.syy;
        }
    }
    return batch;
}

namespace {

struct ForwardState {
    std::vector<Eigen::MatrixXd> act;    // tanh outputs per hidden layer, pre-mask
    std::vector<Eigen::MatrixXd> masks;  // inverted-dropout multipliers (empty if p == 0)
    std::vector<Eigen::MatrixXd> h;      // post-mask activations fed to the next layer
    Eigen::MatrixXd out;
};

ForwardState run_forward(const NetParams& params, const NetConfig& cfg,
                         const Eigen::MatrixXd& inputs, Rng* dropout_rng) {
    if (inputs.rows() != cfg.input_dim()) throw InvalidArgument("forward: input dim mismatch");
    const std::size_t n_layers = params.w.size();
    const bool drop = cfg.dropout_p > 0.0;
    if (drop && !dropout_rng)
        throw InvalidArgument("forward: dropout_p > 0 requires an rng for the masks");

    ForwardState st;
    Eigen::MatrixXd h = inputs;
    std::bernoulli_distribution keep(1.0 - cfg.dropout_p);
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
        Eigen::MatrixXd a = ((params.w[l] * h).colwise() + params.b[l]).array().tanh().matrix();
        st.act.push_back(a);
        if (drop) {
            Eigen::MatrixXd m(a.rows(), a.cols());
            const double inv_keep = 1.0 / (1.0 - cfg.dropout_p);
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    m(i, j) = keep(*dropout_rng) ? inv_keep : 0.0;
            st.masks.push_back(m);
            h = a.cwiseProduct(m);
        } else {
            h = a;
        }
        st.h.push_back(h);
    }
    st.out = (params.w.back() * h).colwise() + params.b.back();
    if (!st.out.allFinite()) throw NumericalOverflow("forward: non-finite activation");
    return st;
}

void run_backward(const NetParams& params, const NetConfig& cfg, const Eigen::MatrixXd& inputs,
                  const ForwardState& st, const Eigen::MatrixXd& delta_out, NetGrads& grads) {
    const std::size_t n_layers = params.w.size();
    Eigen::MatrixXd delta = delta_out;
    for (std::size_t l = n_layers; l-- > 0;) {
        const Eigen::MatrixXd& below = l == 0 ? inputs : st.h[l - 1];
        grads.w[l] += delta * below.transpose();
        grads.b[l] += delta.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd back = params.w[l].transpose() * delta;
        if (!st.masks.empty()) back = back.cwiseProduct(st.masks[l - 1]);
        const Eigen::MatrixXd& a = st.act[l - 1];
        delta = back.cwiseProduct((1.0 - a.array().square()).matrix());
    }
}

}  // namespace

Eigen::MatrixXd forward_raw(const NetParams& params, const NetConfig& cfg,
                            const Eigen::MatrixXd& inputs, Rng* dropout_rng) {
    return run_forward(params, cfg, inputs, dropout_rng).out;
}

ForecastOutput decode_forecast(const Eigen::VectorXd& raw, const NetConfig& cfg,
                               const Eigen::Vector2d& origin) {
    if (raw.size() != cfg.output_dim()) throw InvalidArgument("decode_forecast: size mismatch");
    ForecastOutput out;
    out.origin = origin;
    out.steps.resize(static_cast<std::size_t>(cfg.future_steps));
    for (int k = 0; k < cfg.future_steps; ++k) {
        const int base = 8 * k;
        StepOutput& s = out.steps[static_cast<std::size_t>(k)];
        s.mean = {raw(base + 0), raw(base + 1)};
        s.sens = Cov2::fromMatrix(decode_chol(raw.segment<3>(base + 2)).cov());
        s.pred = Cov2::fromMatrix(decode_chol(raw.segment<3>(base + 5)).cov());
    }
    return out;
}

ForecastOutput forward(const NetParams& params, const NetConfig& cfg, const SequencePair& pair,
                       Rng* dropout_rng) {
    // inference-only pairs may have no future targets; build the input column directly
    if (static_cast<int>(pair.past.size()) != cfg.past_steps)
        throw InvalidArgument("forward: past length mismatch");
    if (!pair.augmented()) throw InvalidArgument("forward: pair lacks covariance channels");
    Eigen::MatrixXd input(cfg.input_dim(), 1);
    const Eigen::Vector2d origin = pair.origin;
    for (int i = 0; i < cfg.past_steps; ++i) {
        const auto& s = pair.past[static_cast<std::size_t>(i)];
        const auto& c = pair.past_cov[static_cast<std::size_t>(i)];
        input(5 * i + 0, 0) = s.x - origin.x();
        input(5 * i + 1, 0) = s.y - origin.y();
        input(5 * i + 2, 0) = c.sxx;
        input(5 * i + 3, 0) = c.sxy;
        input(5 * i + 4, 0) = c.syy;
    }
    Eigen::MatrixXd raw = forward_raw(params, cfg, input, dropout_rng);
    return decode_forecast(raw.col(0), cfg, origin);
}

StepNll beta_nll_step(const Eigen::Vector2d& mu, const Eigen::Vector3d& raw_l,
                      const Eigen::Vector2d& target, double beta) {
    const Chol2 c = decode_chol(raw_l);
    const double det = c.l11 * c.l11 * c.l22 * c.l22;
    if (det < 1e-15) throw NumericalOverflow("beta_nll_step: covariance determinant underflow");

    const Eigen::Matrix2d sigma = c.cov();
    Eigen::Matrix2d sinv;
    sinv << sigma(1, 1), -sigma(0, 1), -sigma(1, 0), sigma(0, 0);
    sinv /= det;

    const Eigen::Vector2d r = target - mu;
    StepNll out;
    out.nll = std::log(c.l11) + std::log(c.l22) + 0.5 * r.dot(sinv * r);
    out.weight = std::pow(det, beta);
    const Eigen::Vector2d sr = sinv * r;
    out.d_mu = -sr;
    const Eigen::Matrix2d g = 0.5 * (sinv - sr * sr.transpose());
    out.d_raw = chol_backward(g, c);
    return out;
}

double cov_mse_step(const Eigen::Vector3d& raw_l, const Cov2& target, Eigen::Vector3d* d_raw) {
    const Chol2 c = decode_chol(raw_l);
    const Eigen::Matrix2d d = c.cov() - target.mat();
    const double loss = d(0, 0) * d(0, 0) + 2.0 * d(0, 1) * d(0, 1) + d(1, 1) * d(1, 1);
    if (d_raw) *d_raw = chol_backward(Eigen::Matrix2d(2.0 * d), c);
    return loss;
}

LossTerms loss_and_grad(const NetParams& params, const NetConfig& cfg, const Batch& batch,
                        NetGrads* grads, Rng* dropout_rng, const Eigen::MatrixXd* frozen_weights,
                        double lambda_cov_override, double nll_weight) {
    const double lambda = lambda_cov_override >= 0.0 ? lambda_cov_override : cfg.loss_weight_mse;
    const Eigen::Index bsz = batch.inputs.cols();
    const int steps = cfg.future_steps;
    const double norm = 1.0 / (static_cast<double>(bsz) * static_cast<double>(steps));

    ForwardState st = run_forward(params, cfg, batch.inputs, dropout_rng);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(st.out.rows(), st.out.cols());

    LossTerms terms;
    for (Eigen::Index j = 0; j < bsz; ++j) {
        for (int k = 0; k < steps; ++k) {
            const int base = 8 * k;
            const Eigen::Vector2d mu = st.out.col(j).segment<2>(base);
            const Eigen::Vector3d sens_raw = st.out.col(j).segment<3>(base + 2);
            const Eigen::Vector3d pred_raw = st.out.col(j).segment<3>(base + 5);
            const Eigen::Vector2d y = batch.target_pos.col(j).segment<2>(2 * k);
            const Cov2 cov_target{batch.target_cov(3 * k + 0, j), batch.target_cov(3 * k + 1, j),
                                  batch.target_cov(3 * k + 2, j)};

            StepNll nll = beta_nll_step(mu, pred_raw, y, cfg.beta);
            const double w = nll_weight * (frozen_weights ? (*frozen_weights)(k, j) : nll.weight);
            terms.nll += norm * (frozen_weights ? w : nll_weight) * nll.nll;

            Eigen::Vector3d cov_grad;
            terms.cov_mse += norm * cov_mse_step(sens_raw, cov_target, &cov_grad);

            if (grads) {
                delta.col(j).segment<2>(base) += norm * w * nll.d_mu;
                delta.col(j).segment<3>(base + 5) += norm * w * nll.d_raw;
                delta.col(j).segment<3>(base + 2) += norm * lambda * cov_grad;
            }
        }
    }
    terms.lambda = lambda;
    if (grads) run_backward(params, cfg, batch.inputs, st, delta, *grads);
    return terms;
}

OptimState OptimState::zeros(const NetParams& p) {
    OptimState s;
    for (const auto& m : p.w) {
        s.mw.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
        s.vw.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
    }
    for (const auto& v : p.b) {
        s.mb.push_back(Eigen::VectorXd::Zero(v.size()));
        s.vb.push_back(Eigen::VectorXd::Zero(v.size()));
    }
    return s;
}

void OptimState::apply(NetParams& p, const NetGrads& g, const AdamConfig& cfg) {
    ++step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t l = 0; l < p.w.size(); ++l) {
        mw[l] = cfg.beta1 * mw[l] + (1.0 - cfg.beta1) * g.w[l];
        vw[l] = cfg.beta2 * vw[l].array().matrix() +
                (1.0 - cfg.beta2) * g.w[l].array().square().matrix();
        p.w[l].array() -= cfg.lr * (mw[l].array() / bc1) /
                          ((vw[l].array() / bc2).sqrt() + cfg.eps);
        mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * g.b[l];
        vb[l] = cfg.beta2 * vb[l].array().matrix() +
                (1.0 - cfg.beta2) * g.b[l].array().square().matrix();
        p.b[l].array() -= cfg.lr * (mb[l].array() / bc1) /
                          ((vb[l].array() / bc2).sqrt() + cfg.eps);
    }
}

TrainResult train(const std::vector<SequencePair>& pairs, const NetConfig& cfg,
                  const TrainConfig& tcfg, std::uint64_t init_seed) {
    if (pairs.empty()) throw InvalidArgument("train: no training pairs");
    cfg.validate();

    TrainResult result;
    result.params = NetParams::init(cfg, init_seed);
    OptimState opt = OptimState::zeros(result.params);

    const Batch full = make_batch(pairs, cfg);
    const auto n = static_cast<std::size_t>(full.inputs.cols());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);

    Rng shuffle_rng(substream_seed(tcfg.seed, 0));
    Rng dropout_rng(substream_seed(tcfg.seed, 1));
    Rng* drop = cfg.dropout_p > 0.0 ? &dropout_rng : nullptr;

    NetParams last_good = result.params;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        LossTerms epoch_loss;
        std::size_t seen = 0;
        try {
            for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(tcfg.batch_size)) {
                const std::size_t count = std::min<std::size_t>(tcfg.batch_size, n - start);
                Batch mini;
                mini.inputs.resize(full.inputs.rows(), static_cast<Eigen::Index>(count));
                mini.target_pos.resize(full.target_pos.rows(), static_cast<Eigen::Index>(count));
                mini.target_cov.resize(full.target_cov.rows(), static_cast<Eigen::Index>(count));
                for (std::size_t j = 0; j < count; ++j) {
                    const Eigen::Index src = order[start + j];
                    mini.inputs.col(static_cast<Eigen::Index>(j)) = full.inputs.col(src);
                    mini.target_pos.col(static_cast<Eigen::Index>(j)) = full.target_pos.col(src);
                    mini.target_cov.col(static_cast<Eigen::Index>(j)) = full.target_cov.col(src);
                }
                NetGrads grads = NetGrads::zeros(result.params);
                LossTerms terms = loss_and_grad(result.params, cfg, mini, &grads, drop);
                opt.apply(result.params, grads, tcfg.adam);
                if (!result.params.finite())
                    throw NumericalOverflow("train: parameters diverged");
                epoch_loss.nll += terms.nll * static_cast<double>(count);
                epoch_loss.cov_mse += terms.cov_mse * static_cast<double>(count);
                seen += count;
                last_good = result.params;
            }
        } catch (const NumericalOverflow&) {
            result.params = last_good;
            result.aborted = true;
            return result;
        }
        epoch_loss.nll /= static_cast<double>(seen);
        epoch_loss.cov_mse /= static_cast<double>(seen);
        result.history.push_back(epoch_loss);
    }
    return result;
}

namespace {

Eigen::MatrixXd compute_beta_weights(const NetParams& params, const NetConfig& cfg,
                                     const Batch& batch) {
    Eigen::MatrixXd raw = forward_raw(params, cfg, batch.inputs, nullptr);
    Eigen::MatrixXd weights(cfg.future_steps, batch.inputs.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        for (int k = 0; k < cfg.future_steps; ++k) {
            const Chol2 c = decode_chol(raw.col(j).segment<3>(8 * k + 5));
            weights(k, j) = std::pow(c.l11 * c.l11 * c.l22 * c.l22, cfg.beta);
        }
    }
    return weights;
}

}  // namespace

GradCheckReport grad_check(const NetParams& params, const NetConfig& cfg, const Batch& batch,
                           double tolerance, double h) {
    if (cfg.dropout_p > 0.0)
        throw InvalidArgument("grad_check: run with dropout_p = 0 (masks are not differentiable)");

    const Eigen::MatrixXd frozen = compute_beta_weights(params, cfg, batch);
    NetGrads grads = NetGrads::zeros(params);
    loss_and_grad(params, cfg, batch, &grads, nullptr, &frozen);

    NetParams p = params;
    GradCheckReport report;
    std::size_t idx = 0;

    auto probe = [&](double& value, double analytic) {
        const double saved = value;
        value = saved + h;
        const double up = loss_and_grad(p, cfg, batch, nullptr, nullptr, &frozen).total();
        value = saved - h;
        const double dn = loss_and_grad(p, cfg, batch, nullptr, nullptr, &frozen).total();
        value = saved;
        const double fd = (up - dn) / (2.0 * h);
        // near-zero gradients are compared absolutely: central differences at
        // h = 1e-5 carry ~1e-10 of cancellation noise, so the 1e-4 floor keeps
        // that noise below the tolerance while still catching real errors
        const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-4});
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_param = idx;
        }
        ++idx;
    };

    for (std::size_t l = 0; l < p.w.size(); ++l) {
        for (Eigen::Index i = 0; i < p.w[l].rows(); ++i)
            for (Eigen::Index j = 0; j < p.w[l].cols(); ++j) probe(p.w[l](i, j), grads.w[l](i, j));
        for (Eigen::Index i = 0; i < p.b[l].size(); ++i) probe(p.b[l](i), grads.b[l](i));
    }
    report.n_params = idx;
    if (report.max_rel_error > tolerance)
        throw GradCheckFailure("grad_check: max relative error " +
                               std::to_string(report.max_rel_error) + " at parameter " +
                               std::to_string(report.worst_param));
    return report;
}

void save_checkpoint(const NetParams& params, const NetConfig& cfg, const std::string& path) {
    nlohmann::json j;
    j["format"] = "uqtraj-checkpoint-v1";
    j["config"] = {{"past_steps", cfg.past_steps},
                   {"future_steps", cfg.future_steps},
                   {"hidden", cfg.hidden},
                   {"beta", cfg.beta},
                   {"loss_weight_mse", cfg.loss_weight_mse},
                   {"dropout_p", cfg.dropout_p}};
    j["init_seed"] = params.init_seed;
    j["layers"] = nlohmann::json::array();
    for (std::size_t l = 0; l < params.w.size(); ++l) {
        nlohmann::json layer;
        layer["rows"] = params.w[l].rows();
        layer["cols"] = params.w[l].cols();
        std::vector<double> wflat(params.w[l].data(), params.w[l].data() + params.w[l].size());
        std::vector<double> bflat(params.b[l].data(), params.b[l].data() + params.b[l].size());
        layer["w"] = wflat;
        layer["b"] = bflat;
        j["layers"].push_back(std::move(layer));
    }
    std::ofstream out(path);
    if (!out) throw Error("save_checkpoint: cannot open " + path);
    out << j.dump() << '\n';
}

std::pair<NetParams, NetConfig> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_checkpoint: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("load_checkpoint: " + path + ": " + e.what());
    }
    if (j.value("format", "") != "uqtraj-checkpoint-v1")
        throw Error("load_checkpoint: unknown format in " + path);

    NetConfig cfg;
    const auto& jc = j.at("config");
    cfg.past_steps = jc.at("past_steps");
    cfg.future_steps = jc.at("future_steps");
    cfg.hidden = jc.at("hidden").get<std::vector<int>>();
    cfg.beta = jc.at("beta");
    cfg.loss_weight_mse = jc.at("loss_weight_mse");
    cfg.dropout_p = jc.at("dropout_p");
    cfg.validate();

    NetParams p;
    p.init_seed = j.value("init_seed", 0ULL);
    for (const auto& layer : j.at("layers")) {
        const Eigen::Index rows = layer.at("rows");
        const Eigen::Index cols = layer.at("cols");
        auto wflat = layer.at("w").get<std::vector<double>>();
        auto bflat = layer.at("b").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(wflat.size()) != rows * cols ||
            static_cast<Eigen::Index>(bflat.size()) != rows)
            throw Error("load_checkpoint: layer shape mismatch in " + path);
        p.w.emplace_back(Eigen::Map<Eigen::MatrixXd>(wflat.data(), rows, cols));
        p.b.emplace_back(Eigen::Map<Eigen::VectorXd>(bflat.data(), rows));
    }
    const auto sizes = cfg.layer_sizes();
    if (p.w.size() + 1 != sizes.size()) throw Error("load_checkpoint: layer count mismatch");
    return {std::move(p), cfg};
}

}  // namespace uqtraj
