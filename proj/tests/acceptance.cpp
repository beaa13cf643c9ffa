// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "uqtraj/data.hpp"
#include "uqtraj/kalman.hpp"
#include "uqtraj/metrics.hpp"
#include "uqtraj/minkowski.hpp"
#include "uqtraj/net.hpp"
#include "uqtraj/pipeline.hpp"
#include "uqtraj/sampling.hpp"
#include "uqtraj/uq.hpp"

using namespace uqtraj;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s criterion-%02d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::vector<SequencePair> syntheticPairs(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<SequencePair> out;
    for (int i = 0; i < n; ++i) {
        SequencePair p;
        p.ped_id = i;
        double x = g(rng), y = g(rng), u = 0.8 + 0.2 * g(rng), v = 0.2 * g(rng);
        for (int k = 0; k < kSeqSteps; ++k) {
            TrackState s{x, y, u, v, k};
            (k < kPastSteps ? p.past : p.future).push_back(s);
            Cov2 c{0.05 + 0.01 * std::abs(g(rng)), 0.002 * g(rng), 0.05 + 0.01 * std::abs(g(rng))};
            (k < kPastSteps ? p.past_cov : p.future_cov).push_back(psd_clamp(c));
            x += kStepSeconds * u + 0.02 * g(rng);
            y += kStepSeconds * v + 0.02 * g(rng);
        }
        p.origin = p.past.front().pos();
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------- criterion 1

void criterion_grad_check() {
    const auto t0 = std::chrono::steady_clock::now();
    NetConfig cfg;
    cfg.hidden = {8, 8};
    auto pairs = syntheticPairs(4, 1);
    Batch batch = make_batch(pairs, cfg);
    NetParams params = NetParams::init(cfg, 2);
    bool ok = true;
    double err = 0.0;
    std::size_t n = 0;
    try {
        GradCheckReport r = grad_check(params, cfg, batch, 1e-4);
        err = r.max_rel_error;
        n = r.n_params;
    } catch (const GradCheckFailure&) {
        ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && secs < 30.0;
    report(1, "grad-check", ok,
           "max relative error " + fmt(err) + " over " + std::to_string(n) + " params in " +
               fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_kf_equivalence() {
    KfConfig cfg;
    cfg.q_scale = 0.08;
    cfg.r = Cov2::identity() * 0.25;
    Eigen::Matrix4d p0 = Eigen::Matrix4d::Zero();
    p0.diagonal() << 0.25, 0.25, 1.0, 1.0;
    cfg.p0 = Cov4::fromMatrix(p0);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 0.3);
    std::vector<Eigen::Vector2d> zs;
    for (int k = 0; k < 20; ++k) zs.push_back({0.5 * k + n(rng), -0.2 * k + n(rng)});
    KfPosterior post = filter_trajectory(zs, cfg);

    // 1D oracle on the x axis
    Eigen::Vector2d x{zs[0].x(), (zs[1].x() - zs[0].x()) / cfg.dt};
    Eigen::Matrix2d p = (Eigen::Matrix2d() << 0.25, 0.0, 0.0, 1.0).finished();
    Eigen::Matrix2d f;
    f << 1.0, cfg.dt, 0.0, 1.0;
    const double d2 = cfg.dt * cfg.dt;
    Eigen::Matrix2d q;
    q << 0.25 * d2 * d2, 0.5 * d2 * cfg.dt, 0.5 * d2 * cfg.dt, d2;
    q *= cfg.q_scale;

    double max_err = 0.0;
    for (std::size_t k = 1; k < zs.size(); ++k) {
        x = f * x;
        p = f * p * f.transpose() + q;
        const double s = p(0, 0) + 0.25;
        Eigen::Vector2d kg = p.col(0) / s;
        x += kg * (zs[k].x() - x(0));
        Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity();
        ikh(0, 0) -= kg(0);
        ikh(1, 0) -= kg(1);
        p = ikh * p;

        max_err = std::max(max_err, std::abs(post.states[k].x - x(0)));
        max_err = std::max(max_err, std::abs(post.states[k].u - x(1)));
        max_err = std::max(max_err, std::abs(post.covs[k].m(0, 0) - p(0, 0)));
        max_err = std::max(max_err, std::abs(post.covs[k].m(2, 2) - p(1, 1)));
    }

    // Joseph-form cross-check on random updates
    double joseph_err = 0.0;
    KfConfig jc = KfConfig::defaults();
    const auto h = observationMatrix();
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        Eigen::Matrix4d a;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) a(r, c) = g(rng);
        Cov4 pbar = Cov4::fromMatrix(a * a.transpose() + 0.1 * Eigen::Matrix4d::Identity());
        auto [xs, ps] = kf_update({0, 0, 0, 0, 0}, pbar, {g(rng), g(rng)}, jc);
        (void)xs;
        Eigen::Matrix2d s = h * pbar.m * h.transpose() + jc.r.mat();
        Eigen::Matrix<double, 4, 2> kk = pbar.m * h.transpose() * s.inverse();
        Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - kk * h;
        Eigen::Matrix4d joseph = ikh * pbar.m * ikh.transpose() + kk * jc.r.mat() * kk.transpose();
        joseph_err = std::max(joseph_err, (ps.m - joseph).norm() / joseph.norm());
    }

    report(2, "kf-equivalence", max_err < 1e-8 && joseph_err < 1e-8,
           "1d-oracle max err " + fmt(max_err) + ", joseph rel err " + fmt(joseph_err));
}

// ---------------------------------------------------------------- criterion 3

void criterion_decomposition() {
    NetConfig cfg;
    cfg.hidden = {8, 8};
    Ensemble ens;
    ens.cfg = cfg;
    for (int i = 0; i < 4; ++i) ens.members.push_back(NetParams::init(cfg, 100 + i));
    NetConfig dcfg = cfg;
    dcfg.dropout_p = 0.5;
    NetParams dropped = NetParams::init(dcfg, 200);

    auto pairs = syntheticPairs(100, 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        PredictiveSummary se = ensemble_predict(ens, pairs[i]);
        PredictiveSummary sd = mc_dropout_predict(dropped, dcfg, pairs[i], 10, 300 + i);
        for (const auto* s : {&se, &sd})
            for (const auto& step : s->steps)
                worst = std::max(worst,
                                 (step.total.mat() - (step.aleatoric.mat() + step.epistemic.mat()))
                                     .lpNorm<Eigen::Infinity>());
    }
    report(3, "uncertainty-decomposition", worst < 1e-9,
           "max |total - (aleatoric + epistemic)| = " + fmt(worst) + " over 100 inputs");
}

// ---------------------------------------------------------------- criterion 4

Eigen::Matrix2d sqrtm2(const Eigen::Matrix2d& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

// sampling-based membership oracle: draw candidate points of E2 and test
// whether any shifts q into E1; boundary candidates are refined locally so the
// oracle's own error sits far below the 1e-6 disagreement band
double oracle_min_mahalanobis(const Eigen::Matrix2d& s1, const Eigen::Matrix2d& s2,
                              const Eigen::Vector2d& q) {
    if (q.dot(s2.inverse() * q) <= 1.0) return 0.0;
    const Eigen::Matrix2d a = s1.inverse();
    const Eigen::Matrix2d l2 = sqrtm2(s2);
    auto value = [&](double th) {
        Eigen::Vector2d x2 = l2 * Eigen::Vector2d(std::cos(th), std::sin(th));
        Eigen::Vector2d d = q - x2;
        return d.dot(a * d);
    };
    const int n = 4096;
    double best = std::numeric_limits<double>::infinity();
    double best_th = 0.0;
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * M_PI * i / n;
        double v = value(th);
        if (v < best) {
            best = v;
            best_th = th;
        }
    }
    // golden-section refinement around the best sampled angle
    double lo = best_th - 2.0 * M_PI / n, hi = best_th + 2.0 * M_PI / n;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = value(c), fd = value(d);
    for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = value(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = value(d);
        }
    }
    return std::min(best, std::min(fc, fd));
}

void criterion_minkowski() {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::normal_distribution<double> pos(0.0, 2.5);

    auto random_psd = [&]() {
        Eigen::Matrix2d m;
        m << 1.0 + std::abs(g(rng)), 0.7 * g(rng), 0.7 * g(rng), 1.0 + std::abs(g(rng));
        return Eigen::Matrix2d(m * m.transpose() + 0.05 * Eigen::Matrix2d::Identity());
    };

    int agree = 0, band = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        Eigen::Matrix2d s1 = random_psd();
        Eigen::Matrix2d s2 = random_psd();
        Eigen::Vector2d q{pos(rng), pos(rng)};
        double m = oracle_min_mahalanobis(s1, s2, q);
        Ellipse e1{Eigen::Vector2d::Zero(), Cov2::fromMatrix(s1), 1.0};
        Ellipse e2{Eigen::Vector2d::Zero(), Cov2::fromMatrix(s2), 1.0};
        bool got = in_minkowski_sum(e1, e2, Eigen::Vector2d::Zero(), q);
        if (std::abs(m - 1.0) < 1e-6) {
            ++band;  // within the allowed boundary band, not counted against agreement
            ++agree;
        } else if (got == (m <= 1.0)) {
            ++agree;
        }
    }
    const double rate = static_cast<double>(agree) / trials;

    // outer ellipse vs one million sampled boundary sums
    Eigen::Matrix2d s1 = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    Eigen::Matrix2d s2 = Eigen::Vector2d(1.0, 4.0).asDiagonal();
    Ellipse e1{Eigen::Vector2d::Zero(), Cov2::fromMatrix(s1), 1.0};
    Ellipse e2{Eigen::Vector2d::Zero(), Cov2::fromMatrix(s2), 1.0};
    TotalUncertainty tu = minkowski_total(e1, e2, Eigen::Vector2d::Zero());
    Eigen::Matrix2d oinv = tu.outer.cov.mat().inverse();
    Eigen::Matrix2d l1 = sqrtm2(s1), l2 = sqrtm2(s2);
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    int contained = 0;
    const int sums = 1000000;
    for (int i = 0; i < sums; ++i) {
        double a = u(rng), b = u(rng);
        Eigen::Vector2d p = l1 * Eigen::Vector2d(std::cos(a), std::sin(a)) +
                            l2 * Eigen::Vector2d(std::cos(b), std::sin(b));
        if (p.dot(oinv * p) <= 1.0 + 1e-9) ++contained;
    }

    report(4, "minkowski-soundness", rate >= 0.999 && contained == sums,
           "oracle agreement " + fmt(rate) + " (" + std::to_string(band) +
               " in boundary band), outer contained " + std::to_string(contained) + "/1000000");
}

// ---------------------------------------------------------------- criterion 5

void criterion_cts() {
    KfPosterior post;
    for (int k = 0; k < 5; ++k) {
        post.states.push_back({0.3 * k, -0.1 * k, 0.75, -0.25, k});
        post.covs.push_back(Cov4::identity());
        post.innovations.push_back(Eigen::Vector2d::Zero());
    }
    CtsConfig cfg;
    cfg.m = 100000;
    cfg.lambda = 0.9;
    cfg.dt = 0.0;
    cfg.rng_seed = 5;
    auto trajs = sample_trajectories(post, cfg);

    double worst_sigma = 0.0;
    const double se = 1.0 / std::sqrt(static_cast<double>(cfg.m));
    for (int k = 0; k < 5; ++k) {
        Eigen::Vector2d mu = Eigen::Vector2d::Zero();
        for (const auto& t : trajs) mu += t.states[static_cast<std::size_t>(k)].pos();
        mu /= static_cast<double>(cfg.m);
        worst_sigma = std::max(worst_sigma, std::abs(mu.x() - post.states[k].x) / se);
        worst_sigma = std::max(worst_sigma, std::abs(mu.y() - post.states[k].y) / se);
    }

    auto rerun = sample_trajectories(post, cfg);
    bool identical = true;
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t k = 0; k < 5; ++k)
            identical = identical && trajs[i].states[k].x == rerun[i].states[k].x &&
                        trajs[i].states[k].y == rerun[i].states[k].y;

    report(5, "cts-marginals", worst_sigma < 3.0 && identical,
           "worst per-step mean deviation " + fmt(worst_sigma) + " standard errors; rerun " +
               (identical ? "bit-identical" : "MISMATCH"));
}

// ---------------------------------------------------------------- criterion 6

void criterion_picp_oracle() {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 1.0);
    Forecast f;
    Truth t;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        f.push_back({{0.0, 0.0}, Cov2{}, Cov2::identity()});
        t.push_back({n(rng), n(rng)});
    }
    double p = picp({f}, {t}, 1.0, UncertaintyMode::PredictionOnly);
    report(6, "picp-calibration", std::abs(p - 0.3935) < 0.01,
           "picp " + fmt(p) + " vs chi2_2 cdf(1) = 0.3935");
}

// ------------------------------------------------------- desk-scale criteria

struct SceneData {
    std::vector<SequencePair> train;  // augmented, all variants
    std::vector<SequencePair> test;   // augmented, variant 0 only
    std::size_t n_windows = 0;
};

SceneData prepare_scene(const std::string& path, int m_variants, double fraction,
                        std::uint64_t seed, std::size_t max_windows = SIZE_MAX) {
    auto trajs = ingest(path, 10);
    std::vector<SequencePair> windows;
    for (const auto& t : trajs) {
        auto w = sliding_window(t);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    SceneData out;
    out.n_windows = windows.size();
    if (windows.size() > max_windows) {
        // deterministic thinning for desk-scale runs
        std::vector<SequencePair> kept;
        const double step = static_cast<double>(windows.size()) / static_cast<double>(max_windows);
        for (std::size_t i = 0; i < max_windows; ++i)
            kept.push_back(windows[static_cast<std::size_t>(i * step)]);
        windows = std::move(kept);
    }

    DatasetSplit split = train_test_split(std::move(windows), path, seed, 0.789);
    KfConfig kf = KfConfig::defaults();
    CtsConfig cts;
    cts.m = m_variants;
    out.train = augment_with_kf(split.train, fraction, kf, cts, substream_seed(seed, 10));
    // test inputs are the KF posterior mean trails, as at deployment time
    out.test = attach_kf(split.test, fraction, kf, substream_seed(seed, 11));
    return out;
}

Ensemble train_ensemble(const std::vector<SequencePair>& train_set, const NetConfig& cfg,
                        int members, int epochs, std::uint64_t seed) {
    Ensemble ens;
    ens.cfg = cfg;
    const int n_variants = max_variant(train_set) + 1;
    for (int i = 0; i < members; ++i) {
        TrainConfig tcfg;
        tcfg.epochs = epochs;
        tcfg.seed = substream_seed(seed, 20 + static_cast<std::uint64_t>(i));
        TrainResult r = train(filter_variant(train_set, i % n_variants), cfg, tcfg,
                              substream_seed(seed, 40 + static_cast<std::uint64_t>(i)));
        ens.members.push_back(std::move(r.params));
    }
    return ens;
}

// test-set scoring for an M-member prefix of the ensemble
struct TestScore {
    double nll = 0.0;  // 0.5 ln det + 0.5 mahalanobis, averaged per step
    double mse = 0.0;  // per-coordinate squared error, averaged per step
    double picp_pred = 0.0;
    double picp_total_exact = 0.0;
};

TestScore score_ensemble(const Ensemble& full, int m, const std::vector<SequencePair>& test) {
    Ensemble ens;
    ens.cfg = full.cfg;
    for (int i = 0; i < m; ++i) ens.members.push_back(full.members[static_cast<std::size_t>(i)]);

    std::vector<Forecast> preds = predict_all(ens, test);
    std::vector<Truth> truths = truth_futures(test);

    TestScore s;
    std::size_t n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < preds[i].size(); ++k) {
            const Eigen::Matrix2d sig = preds[i][k].pred.mat();
            const Eigen::Vector2d r = truths[i][k] - preds[i][k].mean;
            const double det = sig.determinant();
            s.nll += 0.5 * std::log(std::max(det, 1e-300)) + 0.5 * r.dot(sig.inverse() * r);
            s.mse += 0.5 * r.squaredNorm();
            ++n;
        }
    }
    s.nll /= static_cast<double>(n);
    s.mse /= static_cast<double>(n);
    s.picp_pred = picp(preds, truths, 1.0, UncertaintyMode::PredictionOnly);
    s.picp_total_exact = picp(preds, truths, 1.0, UncertaintyMode::TotalExact);
    return s;
}

void criteria_hotel(const std::string& data_dir) {
    const std::string hotel = data_dir + "/scenes/hotel.txt";
    SceneData scene = prepare_scene(hotel, 5, 0.05, 2024);

    // criterion 11: exact sequence count
    report(11, "pipeline-count", scene.n_windows == 1597,
           "hotel-scale scene produced " + std::to_string(scene.n_windows) +
               " sequences (expected 1597); bundled stand-in annotations, count recorded in "
               "run manifests");

    NetConfig cfg;  // paper-sized architecture
    Ensemble ens = train_ensemble(scene.train, cfg, 5, 150, 7);

    TestScore s1 = score_ensemble(ens, 1, scene.test);
    TestScore s3 = score_ensemble(ens, 3, scene.test);
    TestScore s5 = score_ensemble(ens, 5, scene.test);

    bool c7 = s5.nll < s1.nll && s5.mse <= s1.mse && s5.nll >= -0.6 && s5.nll <= 0.0 &&
              s5.mse >= 0.15 && s5.mse <= 0.30;
    report(7, "ensemble-scaling", c7,
           "test NLL M=1 " + fmt(s1.nll) + " -> M=5 " + fmt(s5.nll) + " (window [-0.6, 0]); MSE " +
               fmt(s1.mse) + " -> " + fmt(s5.mse) + " (window [0.15, 0.30])");

    bool c8 = s3.picp_pred - s1.picp_pred >= 0.05;
    report(8, "ensemble-coverage", c8,
           "PICP M=1 " + fmt(s1.picp_pred) + " vs M=3 " + fmt(s3.picp_pred) + " (gain " +
               fmt(s3.picp_pred - s1.picp_pred) + ", need >= 0.05)");

    bool c9 = s3.picp_total_exact - s3.picp_pred >= 0.05;
    report(9, "total-uncertainty-gain", c9,
           "PICP prediction-only " + fmt(s3.picp_pred) + " vs total " + fmt(s3.picp_total_exact) +
               " at R=5% (gain " + fmt(s3.picp_total_exact - s3.picp_pred) + ", need >= 0.05)");
}

void criterion_scenes(const std::string& data_dir) {
    const std::vector<std::string> scenes{"eth", "hotel", "univ", "zara1", "zara2"};
    int wins = 0;
    std::string detail;
    for (std::size_t si = 0; si < scenes.size(); ++si) {
        SceneData sd = prepare_scene(data_dir + "/scenes/" + scenes[si] + ".txt", 3, 0.05,
                                     3000 + si, 400);
        NetConfig cfg;
        Ensemble ens = train_ensemble(sd.train, cfg, 3, 300, 50 + si);

        NetConfig dcfg;
        dcfg.dropout_p = 0.5;
        TrainConfig tcfg;
        tcfg.epochs = 300;
        tcfg.seed = substream_seed(90 + si, 0);
        TrainResult dr =
            train(filter_variant(sd.train, 0), dcfg, tcfg, substream_seed(90 + si, 1));

        std::vector<Truth> truths = truth_futures(sd.test);
        std::vector<Forecast> ens_preds = predict_all(ens, sd.test);
        std::vector<Forecast> drop_preds =
            predict_all_dropout(dr.params, dcfg, sd.test, 50, 700 + si);

        double ade_e = ade(ens_preds, truths), ade_d = ade(drop_preds, truths);
        auto [ex, ey, mw_e] = mpiw(ens_preds, 1.0, UncertaintyMode::PredictionOnly);
        auto [dx, dy, mw_d] = mpiw(drop_preds, 1.0, UncertaintyMode::PredictionOnly);
        (void)ex; (void)ey; (void)dx; (void)dy;

        bool win = ade_e <= ade_d && mw_e <= mw_d + 0.1;
        if (win) ++wins;
        detail += scenes[si] + (win ? "+" : "-") + "(ade " + fmt(ade_e) + "/" + fmt(ade_d) +
                  ", mpiw " + fmt(mw_e) + "/" + fmt(mw_d) + ") ";
    }
    report(10, "ensemble-vs-dropout", wins >= 4,
           std::to_string(wins) + "/5 scenes favor the ensemble: " + detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <data-dir>\n";
        return 2;
    }
    const std::string data_dir = argv[1];

    try {
        criterion_grad_check();
        criterion_kf_equivalence();
        criterion_decomposition();
        criterion_minkowski();
        criterion_cts();
        criterion_picp_oracle();
        criteria_hotel(data_dir);
        criterion_scenes(data_dir);
    } catch (const std::exception& e) {
        std::cerr << "acceptance: unexpected error: " << e.what() << '\n';
        return 2;
    }

    std::printf("%d/11 criteria passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
