// uqtraj: ingest -> augment -> train -> evaluate -> report pipeline driver.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "uqtraj/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uqtraj;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitArtifact = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("UQTRAJ_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

std::vector<double> parse_fractions(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    const std::vector<std::string>& inputs, const json& extra = json::object()) {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["inputs"] = json::object();
    for (const auto& p : inputs) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(file_hash(p)));
        m["inputs"][p] = buf;
    }
    for (auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream(out_dir / "manifest.json") << m.dump(2) << '\n';
}

struct CommonOpts {
    std::string out = "out";
    std::uint64_t seed = default_seed();
};

// read a config JSON and let CLI flags override afterwards
json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw IngestError("config file not found: " + path);
    json j;
    in >> j;
    return j;
}

int cmd_ingest(const std::string& input, int stride, const CommonOpts& common,
               const std::string& scene) {
    if (!fs::exists(input)) {
        std::cerr << "ingest: input file not found: " << input << '\n';
        return kExitInput;
    }
    auto trajectories = ingest(input, stride);
    std::vector<SequencePair> windows;
    for (const auto& t : trajectories) {
        auto w = sliding_window(t);
        windows.insert(windows.end(), w.begin(), w.end());
    }

    fs::create_directories(common.out);
    write_pairs_jsonl(windows, (fs::path(common.out) / "windows.jsonl").string());

    json cfg{{"input", input}, {"stride", stride}, {"scene", scene}, {"seed", common.seed}};
    write_manifest(common.out, "ingest", cfg, {input},
                   json{{"n_trajectories", trajectories.size()}, {"n_sequences", windows.size()}});

    std::cout << "ingested " << trajectories.size() << " trajectories, " << windows.size()
              << " sequences of " << kSeqSteps << " steps (scene: " << scene << ")\n";
    return kExitOk;
}

int cmd_augment(const std::string& windows_path, const std::string& fractions_csv, int m,
                double lambda, double q_scale, double train_ratio, const CommonOpts& common) {
    auto windows = read_pairs_jsonl(windows_path);
    auto fractions = parse_fractions(fractions_csv);
    if (windows.empty() || fractions.empty()) {
        std::cerr << "augment: empty windows or fraction list\n";
        return kExitInput;
    }

    KfConfig kf = KfConfig::defaults();
    kf.q_scale = q_scale;
    CtsConfig cts;
    cts.m = m;
    cts.lambda = lambda;

    // split the raw windows first so no sequence (or any of its CTS variants)
    // appears on both sides
    DatasetSplit split = train_test_split(std::move(windows), "custom", common.seed, train_ratio);
    const std::size_t n_train_seq = split.train.size();
    const std::size_t n_test_seq = split.test.size();
    auto train_aug =
        domain_randomize(split.train, fractions, kf, cts, substream_seed(common.seed, 10));
    // the test side keeps the KF posterior mean trail (no CTS sampling): that
    // is the forecaster's input at deployment time
    std::vector<SequencePair> test_aug;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        auto part = attach_kf(split.test, fractions[fi], kf,
                              substream_seed(substream_seed(common.seed, 11), fi));
        test_aug.insert(test_aug.end(), std::make_move_iterator(part.begin()),
                        std::make_move_iterator(part.end()));
    }

    fs::create_directories(common.out);
    write_pairs_jsonl(train_aug, (fs::path(common.out) / "train.jsonl").string());
    write_pairs_jsonl(test_aug, (fs::path(common.out) / "test.jsonl").string());

    json cfg{{"windows", windows_path}, {"fractions", fractions},      {"m", m},
             {"lambda", lambda},        {"q_scale", q_scale},          {"train_ratio", train_ratio},
             {"seed", common.seed}};
    write_manifest(common.out, "augment", cfg, {windows_path},
                   json{{"n_train_sequences", n_train_seq},
                        {"n_test_sequences", n_test_seq},
                        {"n_train_records", train_aug.size()},
                        {"n_test_records", test_aug.size()}});

    std::cout << "split " << n_train_seq << " train / " << n_test_seq << " test sequences; "
              << fractions.size() << " fraction(s) x " << m << " variant(s) -> "
              << train_aug.size() << " train / " << test_aug.size() << " test records\n";
    return kExitOk;
}

int cmd_train(const std::string& data_dir, int members, int epochs, int batch, double dropout_p,
              double beta, const std::string& hidden_csv, const CommonOpts& common) {
    const std::string train_path = (fs::path(data_dir) / "train.jsonl").string();
    if (!fs::exists(train_path)) {
        std::cerr << "train: " << train_path << " not found\n";
        return kExitInput;
    }
    auto pairs = read_pairs_jsonl(train_path);

    NetConfig cfg;
    cfg.dropout_p = dropout_p;
    cfg.beta = beta;
    if (!hidden_csv.empty()) cfg.hidden = parse_ints(hidden_csv);

    TrainConfig tcfg;
    tcfg.epochs = epochs;
    tcfg.batch_size = batch;

    fs::create_directories(common.out);
    std::ofstream losses(fs::path(common.out) / "loss_history.csv");
    losses << "member,epoch,nll,cov_mse\n";

    Ensemble ens;
    ens.cfg = cfg;
    for (int i = 0; i < members; ++i) {
        // each member consumes its own CTS bootstrap of the data
        auto member_pairs = filter_variant(pairs, i % std::max(1, max_variant(pairs) + 1));
        if (member_pairs.empty()) member_pairs = pairs;
        tcfg.seed = substream_seed(common.seed, 1000 + static_cast<std::uint64_t>(i));
        TrainResult result =
            train(member_pairs, cfg, tcfg, substream_seed(common.seed, static_cast<std::uint64_t>(i)));
        if (result.aborted) {
            std::cerr << "train: member " << i << " aborted on numerical overflow\n";
            return kExitNumeric;
        }
        for (std::size_t e = 0; e < result.history.size(); ++e)
            losses << i << ',' << e << ',' << result.history[e].nll << ','
                   << result.history[e].cov_mse << '\n';
        ens.members.push_back(std::move(result.params));
        if (!result.history.empty())
            std::cout << "member " << i << ": final nll " << result.history.back().nll
                      << " cov mse " << result.history.back().cov_mse << '\n';
    }
    save_ensemble(ens, common.out);

    json cfgj{{"data", data_dir},   {"members", members}, {"epochs", epochs},
              {"batch", batch},     {"dropout_p", dropout_p}, {"beta", beta},
              {"seed", common.seed}};
    write_manifest(common.out, "train", cfgj, {train_path});
    std::cout << "saved " << members << " checkpoint(s) to " << common.out << '\n';
    return kExitOk;
}

int cmd_evaluate(const std::string& model_dir, const std::string& data_dir, double sigma,
                 bool use_dropout, int dropout_b, const CommonOpts& common, int dump_limit) {
    const std::string test_path = (fs::path(data_dir) / "test.jsonl").string();
    if (!fs::exists(test_path)) {
        std::cerr << "evaluate: " << test_path << " not found\n";
        return kExitInput;
    }
    Ensemble ens;
    try {
        ens = load_ensemble(model_dir);
    } catch (const Error& e) {
        std::cerr << "evaluate: cannot load model: " << e.what() << '\n';
        return kExitArtifact;
    }

    auto pairs = filter_variant(read_pairs_jsonl(test_path), 0);
    if (pairs.empty()) {
        std::cerr << "evaluate: no variant-0 test sequences\n";
        return kExitInput;
    }
    if (static_cast<int>(pairs.front().past.size()) != ens.cfg.past_steps) {
        std::cerr << "evaluate: checkpoint/config mismatch (past steps)\n";
        return kExitArtifact;
    }

    std::vector<PredictiveSummary> summaries;
    std::vector<Forecast> forecasts;
    if (use_dropout) {
        if (ens.cfg.dropout_p <= 0.0) {
            std::cerr << "evaluate: --mc requested but model has dropout_p = 0\n";
            return kExitArtifact;
        }
        forecasts = predict_all_dropout(ens.members.front(), ens.cfg, pairs, dropout_b,
                                        common.seed, &summaries);
    } else {
        forecasts = predict_all(ens, pairs, &summaries);
    }
    auto truths = truth_futures(pairs);

    fs::create_directories(common.out);
    std::ofstream csv(fs::path(common.out) / "metrics.csv");
    json all = json::array();
    bool wrote_header = false;
    for (UncertaintyMode mode : {UncertaintyMode::PredictionOnly, UncertaintyMode::TotalExact,
                                 UncertaintyMode::TotalOuter}) {
        MetricReport r = compute_metrics(forecasts, truths, sigma, mode);
        if (!wrote_header) {
            csv << r.csv_header() << '\n';
            wrote_header = true;
        }
        csv << r.csv_row() << '\n';
        all.push_back(json::parse(r.json()));
        std::cout << to_string(mode) << ": ade " << r.ade << " fde " << r.fde << " picp " << r.picp
                  << " mpiw " << r.mpiw << '\n';
    }
    std::ofstream(fs::path(common.out) / "metrics.json") << all.dump(2) << '\n';

    // plot-ready per-trajectory dumps
    const int n_dump = std::min<int>(dump_limit, static_cast<int>(pairs.size()));
    for (int i = 0; i < n_dump; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "forecast_%04d.csv", i);
        std::ofstream dump(fs::path(common.out) / name);
        dump << "step,truth_x,truth_y,mean_x,mean_y,sens_xx,sens_xy,sens_yy,"
                "pred_xx,pred_xy,pred_yy,total_outer_xx,total_outer_xy,total_outer_yy\n";
        const auto& f = forecasts[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < f.size(); ++k) {
            const auto& s = f[k];
            Ellipse sens{s.mean, s.sens, sigma};
            Ellipse pred{s.mean, s.pred, sigma};
            Cov2 outer = minkowski_total(sens, pred, s.mean).outer.cov;
            dump << k + 1 << ',' << truths[static_cast<std::size_t>(i)][k].x() << ','
                 << truths[static_cast<std::size_t>(i)][k].y() << ',' << s.mean.x() << ','
                 << s.mean.y() << ',' << s.sens.sxx << ',' << s.sens.sxy << ',' << s.sens.syy
                 << ',' << s.pred.sxx << ',' << s.pred.sxy << ',' << s.pred.syy << ','
                 << outer.sxx << ',' << outer.sxy << ',' << outer.syy << '\n';
        }
    }

    json cfgj{{"model", model_dir},     {"data", data_dir}, {"sigma", sigma},
              {"mc_dropout", use_dropout}, {"dropout_b", dropout_b}, {"seed", common.seed}};
    write_manifest(common.out, "evaluate", cfgj, {test_path},
                   json{{"n_sequences", pairs.size()}});
    return kExitOk;
}

int cmd_ood_predict(const std::string& model_dir, const std::string& input, int stride,
                    double fraction, const CommonOpts& common) {
    if (!fs::exists(input)) {
        std::cerr << "ood-predict: input file not found: " << input << '\n';
        return kExitInput;
    }
    Ensemble ens;
    try {
        ens = load_ensemble(model_dir);
    } catch (const Error& e) {
        std::cerr << "ood-predict: cannot load model: " << e.what() << '\n';
        return kExitArtifact;
    }

    auto trajectories = ingest(input, stride);
    fs::create_directories(common.out);

    int scenario = 0;
    for (const auto& traj : trajectories) {
        if (static_cast<int>(traj.size()) < ens.cfg.past_steps) {
            std::cerr << "ood-predict: trajectory " << traj.ped_id << " shorter than "
                      << ens.cfg.past_steps << " observed steps\n";
            return kExitInput;
        }
        // KF over the observed steps supplies the covariance channels
        std::vector<Eigen::Vector2d> meas;
        for (int k = 0; k < ens.cfg.past_steps; ++k)
            meas.push_back(traj.states[static_cast<std::size_t>(k)].pos());
        KfConfig kf = KfConfig::defaults();
        const double sigma_m = noise_sigma_for(meas, fraction);
        kf.r = Cov2{sigma_m * sigma_m, 0.0, sigma_m * sigma_m};
        KfPosterior post = filter_trajectory(meas, kf);

        SequencePair pair;
        pair.ped_id = traj.ped_id;
        pair.past = post.states;
        for (const auto& c : post.covs) pair.past_cov.push_back(c.posBlock());
        pair.origin = pair.past.front().pos();
        pair.future.resize(static_cast<std::size_t>(ens.cfg.future_steps));
        pair.future_cov.resize(static_cast<std::size_t>(ens.cfg.future_steps));

        PredictiveSummary summary = ensemble_predict(ens, pair);

        char name[32];
        std::snprintf(name, sizeof(name), "ood_%04d.csv", scenario++);
        std::ofstream dump(fs::path(common.out) / name);
        dump << "step,mean_x,mean_y,sens_xx,sens_xy,sens_yy,pred_xx,pred_xy,pred_yy,"
                "epistemic_trace,total_outer_xx,total_outer_xy,total_outer_yy\n";
        for (std::size_t k = 0; k < summary.steps.size(); ++k) {
            const auto& s = summary.steps[k];
            Eigen::Vector2d world = s.mean + summary.origin;
            Ellipse sens{world, s.sens, 1.0};
            Ellipse pred{world, s.total, 1.0};
            Cov2 outer = minkowski_total(sens, pred, world).outer.cov;
            dump << k + 1 << ',' << world.x() << ',' << world.y() << ',' << s.sens.sxx << ','
                 << s.sens.sxy << ',' << s.sens.syy << ',' << s.total.sxx << ',' << s.total.sxy
                 << ',' << s.total.syy << ',' << s.epistemic.trace() << ',' << outer.sxx << ','
                 << outer.sxy << ',' << outer.syy << '\n';
        }
    }

    json cfgj{{"model", model_dir}, {"input", input},      {"stride", stride},
              {"fraction", fraction}, {"seed", common.seed}};
    write_manifest(common.out, "ood-predict", cfgj, {input},
                   json{{"n_scenarios", scenario}});
    std::cout << "wrote " << scenario << " forecast dump(s) to " << common.out << '\n';
    return kExitOk;
}

int cmd_grad_check(const std::string& hidden_csv, double tolerance, const CommonOpts& common) {
    NetConfig cfg;
    cfg.hidden = hidden_csv.empty() ? std::vector<int>{8, 8} : parse_ints(hidden_csv);

    // synthetic batch with plausible magnitudes
    Rng rng(common.seed + 7);
    std::vector<SequencePair> pairs;
    for (int n = 0; n < 4; ++n) {
        SequencePair p;
        for (int i = 0; i < cfg.past_steps; ++i) {
            p.past.push_back({0.3 * i + 0.05 * gauss(rng), 0.1 * i, 0.75, 0.25, i});
            p.past_cov.push_back({0.05 + 0.01 * i, 0.002, 0.04});
        }
        for (int k = 0; k < cfg.future_steps; ++k) {
            p.future.push_back({0.3 * (cfg.past_steps + k), 0.1 * (cfg.past_steps + k) +
                                0.1 * gauss(rng), 0.75, 0.25, cfg.past_steps + k});
            p.future_cov.push_back({0.06 + 0.01 * k, 0.003, 0.05});
        }
        p.origin = p.past.front().pos();
        pairs.push_back(std::move(p));
    }
    Batch batch = make_batch(pairs, cfg);
    NetParams params = NetParams::init(cfg, common.seed + 11);
    try {
        GradCheckReport report = grad_check(params, cfg, batch, tolerance);
        std::cout << "grad-check: ok, max relative error " << report.max_rel_error << " over "
                  << report.n_params << " parameters\n";
    } catch (const GradCheckFailure& e) {
        std::cerr << "grad-check: FAILED: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"end-to-end pedestrian trajectory forecasting with propagated uncertainty"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its keys");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "read TSV annotations and window them");
    std::string in_file, scene = "custom";
    int stride = 1;
    ingest_cmd->add_option("--input", in_file, "TSV annotation file")->required();
    ingest_cmd->add_option("--stride", stride, "frame stride for 0.4 s sampling");
    ingest_cmd->add_option("--scene", scene, "scene label");
    ingest_cmd->add_option("--out", common.out, "output directory");
    ingest_cmd->add_option("--seed", common.seed, "root RNG seed");

    // augment
    auto* augment_cmd = app.add_subcommand("augment", "KF augmentation + domain randomization");
    std::string windows_path, fractions = "0.05";
    int cts_m = 3;
    double lambda = 0.9, q_scale = 0.05, train_ratio = 0.789;
    augment_cmd->add_option("--windows", windows_path, "windows.jsonl from ingest")->required();
    augment_cmd->add_option("--fractions", fractions, "comma-separated noise fractions");
    augment_cmd->add_option("--m", cts_m, "CTS bootstrap count");
    augment_cmd->add_option("--lambda", lambda, "CTS deviation persistence");
    augment_cmd->add_option("--q-scale", q_scale, "process noise intensity");
    augment_cmd->add_option("--train-ratio", train_ratio, "train split fraction");
    augment_cmd->add_option("--out", common.out, "output directory");
    augment_cmd->add_option("--seed", common.seed, "root RNG seed");

    // train
    auto* train_cmd = app.add_subcommand("train", "train ensemble members or a dropout model");
    std::string data_dir;
    int members = 3, epochs = 150, batch = 64;
    double dropout_p = 0.0, beta = 0.5;
    std::string hidden_csv;
    train_cmd->add_option("--data", data_dir, "directory with train.jsonl")->required();
    train_cmd->add_option("--members", members, "ensemble size M");
    train_cmd->add_option("--epochs", epochs, "training epochs");
    train_cmd->add_option("--batch", batch, "minibatch size");
    train_cmd->add_option("--dropout-p", dropout_p, "dropout probability");
    train_cmd->add_option("--beta", beta, "beta-NLL exponent");
    train_cmd->add_option("--hidden", hidden_csv, "comma-separated hidden sizes");
    train_cmd->add_option("--out", common.out, "output directory");
    train_cmd->add_option("--seed", common.seed, "root RNG seed");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "metrics in all uncertainty modes");
    std::string model_dir;
    double sigma = 1.0;
    bool use_mc = false;
    int dropout_b = 50, dump_limit = 8;
    eval_cmd->add_option("--model", model_dir, "ensemble directory")->required();
    eval_cmd->add_option("--data", data_dir, "directory with test.jsonl")->required();
    eval_cmd->add_option("--sigma", sigma, "sigma scale for the ellipses");
    eval_cmd->add_flag("--mc", use_mc, "MC-dropout inference instead of ensemble averaging");
    eval_cmd->add_option("--dropout-b", dropout_b, "MC dropout sample count");
    eval_cmd->add_option("--dump-limit", dump_limit, "number of per-trajectory dumps");
    eval_cmd->add_option("--out", common.out, "output directory");
    eval_cmd->add_option("--seed", common.seed, "root RNG seed");

    // ood-predict
    auto* ood_cmd = app.add_subcommand("ood-predict", "inference on external trajectory files");
    double fraction = 0.05;
    ood_cmd->add_option("--model", model_dir, "ensemble directory")->required();
    ood_cmd->add_option("--input", in_file, "TSV trajectory file")->required();
    ood_cmd->add_option("--stride", stride, "frame stride");
    ood_cmd->add_option("--fraction", fraction, "measurement noise fraction for the KF front-end");
    ood_cmd->add_option("--out", common.out, "output directory");
    ood_cmd->add_option("--seed", common.seed, "root RNG seed");

    // grad-check
    auto* grad_cmd = app.add_subcommand("grad-check", "finite-difference gradient validation");
    std::string gc_hidden;
    double tolerance = 1e-4;
    grad_cmd->add_option("--hidden", gc_hidden, "comma-separated hidden sizes");
    grad_cmd->add_option("--tolerance", tolerance, "max relative error");
    grad_cmd->add_option("--seed", common.seed, "root RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = load_config(config_path);
        if (cfg.contains("seed") && !app.count("--seed")) common.seed = cfg["seed"];

        if (*ingest_cmd) return cmd_ingest(in_file, stride, common, scene);
        if (*augment_cmd)
            return cmd_augment(windows_path, fractions, cts_m, lambda, q_scale, train_ratio,
                               common);
        if (*train_cmd)
            return cmd_train(data_dir, members, epochs, batch, dropout_p, beta, hidden_csv,
                             common);
        if (*eval_cmd)
            return cmd_evaluate(model_dir, data_dir, sigma, use_mc, dropout_b, common, dump_limit);
        if (*ood_cmd) return cmd_ood_predict(model_dir, in_file, stride, fraction, common);
        if (*grad_cmd) return cmd_grad_check(gc_hidden, tolerance, common);
    } catch (const IngestError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalOverflow& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const NumericalFailure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitOk;
}
