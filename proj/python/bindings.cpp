#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uqtraj/data.hpp"
#include "uqtraj/kalman.hpp"
#include "uqtraj/metrics.hpp"
#include "uqtraj/minkowski.hpp"
#include "uqtraj/net.hpp"
#include "uqtraj/pipeline.hpp"
#include "uqtraj/rng.hpp"
#include "uqtraj/sampling.hpp"
#include "uqtraj/types.hpp"
#include "uqtraj/uq.hpp"

namespace py = pybind11;
using namespace uqtraj;

PYBIND11_MODULE(_uqtraj, m) {
    m.doc() = "Kalman-filtered pedestrian trajectory forecasting with calibrated uncertainty";

    m.attr("STEP_SECONDS") = kStepSeconds;
    m.attr("PAST_STEPS") = kPastSteps;
    m.attr("FUTURE_STEPS") = kFutureSteps;

    // ----------------------------------------------------------- core types
    py::register_exception<Error>(m, "UqtrajError");

    py::class_<TrackState>(m, "TrackState")
        .def(py::init<>())
        .def(py::init([](double x, double y, double u, double v, int t) {
                 return TrackState{x, y, u, v, t};
             }),
             py::arg("x"), py::arg("y"), py::arg("u") = 0.0, py::arg("v") = 0.0,
             py::arg("t") = 0)
        .def_readwrite("x", &TrackState::x)
        .def_readwrite("y", &TrackState::y)
        .def_readwrite("u", &TrackState::u)
        .def_readwrite("v", &TrackState::v)
        .def_readwrite("t", &TrackState::t)
        .def("vec", &TrackState::vec)
        .def("pos", &TrackState::pos)
        .def("__repr__", [](const TrackState& s) {
            return "TrackState(x=" + std::to_string(s.x) + ", y=" + std::to_string(s.y) +
                   ", u=" + std::to_string(s.u) + ", v=" + std::to_string(s.v) +
                   ", t=" + std::to_string(s.t) + ")";
        });

    py::class_<Cov2>(m, "Cov2")
        .def(py::init<>())
        .def(py::init<double, double, double>(), py::arg("sxx"), py::arg("sxy"), py::arg("syy"))
        .def_static("from_matrix", &Cov2::fromMatrix)
        .def_readwrite("sxx", &Cov2::sxx)
        .def_readwrite("sxy", &Cov2::sxy)
        .def_readwrite("syy", &Cov2::syy)
        .def("mat", &Cov2::mat)
        .def("trace", &Cov2::trace)
        .def("det", &Cov2::det)
        .def("__add__", &Cov2::operator+)
        .def("__mul__", &Cov2::operator*);

    py::class_<Cov4>(m, "Cov4")
        .def(py::init<>())
        .def_static("from_matrix", &Cov4::fromMatrix)
        .def_readwrite("m", &Cov4::m)
        .def("pos_block", &Cov4::posBlock)
        .def("trace", &Cov4::trace);

    py::class_<Ellipse>(m, "Ellipse")
        .def(py::init<>())
        .def(py::init([](const Eigen::Vector2d& c, const Cov2& cov, double scale) {
                 return Ellipse{c, cov, scale};
             }),
             py::arg("center"), py::arg("cov"), py::arg("scale") = 1.0)
        .def_readwrite("center", &Ellipse::center)
        .def_readwrite("cov", &Ellipse::cov)
        .def_readwrite("scale", &Ellipse::scale);

    py::class_<EllipseAxes>(m, "EllipseAxes")
        .def_readonly("major", &EllipseAxes::major)
        .def_readonly("minor", &EllipseAxes::minor)
        .def_readonly("angle", &EllipseAxes::angle);

    m.def("ellipse_axes", &ellipse_axes);
    m.def("ellipse_contains", &contains, py::arg("ellipse"), py::arg("point"));
    m.def("cov_from_axes", &cov_from_axes, py::arg("major"), py::arg("minor"), py::arg("angle"),
          py::arg("scale") = 1.0);

    py::class_<Trajectory>(m, "Trajectory")
        .def(py::init<>())
        .def_readwrite("states", &Trajectory::states)
        .def_readwrite("ped_id", &Trajectory::ped_id)
        .def("__len__", &Trajectory::size);

    // ----------------------------------------------------------- kalman
    py::class_<KfConfig>(m, "KfConfig")
        .def(py::init(&KfConfig::defaults))
        .def_readwrite("dt", &KfConfig::dt)
        .def_readwrite("q_scale", &KfConfig::q_scale)
        .def_readwrite("r", &KfConfig::r)
        .def_readwrite("p0", &KfConfig::p0)
        .def("transition", &KfConfig::transition)
        .def("process_noise", &KfConfig::processNoise);

    py::class_<KfPosterior>(m, "KfPosterior")
        .def_readonly("states", &KfPosterior::states)
        .def_readonly("covs", &KfPosterior::covs)
        .def_readonly("innovations", &KfPosterior::innovations)
        .def("__len__", &KfPosterior::size);

    m.def("filter_trajectory", &filter_trajectory, py::arg("measurements"), py::arg("cfg"));
    m.def("noise_sigma_for", &noise_sigma_for, py::arg("truth"), py::arg("fraction"));

    // ----------------------------------------------------------- sampling
    py::class_<CtsConfig>(m, "CtsConfig")
        .def(py::init<>())
        .def_readwrite("m", &CtsConfig::m)
        .def_readwrite("lambda_", &CtsConfig::lambda)
        .def_readwrite("rng_seed", &CtsConfig::rng_seed)
        .def_readwrite("dt", &CtsConfig::dt);

    m.def("sample_trajectories", &sample_trajectories, py::arg("posterior"), py::arg("cfg"));

    // ----------------------------------------------------------- data
    py::class_<SequencePair>(m, "SequencePair")
        .def(py::init<>())
        .def_readwrite("past", &SequencePair::past)
        .def_readwrite("future", &SequencePair::future)
        .def_readwrite("past_cov", &SequencePair::past_cov)
        .def_readwrite("future_cov", &SequencePair::future_cov)
        .def_readwrite("ped_id", &SequencePair::ped_id)
        .def_readwrite("fraction", &SequencePair::fraction)
        .def_readwrite("variant", &SequencePair::variant)
        .def_readwrite("origin", &SequencePair::origin)
        .def("augmented", &SequencePair::augmented);

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def_readonly("train", &DatasetSplit::train)
        .def_readonly("test", &DatasetSplit::test)
        .def_readonly("name", &DatasetSplit::name)
        .def_readonly("split_seed", &DatasetSplit::split_seed);

    m.def("ingest", &ingest, py::arg("path"), py::arg("frame_stride"));
    m.def("sliding_window", &sliding_window, py::arg("trajectory"), py::arg("past") = kPastSteps,
          py::arg("future") = kFutureSteps, py::arg("stride") = 1);
    m.def("augment_with_kf", &augment_with_kf, py::arg("pairs"), py::arg("noise_fraction"),
          py::arg("kf_cfg"), py::arg("cts_cfg"), py::arg("rng_seed"));
    m.def("attach_kf", &attach_kf, py::arg("pairs"), py::arg("noise_fraction"), py::arg("kf_cfg"),
          py::arg("rng_seed"));
    m.def("domain_randomize", &domain_randomize, py::arg("pairs"), py::arg("fractions"),
          py::arg("kf_cfg"), py::arg("cts_cfg"), py::arg("rng_seed"));
    m.def("train_test_split", &train_test_split, py::arg("pairs"), py::arg("name"),
          py::arg("seed"), py::arg("train_ratio") = 0.789);
    m.def("write_pairs_jsonl", &write_pairs_jsonl, py::arg("pairs"), py::arg("path"));
    m.def("read_pairs_jsonl", &read_pairs_jsonl, py::arg("path"));

    // ----------------------------------------------------------- network
    py::class_<NetConfig>(m, "NetConfig")
        .def(py::init<>())
        .def_readwrite("past_steps", &NetConfig::past_steps)
        .def_readwrite("future_steps", &NetConfig::future_steps)
        .def_readwrite("hidden", &NetConfig::hidden)
        .def_readwrite("beta", &NetConfig::beta)
        .def_readwrite("loss_weight_mse", &NetConfig::loss_weight_mse)
        .def_readwrite("dropout_p", &NetConfig::dropout_p)
        .def("input_dim", &NetConfig::input_dim)
        .def("output_dim", &NetConfig::output_dim);

    py::class_<NetParams>(m, "NetParams")
        .def_static("init", &NetParams::init, py::arg("cfg"), py::arg("seed"))
        .def_readonly("init_seed", &NetParams::init_seed)
        .def("count", &NetParams::count);

    py::class_<AdamConfig>(m, "AdamConfig")
        .def(py::init<>())
        .def_readwrite("lr", &AdamConfig::lr)
        .def_readwrite("beta1", &AdamConfig::beta1)
        .def_readwrite("beta2", &AdamConfig::beta2)
        .def_readwrite("eps", &AdamConfig::eps);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("adam", &TrainConfig::adam);

    py::class_<LossTerms>(m, "LossTerms")
        .def_readonly("nll", &LossTerms::nll)
        .def_readonly("cov_mse", &LossTerms::cov_mse)
        .def_readonly("lambda_", &LossTerms::lambda)
        .def("total", &LossTerms::total);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("params", &TrainResult::params)
        .def_readonly("history", &TrainResult::history)
        .def_readonly("aborted", &TrainResult::aborted);

    m.def("train", &train, py::arg("pairs"), py::arg("cfg"), py::arg("train_cfg"),
          py::arg("init_seed"), py::call_guard<py::gil_scoped_release>());

    py::class_<GradCheckReport>(m, "GradCheckReport")
        .def_readonly("max_rel_error", &GradCheckReport::max_rel_error)
        .def_readonly("worst_param", &GradCheckReport::worst_param)
        .def_readonly("n_params", &GradCheckReport::n_params);

    m.def(
        "grad_check",
        [](const NetConfig& cfg, const std::vector<SequencePair>& pairs, std::uint64_t seed,
           double tolerance, double h) {
            Batch batch = make_batch(pairs, cfg);
            NetParams params = NetParams::init(cfg, seed);
            return grad_check(params, cfg, batch, tolerance, h);
        },
        py::arg("cfg"), py::arg("pairs"), py::arg("seed"), py::arg("tolerance") = 1e-4,
        py::arg("h") = 1e-5);

    m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("cfg"),
          py::arg("path"));
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

    py::class_<StepOutput>(m, "StepOutput")
        .def_readonly("mean", &StepOutput::mean)
        .def_readonly("sens", &StepOutput::sens)
        .def_readonly("pred", &StepOutput::pred);

    py::class_<ForecastOutput>(m, "ForecastOutput")
        .def_readonly("steps", &ForecastOutput::steps)
        .def_readonly("origin", &ForecastOutput::origin);

    m.def(
        "forward",
        [](const NetParams& p, const NetConfig& cfg, const SequencePair& pair) {
            return forward(p, cfg, pair);
        },
        py::arg("params"), py::arg("cfg"), py::arg("pair"));

    // ----------------------------------------------------------- uncertainty
    py::class_<Ensemble>(m, "Ensemble")
        .def(py::init<>())
        .def_readwrite("cfg", &Ensemble::cfg)
        .def_readwrite("members", &Ensemble::members)
        .def("__len__", &Ensemble::size);

    py::class_<SummaryStep>(m, "SummaryStep")
        .def_readonly("mean", &SummaryStep::mean)
        .def_readonly("total", &SummaryStep::total)
        .def_readonly("aleatoric", &SummaryStep::aleatoric)
        .def_readonly("epistemic", &SummaryStep::epistemic)
        .def_readonly("sens", &SummaryStep::sens);

    py::class_<PredictiveSummary>(m, "PredictiveSummary")
        .def_readonly("steps", &PredictiveSummary::steps)
        .def_readonly("origin", &PredictiveSummary::origin)
        .def("forecast", &PredictiveSummary::forecast);

    m.def("ensemble_predict", &ensemble_predict, py::arg("ensemble"), py::arg("input"));
    m.def("mc_dropout_predict", &mc_dropout_predict, py::arg("params"), py::arg("cfg"),
          py::arg("input"), py::arg("b_samples"), py::arg("seed"));
    m.def("save_ensemble", &save_ensemble, py::arg("ensemble"), py::arg("dir"));
    m.def("load_ensemble", &load_ensemble, py::arg("dir"));

    // ----------------------------------------------------------- minkowski
    py::class_<TotalUncertainty>(m, "TotalUncertainty")
        .def_readonly("center", &TotalUncertainty::center)
        .def_readonly("e1", &TotalUncertainty::e1)
        .def_readonly("e2", &TotalUncertainty::e2)
        .def_readonly("outer", &TotalUncertainty::outer);

    m.def("minkowski_total", &minkowski_total, py::arg("e1"), py::arg("e2"), py::arg("center"));
    m.def("in_minkowski_sum", &in_minkowski_sum, py::arg("e1"), py::arg("e2"), py::arg("center"),
          py::arg("p"));

    // ----------------------------------------------------------- metrics
    py::class_<StepForecast>(m, "StepForecast")
        .def(py::init<>())
        .def(py::init([](const Eigen::Vector2d& mean, const Cov2& sens, const Cov2& pred) {
                 return StepForecast{mean, sens, pred};
             }),
             py::arg("mean"), py::arg("sens"), py::arg("pred"))
        .def_readwrite("mean", &StepForecast::mean)
        .def_readwrite("sens", &StepForecast::sens)
        .def_readwrite("pred", &StepForecast::pred);

    py::class_<MetricReport>(m, "MetricReport")
        .def_readonly("ade", &MetricReport::ade)
        .def_readonly("fde", &MetricReport::fde)
        .def_readonly("picp", &MetricReport::picp)
        .def_readonly("mpiw_x", &MetricReport::mpiw_x)
        .def_readonly("mpiw_y", &MetricReport::mpiw_y)
        .def_readonly("mpiw", &MetricReport::mpiw)
        .def_readonly("n_sequences", &MetricReport::n_sequences)
        .def_readonly("n_degenerate", &MetricReport::n_degenerate)
        .def_readonly("sigma_scale", &MetricReport::sigma_scale)
        .def("json", &MetricReport::json);

    auto mode_from = [](const std::string& name) { return uncertainty_mode_from(name); };
    m.def("ade", &ade, py::arg("preds"), py::arg("truths"));
    m.def("fde", &fde, py::arg("preds"), py::arg("truths"));
    m.def(
        "picp",
        [mode_from](const std::vector<Forecast>& p, const std::vector<Truth>& t, double s,
                    const std::string& mode) { return picp(p, t, s, mode_from(mode)); },
        py::arg("preds"), py::arg("truths"), py::arg("sigma_scale") = 1.0,
        py::arg("mode") = "prediction");
    m.def(
        "mpiw",
        [mode_from](const std::vector<Forecast>& p, double s, const std::string& mode) {
            return mpiw(p, s, mode_from(mode));
        },
        py::arg("preds"), py::arg("sigma_scale") = 1.0, py::arg("mode") = "prediction");
    m.def(
        "compute_metrics",
        [mode_from](const std::vector<Forecast>& p, const std::vector<Truth>& t, double s,
                    const std::string& mode) { return compute_metrics(p, t, s, mode_from(mode)); },
        py::arg("preds"), py::arg("truths"), py::arg("sigma_scale") = 1.0,
        py::arg("mode") = "prediction");

    // ----------------------------------------------------------- pipeline
    m.def("truth_futures", &truth_futures, py::arg("pairs"));
    m.def("filter_variant", &filter_variant, py::arg("pairs"), py::arg("variant"));
    m.def("max_variant", &max_variant, py::arg("pairs"));
    m.def(
        "predict_all",
        [](const Ensemble& ens, const std::vector<SequencePair>& pairs) {
            return predict_all(ens, pairs);
        },
        py::arg("ensemble"), py::arg("pairs"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "predict_all_dropout",
        [](const NetParams& p, const NetConfig& cfg, const std::vector<SequencePair>& pairs,
           int b, std::uint64_t seed) { return predict_all_dropout(p, cfg, pairs, b, seed); },
        py::arg("params"), py::arg("cfg"), py::arg("pairs"), py::arg("b_samples"),
        py::arg("seed"), py::call_guard<py::gil_scoped_release>());
    m.def("file_hash", &file_hash, py::arg("path"));
    m.def("substream_seed", &substream_seed, py::arg("root"), py::arg("index"));
}
