#include "uqtraj/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace uqtraj {

namespace {

using nlohmann::json;

std::vector<TrackState> to_states(const std::vector<RawAnnotation>& rows, double dt) {
    const std::size_t n = rows.size();
    std::vector<TrackState> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].x = rows[i].x;
        out[i].y = rows[i].y;
        out[i].t = static_cast<int>(i);
    }
    // central differences, one-sided at the ends
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i > 0 ? i - 1 : i;
        std::size_t hi = i + 1 < n ? i + 1 : i;
        double span = static_cast<double>(hi - lo) * dt;
        if (span > 0.0) {
            out[i].u = (out[hi].x - out[lo].x) / span;
            out[i].v = (out[hi].y - out[lo].y) / span;
        }
    }
    return out;
}

}  // namespace

std::vector<Trajectory> ingest(const std::string& path, int frame_stride) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path);
    return ingest_stream(in, frame_stride, path);
}

std::vector<Trajectory> ingest_stream(std::istream& in, int frame_stride,
                                      const std::string& label) {
    if (frame_stride < 1) throw InvalidArgument("ingest: frame_stride must be >= 1");

    std::map<int, std::vector<RawAnnotation>> by_ped;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        double frame, ped, x, y;
        if (!(row >> frame >> ped >> x >> y))
            throw IngestError(label + ": unparseable row", lineno);
        if (!std::isfinite(x) || !std::isfinite(y))
            throw IngestError(label + ": non-finite coordinate", lineno);
        RawAnnotation a{static_cast<long>(frame), static_cast<int>(ped), x, y};
        auto& rows = by_ped[a.ped_id];
        if (!rows.empty() && a.frame <= rows.back().frame)
            throw IngestError(label + ": non-monotonic frames for pedestrian " +
                                  std::to_string(a.ped_id),
                              lineno);
        rows.push_back(a);
    }

    std::vector<Trajectory> out;
    out.reserve(by_ped.size());
    for (auto& [ped_id, rows] : by_ped) {
        std::vector<RawAnnotation> kept;
        const long first = rows.front().frame;
        for (const auto& r : rows)
            if ((r.frame - first) % frame_stride == 0) kept.push_back(r);
        Trajectory traj;
        traj.ped_id = ped_id;
        traj.states = to_states(kept, kStepSeconds);
        out.push_back(std::move(traj));
    }
    return out;
}

std::vector<SequencePair> sliding_window(const Trajectory& traj, int past, int future,
                                         int stride) {
    if (past < 1 || future < 1 || stride < 1)
        throw InvalidArgument("sliding_window: bad window parameters");
    const int window = past + future;
    const int n = static_cast<int>(traj.size());
    std::vector<SequencePair> out;
    for (int start = 0; start + window <= n; start += stride) {
        SequencePair pair;
        pair.ped_id = traj.ped_id;
        pair.past.assign(traj.states.begin() + start, traj.states.begin() + start + past);
        pair.future.assign(traj.states.begin() + start + past,
                           traj.states.begin() + start + window);
        pair.origin = pair.past.front().pos();
        out.push_back(std::move(pair));
    }
    return out;
}

namespace {

// shared sensing simulation: noisy measurements over the whole window, then a
// KF pass with R and p0 scaled to the track's extent
KfPosterior filtered_posterior(const SequencePair& pair, double noise_fraction,
                               const KfConfig& kf_cfg, std::uint64_t pair_seed) {
    std::vector<Eigen::Vector2d> truth;
    truth.reserve(pair.past.size() + pair.future.size());
    for (const auto& s : pair.past) truth.push_back(s.pos());
    for (const auto& s : pair.future) truth.push_back(s.pos());

    const double sigma = noise_sigma_for(truth, noise_fraction);
    KfConfig cfg = kf_cfg;
    cfg.r = Cov2{sigma * sigma, 0.0, sigma * sigma};
    Eigen::Matrix4d p0 = Eigen::Matrix4d::Zero();
    p0.diagonal() << cfg.r.sxx, cfg.r.syy, 1.0, 1.0;
    cfg.p0 = Cov4::fromMatrix(p0);

    Rng noise_rng(pair_seed);
    std::vector<Eigen::Vector2d> meas;
    meas.reserve(truth.size());
    for (const auto& p : truth)
        meas.push_back(p + sigma * Eigen::Vector2d(gauss(noise_rng), gauss(noise_rng)));

    return filter_trajectory(meas, cfg);
}

}  // namespace

std::vector<SequencePair> attach_kf(const std::vector<SequencePair>& pairs, double noise_fraction,
                                    const KfConfig& kf_cfg, std::uint64_t rng_seed) {
    std::vector<SequencePair> out;
    out.reserve(pairs.size());
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const SequencePair& pair = pairs[pi];
        const int npast = static_cast<int>(pair.past.size());
        const int ntot = npast + static_cast<int>(pair.future.size());
        KfPosterior post =
            filtered_posterior(pair, noise_fraction, kf_cfg, substream_seed(rng_seed, pi));

        SequencePair aug = pair;  // futures keep the raw truth
        aug.fraction = noise_fraction;
        aug.variant = 0;
        for (int k = 0; k < npast; ++k)
            aug.past[static_cast<std::size_t>(k)] = post.states[static_cast<std::size_t>(k)];
        aug.past_cov.clear();
        aug.future_cov.clear();
        for (int k = 0; k < ntot; ++k) {
            Cov2 c = post.covs[static_cast<std::size_t>(k)].posBlock();
            (k < npast ? aug.past_cov : aug.future_cov).push_back(c);
        }
        aug.origin = aug.past.front().pos();
        out.push_back(std::move(aug));
    }
    return out;
}

std::vector<SequencePair> augment_with_kf(const std::vector<SequencePair>& pairs,
                                          double noise_fraction, const KfConfig& kf_cfg,
                                          const CtsConfig& cts_cfg, std::uint64_t rng_seed) {
    std::vector<SequencePair> out;
    out.reserve(pairs.size() * static_cast<std::size_t>(cts_cfg.m));

    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const SequencePair& pair = pairs[pi];
        const int npast = static_cast<int>(pair.past.size());
        const int ntot = npast + static_cast<int>(pair.future.size());

        KfPosterior post =
            filtered_posterior(pair, noise_fraction, kf_cfg, substream_seed(rng_seed, pi));

        CtsConfig cts = cts_cfg;
        cts.dt = kf_cfg.dt;
        cts.rng_seed = substream_seed(rng_seed, pi ^ 0x517cc1b727220a95ULL);
        std::vector<Trajectory> samples = sample_trajectories(post, cts);

        for (int vi = 0; vi < cts.m; ++vi) {
            const Trajectory& s = samples[static_cast<std::size_t>(vi)];
            SequencePair aug = pair;  // futures keep the raw truth
            aug.fraction = noise_fraction;
            aug.variant = vi;
            for (int k = 0; k < npast; ++k) aug.past[static_cast<std::size_t>(k)] = s.states[static_cast<std::size_t>(k)];
            aug.past_cov.clear();
            aug.future_cov.clear();
            for (int k = 0; k < ntot; ++k) {
                Cov2 c = post.covs[static_cast<std::size_t>(k)].posBlock();
                (k < npast ? aug.past_cov : aug.future_cov).push_back(c);
            }
            aug.origin = aug.past.front().pos();
            out.push_back(std::move(aug));
        }
    }
    return out;
}

std::vector<SequencePair> domain_randomize(const std::vector<SequencePair>& pairs,
                                           const std::vector<double>& fractions,
                                           const KfConfig& kf_cfg, const CtsConfig& cts_cfg,
                                           std::uint64_t rng_seed) {
    std::vector<SequencePair> out;
    std::uint64_t fi = 0;
    for (double f : fractions) {
        auto part = augment_with_kf(pairs, f, kf_cfg, cts_cfg, substream_seed(rng_seed, fi++));
        out.insert(out.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    }
    return out;
}

DatasetSplit train_test_split(std::vector<SequencePair> pairs, const std::string& name,
                              std::uint64_t seed, double train_ratio) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(pairs.size())));
    DatasetSplit split;
    split.name = name;
    split.split_seed = seed;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_train ? split.train : split.test).push_back(std::move(pairs[order[i]]));
    return split;
}

namespace {

json cov_to_json(const Cov2& c) { return json::array({c.sxx, c.sxy, c.syy}); }
Cov2 cov_from_json(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

json state_to_json(const TrackState& s) { return json::array({s.x, s.y, s.u, s.v}); }

TrackState state_from_json(const json& j, int t) {
    return {j.at(0), j.at(1), j.at(2), j.at(3), t};
}

}  // namespace

void write_pairs_jsonl(const std::vector<SequencePair>& pairs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_pairs_jsonl: cannot open " + path);
    for (const auto& p : pairs) {
        json j;
        j["ped_id"] = p.ped_id;
        j["fraction"] = p.fraction;
        j["variant"] = p.variant;
        j["origin"] = json::array({p.origin.x(), p.origin.y()});
        j["past"] = json::array();
        for (const auto& s : p.past) j["past"].push_back(state_to_json(s));
        j["future"] = json::array();
        for (const auto& s : p.future) j["future"].push_back(state_to_json(s));
        j["past_cov"] = json::array();
        for (const auto& c : p.past_cov) j["past_cov"].push_back(cov_to_json(c));
        j["future_cov"] = json::array();
        for (const auto& c : p.future_cov) j["future_cov"].push_back(cov_to_json(c));
        out << j.dump() << '\n';
    }
}

std::vector<SequencePair> read_pairs_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_pairs_jsonl: cannot open " + path);
    std::vector<SequencePair> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IngestError(path + ": bad JSONL record: " + e.what(), lineno);
        }
        SequencePair p;
        p.ped_id = j.at("ped_id");
        p.fraction = j.at("fraction");
        p.variant = j.value("variant", 0);
        p.origin = Eigen::Vector2d(j.at("origin").at(0).get<double>(),
                                   j.at("origin").at(1).get<double>());
        int t = 0;
        for (const auto& s : j.at("past")) p.past.push_back(state_from_json(s, t++));
        for (const auto& s : j.at("future")) p.future.push_back(state_from_json(s, t++));
        for (const auto& c : j.at("past_cov")) p.past_cov.push_back(cov_from_json(c));
        for (const auto& c : j.at("future_cov")) p.future_cov.push_back(cov_from_json(c));
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace uqtraj
