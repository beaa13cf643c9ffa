#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "uqtraj/kalman.hpp"
#include "uqtraj/sampling.hpp"
#include "uqtraj/types.hpp"

namespace uqtraj {

struct RawAnnotation {
    long frame = 0;
    int ped_id = 0;
    double x = 0.0;
    double y = 0.0;
};

// 8 observed + 12 future steps, with per-step position covariances once
// KF augmentation has run. Coordinates are stored raw; `origin` is the first
// observed position and is subtracted when building network features.
struct SequencePair {
    std::vector<TrackState> past;    // 8
    std::vector<TrackState> future;  // 12
    std::vector<Cov2> past_cov;      // 8 (empty before augmentation)
    std::vector<Cov2> future_cov;    // 12
    int ped_id = -1;
    double fraction = 0.0;  // measurement-noise fraction used during augmentation
    int variant = 0;        // CTS bootstrap index
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();

    bool augmented() const { return past_cov.size() == past.size(); }
};

struct DatasetSplit {
    std::vector<SequencePair> train;
    std::vector<SequencePair> test;
    std::string name;
    std::uint64_t split_seed = 0;
};

// TSV rows: frame<TAB>ped_id<TAB>x<TAB>y. '#' comments and blank lines skipped.
std::vector<Trajectory> ingest(const std::string& path, int frame_stride);
std::vector<Trajectory> ingest_stream(std::istream& in, int frame_stride,
                                      const std::string& label = "<stream>");

// len - 20 + 1 windows at stride 1; short trajectories yield an empty list.
std::vector<SequencePair> sliding_window(const Trajectory& traj, int past = kPastSteps,
                                         int future = kFutureSteps, int stride = 1);

// Noisy measurements -> KF over all 20 steps -> posterior covariances attached,
// m CTS-sampled past variants emitted per input pair. Futures keep the raw truth.
std::vector<SequencePair> augment_with_kf(const std::vector<SequencePair>& pairs,
                                          double noise_fraction, const KfConfig& kf_cfg,
                                          const CtsConfig& cts_cfg, std::uint64_t rng_seed);

// Same sensing simulation, but the past keeps the KF posterior mean trail
// instead of a CTS sample: the forecaster's operating point at evaluation time.
std::vector<SequencePair> attach_kf(const std::vector<SequencePair>& pairs, double noise_fraction,
                                    const KfConfig& kf_cfg, std::uint64_t rng_seed);

// Union of augment_with_kf across noise fractions, tagged with their fraction.
std::vector<SequencePair> domain_randomize(const std::vector<SequencePair>& pairs,
                                           const std::vector<double>& fractions,
                                           const KfConfig& kf_cfg, const CtsConfig& cts_cfg,
                                           std::uint64_t rng_seed);

// Deterministic ~79/21 shuffle-split by sequence. Split before augmentation so
// CTS variants of one window never straddle the split. The default ratio maps
// 1597 sequences onto 1260 train / 337 test.
DatasetSplit train_test_split(std::vector<SequencePair> pairs, const std::string& name,
                              std::uint64_t seed, double train_ratio = 0.789);

// JSONL serialization, one record per line.
void write_pairs_jsonl(const std::vector<SequencePair>& pairs, const std::string& path);
std::vector<SequencePair> read_pairs_jsonl(const std::string& path);

}  // namespace uqtraj
