#pragma once

#include <string>
#include <vector>

#include "uqtraj/data.hpp"
#include "uqtraj/metrics.hpp"
#include "uqtraj/uq.hpp"

namespace uqtraj {

std::vector<Truth> truth_futures(const std::vector<SequencePair>& pairs);

// keep one CTS variant per original sequence (evaluation should not weight a
// sequence by its bootstrap count)
std::vector<SequencePair> filter_variant(const std::vector<SequencePair>& pairs, int variant);

// largest CTS variant index present (-1 when pairs is empty)
int max_variant(const std::vector<SequencePair>& pairs);

std::vector<Forecast> predict_all(const Ensemble& ens, const std::vector<SequencePair>& pairs,
                                  std::vector<PredictiveSummary>* summaries = nullptr);

std::vector<Forecast> predict_all_dropout(const NetParams& params, const NetConfig& cfg,
                                          const std::vector<SequencePair>& pairs, int b_samples,
                                          std::uint64_t seed,
                                          std::vector<PredictiveSummary>* summaries = nullptr);

// FNV-1a over the file bytes, for run manifests
std::uint64_t file_hash(const std::string& path);

}  // namespace uqtraj
