#include "uqtraj/pipeline.hpp"

#include <algorithm>
#include <fstream>

namespace uqtraj {

std::vector<Truth> truth_futures(const std::vector<SequencePair>& pairs) {
    std::vector<Truth> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        Truth t;
        t.reserve(p.future.size());
        for (const auto& s : p.future) t.push_back(s.pos());
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<SequencePair> filter_variant(const std::vector<SequencePair>& pairs, int variant) {
    std::vector<SequencePair> out;
    for (const auto& p : pairs)
        if (p.variant == variant) out.push_back(p);
    return out;
}

int max_variant(const std::vector<SequencePair>& pairs) {
    int v = -1;
    for (const auto& p : pairs) v = std::max(v, p.variant);
    return v;
}

std::vector<Forecast> predict_all(const Ensemble& ens, const std::vector<SequencePair>& pairs,
                                  std::vector<PredictiveSummary>* summaries) {
    std::vector<Forecast> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        PredictiveSummary s = ensemble_predict(ens, p);
        out.push_back(s.forecast());
        if (summaries) summaries->push_back(std::move(s));
    }
    return out;
}

std::vector<Forecast> predict_all_dropout(const NetParams& params, const NetConfig& cfg,
                                          const std::vector<SequencePair>& pairs, int b_samples,
                                          std::uint64_t seed,
                                          std::vector<PredictiveSummary>* summaries) {
    std::vector<Forecast> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        PredictiveSummary s =
            mc_dropout_predict(params, cfg, pairs[i], b_samples, substream_seed(seed, i));
        out.push_back(s.forecast());
        if (summaries) summaries->push_back(std::move(s));
    }
    return out;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("file_hash: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

}  // namespace uqtraj
