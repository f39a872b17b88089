#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace echonav {

struct EvalRecord {
    bool success = false;
    double geodesic_length = 0.0;  // shortest path, meters
    double path_length = 0.0;      // distance actually walked, meters
    int oracle_actions = 0;        // teacher action count incl. Stop
    int agent_actions = 0;         // executed action count incl. Stop
    bool scene_unseen = false;
    bool sound_unheard = false;
};

// SR/SPL/SNA as percentages. SPL = mean(S_i * l_i / max(p_i, l_i)),
// SNA = mean(S_i * n*_i / max(n_i, n*_i)); both therefore never exceed SR.
struct MetricsSummary {
    std::string scene_split;  // "seen" | "unseen"
    std::string sound_split;  // "heard" | "unheard"
    int64_t episodes = 0;
    double sr = 0.0;
    double spl = 0.0;
    double sna = 0.0;
    uint64_t seed = 0;
};

MetricsSummary summarize(const std::vector<EvalRecord>& records, const std::string& scene_split,
                         const std::string& sound_split, uint64_t seed);

std::string metrics_to_json(const MetricsSummary& m);

} // namespace echonav
