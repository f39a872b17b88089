#include "echonav/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace echonav {

MetricsSummary summarize(const std::vector<EvalRecord>& records, const std::string& scene_split,
                         const std::string& sound_split, uint64_t seed) {
    if (records.empty()) throw std::runtime_error("summarize: empty split");

    double sr = 0.0, spl = 0.0, sna = 0.0;
    for (const auto& r : records) {
        if (r.path_length < 0.0) throw std::runtime_error("summarize: negative path length");
        if (r.success && r.path_length < r.geodesic_length - 1e-9)
            throw std::runtime_error("summarize: successful path shorter than geodesic");
        const double s = r.success ? 1.0 : 0.0;
        sr += s;
        spl += s * r.geodesic_length / std::max(r.path_length, r.geodesic_length);
        sna += s * static_cast<double>(r.oracle_actions) /
               std::max<double>(r.agent_actions, r.oracle_actions);
    }
    const double n = static_cast<double>(records.size());
    MetricsSummary m;
    m.scene_split = scene_split;
    m.sound_split = sound_split;
    m.episodes = static_cast<int64_t>(records.size());
    m.sr = 100.0 * sr / n;
    m.spl = 100.0 * spl / n;
    m.sna = 100.0 * sna / n;
    m.seed = seed;
    if (m.spl > m.sr + 1e-9 || m.sna > m.sr + 1e-9)
        throw std::runtime_error("summarize: SPL/SNA exceeded SR");
    return m;
}

std::string metrics_to_json(const MetricsSummary& m) {
    nlohmann::json j;
    j["scene_split"] = m.scene_split;
    j["sound_split"] = m.sound_split;
    j["episodes"] = m.episodes;
    j["sr"] = m.sr;
    j["spl"] = m.spl;
    j["sna"] = m.sna;
    j["seed"] = m.seed;
    return j.dump();
}

} // namespace echonav
