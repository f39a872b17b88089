#include "echonav/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "echonav/rng.hpp"

namespace echonav {

void AcousticConfig::validate() const {
    if (speed_of_sound <= 0 || head_radius <= 0 || min_distance <= 0 || tail_gap_meters <= 0)
        throw std::runtime_error("AcousticConfig: all lengths/speeds must be positive");
    if (shadow_min_gain <= 0.0 || shadow_min_gain > 1.0)
        throw std::runtime_error("AcousticConfig: shadow_min_gain must be in (0, 1]");
    if (tail_impulses < 0)
        throw std::runtime_error("AcousticConfig: tail_impulses must be >= 0");
}

void Rir::validate() const {
    if (left.size() != right.size())
        throw std::runtime_error("Rir: ear lengths differ");
    if (left.empty())
        throw std::runtime_error("Rir: empty impulse response");
    for (size_t i = 0; i < left.size(); ++i) {
        if (!std::isfinite(left[i]) || !std::isfinite(right[i]))
            throw std::runtime_error("Rir: non-finite tap");
        if (std::abs(left[i]) > 1.0f || std::abs(right[i]) > 1.0f)
            throw std::runtime_error("Rir: peak gain exceeds 1");
    }
}

double direction_of_arrival(const GridScene& scene, const AgentPose& pose) {
    if (!scene.walkable(pose.cell))
        throw std::runtime_error("direction_of_arrival: pose not walkable");
    if (pose.cell == scene.source_cell) return 0.0;
    GeodesicResult geo = geodesic(scene, pose.cell, scene.source_cell);
    int diff = (static_cast<int>(pose.heading) - static_cast<int>(*geo.first_step) + 4) % 4;
    // diff counts 90-degree steps from the source direction to the heading,
    // measured clockwise; positive angles mean the source is to the left.
    static const double angles[4] = {0.0, 90.0, 180.0, -90.0};
    return angles[diff];
}

Rir compute_rir(const GridScene& scene, const AgentPose& pose, const AcousticConfig& cfg,
                int sample_rate) {
    cfg.validate();
    if (!scene.walkable(pose.cell))
        throw std::runtime_error("compute_rir: pose not walkable");

    GeodesicResult geo = geodesic(scene, pose.cell, scene.source_cell);
    const double d = geo.distance;
    const double theta_deg = direction_of_arrival(scene, pose);
    const double theta = theta_deg * M_PI / 180.0;
    const double fs = static_cast<double>(sample_rate);

    const int n0 = static_cast<int>(std::lround(d / cfg.speed_of_sound * fs));
    const double g = std::min(1.0, 1.0 / std::max(d, cfg.min_distance));
    const int itd = static_cast<int>(
        std::lround(cfg.head_radius / cfg.speed_of_sound * std::abs(std::sin(theta)) * fs));
    const double shadow = cfg.shadow_min_gain + (1.0 - cfg.shadow_min_gain) * (1.0 + std::cos(theta)) / 2.0;

    // Tail jitter is seeded by (scene id, hop count, |theta|): deterministic
    // in (scene, source, pose) yet invariant under left-right mirroring, so
    // the ear-swap identity holds exactly.
    uint64_t seed = hash_str(scene.id);
    seed = hash_combine(seed, static_cast<uint64_t>(geo.hops));
    seed = hash_combine(seed, static_cast<uint64_t>(std::llround(std::abs(theta_deg))));
    Rng tail_rng(seed);

    std::vector<int> tail_delays;
    std::vector<double> tail_gains;
    int delay = 0;
    double amp = g;
    for (int k = 1; k <= cfg.tail_impulses; ++k) {
        double extra_m = cfg.tail_gap_meters * (0.6 + 0.8 * tail_rng.uniform01());
        delay += std::max(1, static_cast<int>(std::lround(extra_m / cfg.speed_of_sound * fs)));
        amp *= scene.reverb_coeff;
        if (amp < 1e-9) break;
        tail_delays.push_back(n0 + delay);
        tail_gains.push_back(amp);
    }

    int length = n0 + itd + 1;
    if (!tail_delays.empty()) length = std::max(length, tail_delays.back() + 1);

    Rir rir;
    rir.sample_rate = sample_rate;
    rir.left.assign(length, 0.0f);
    rir.right.assign(length, 0.0f);

    // theta = 0: both ears equally near. theta = 180: both equally far, so
    // the shadow applies to both (this keeps the mirror swap exact and gives
    // a distinct rear signature). Otherwise the ear away from the source is
    // delayed by the ITD and shadowed.
    if (theta_deg == 0.0) {
        rir.left[n0] += static_cast<float>(g);
        rir.right[n0] += static_cast<float>(g);
    } else if (theta_deg == 180.0) {
        rir.left[n0] += static_cast<float>(g * shadow);
        rir.right[n0] += static_cast<float>(g * shadow);
    } else {
        const bool left_near = theta_deg > 0.0;
        auto& near_ear = left_near ? rir.left : rir.right;
        auto& far_ear = left_near ? rir.right : rir.left;
        near_ear[n0] += static_cast<float>(g);
        far_ear[n0 + itd] += static_cast<float>(g * shadow);
    }
    for (size_t k = 0; k < tail_delays.size(); ++k) {
        rir.left[tail_delays[k]] += static_cast<float>(tail_gains[k]);
        rir.right[tail_delays[k]] += static_cast<float>(tail_gains[k]);
    }
    rir.validate();
    return rir;
}

namespace {

std::vector<float> convolve_to_length(const std::vector<float>& rir_taps,
                                      const std::vector<float>& src, size_t out_len) {
    std::vector<double> acc(out_len, 0.0);
    for (size_t k = 0; k < rir_taps.size(); ++k) {
        const double tap = rir_taps[k];
        if (tap == 0.0) continue;
        const size_t n_end = std::min(out_len, src.size() + k);
        for (size_t n = k; n < n_end; ++n) acc[n] += tap * static_cast<double>(src[n - k]);
    }
    std::vector<float> out(out_len);
    for (size_t n = 0; n < out_len; ++n) out[n] = static_cast<float>(acc[n]);
    return out;
}

} // namespace

BinauralWaveform render_binaural(const Rir& rir, const SourceWaveform& source) {
    if (rir.sample_rate != source.sample_rate)
        throw std::runtime_error("render_binaural: sample-rate mismatch");
    const size_t L = static_cast<size_t>(source.sample_rate);
    BinauralWaveform out;
    out.sample_rate = source.sample_rate;
    out.left = convolve_to_length(rir.left, source.samples, L);
    out.right = convolve_to_length(rir.right, source.samples, L);
    return out;
}

void dump_rir(const Rir& rir, const std::string& path) {
    nlohmann::json j;
    j["sample_rate"] = rir.sample_rate;
    j["length"] = rir.left.size();
    j["left"] = rir.left;
    j["right"] = rir.right;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_rir: cannot write '" + path + "'");
    out << j.dump() << "\n";
}

} // namespace echonav
