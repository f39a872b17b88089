#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echonav/grid.hpp"
#include "echonav/soundbank_types.hpp"

namespace echonav {

// Parameters of the synthetic binaural room model. Geodesic distance (not
// Euclidean) drives delay and attenuation so sound bends around walls and
// the direction of arrival stays aligned with the optimal first action.
struct AcousticConfig {
    double speed_of_sound = 340.0;  // m/s
    double head_radius = 0.0875;    // m
    double min_distance = 0.5;      // m, gain clamp against the 1/d pole
    double shadow_min_gain = 0.4;   // far-ear gain floor
    int tail_impulses = 24;
    double tail_gap_meters = 1.0;   // mean extra path length per tail impulse

    void validate() const;
};

// Per-ear impulse responses. Equal lengths, finite taps, peak |gain| <= 1.
struct Rir {
    std::vector<float> left;
    std::vector<float> right;
    int sample_rate = 16000;

    void validate() const;
    bool operator==(const Rir&) const = default;
};

// Rendered 2-channel audio, always exactly 1 second long.
struct BinauralWaveform {
    std::vector<float> left;
    std::vector<float> right;
    int sample_rate = 16000;
};

// Angle from the agent heading to the geodesic first-step direction toward
// the source, in degrees within (-180, 180]. Positive = source to the left.
// Zero when the agent stands on the source cell.
double direction_of_arrival(const GridScene& scene, const AgentPose& pose);

// Deterministic binaural RIR for (scene, pose): direct path with distance
// delay and 1/d gain, interaural delay and cosine-lobe head shadow on the
// far ear, and a hash-seeded reverberant tail shared by both ears so that
// mirrored scenes swap channels exactly.
Rir compute_rir(const GridScene& scene, const AgentPose& pose, const AcousticConfig& cfg,
                int sample_rate = 16000);

// Per-ear linear convolution, truncated/zero-padded to 1 second.
BinauralWaveform render_binaural(const Rir& rir, const SourceWaveform& source);

// Debug export: JSON with sample_rate, length, left[], right[].
void dump_rir(const Rir& rir, const std::string& path);

} // namespace echonav
