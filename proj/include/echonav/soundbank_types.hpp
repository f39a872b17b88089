#pragma once

#include <cstdint>
#include <vector>

namespace echonav {

// Mono source sound, 1 second long, RMS-normalized to 0.1.
struct SourceWaveform {
    std::vector<float> samples;
    int sample_rate = 16000;
    int64_t class_id = -1;
};

constexpr double kSourceRms = 0.1;

// Mix-up products get a synthetic class id recording both parents, so a
// mixed source never compares equal to any pure class.
constexpr int64_t kCompositeClassBase = 1LL << 24;
constexpr int64_t kCompositeClassStride = 1LL << 12;

inline bool is_composite_class(int64_t id) { return id >= kCompositeClassBase; }

int64_t make_composite_class(int64_t parent_a, int64_t parent_b);

} // namespace echonav
