#pragma once

#include <string>
#include <vector>

#include "echonav/soundbank_types.hpp"

namespace echonav {

// Reads a RIFF/WAVE file (PCM 16-bit mono only), resamples to `target_fs`
// by linear interpolation, trims or loops to 1 second and RMS-normalizes.
// Errors name the offending header field.
SourceWaveform load_wav(const std::string& path, int target_fs = 16000);

// Writes float samples (clamped to [-1, 1]) as PCM16 mono.
void save_wav(const std::string& path, const std::vector<float>& samples, int sample_rate);

} // namespace echonav
