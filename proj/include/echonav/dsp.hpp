#pragma once

#include <cstdint>
#include <vector>

#include "echonav/acoustics.hpp"
#include "echonav/rng.hpp"
#include "echonav/soundbank_types.hpp"

namespace echonav {

struct StftConfig {
    int window_len = 512;  // Hann
    int hop = 160;
    int fft_len = 512;     // power of two, >= window_len

    int bins() const { return fft_len / 2 + 1; }
    int frames(int wave_len) const { return 1 + (wave_len - window_len) / hop; }
    void validate() const;
    bool operator==(const StftConfig&) const = default;
};

// 2-channel log1p(magnitude) time-frequency grid, layout [channel][bin][frame].
struct Spectrogram {
    int channels = 0;
    int bins = 0;
    int frames = 0;
    std::vector<double> values;

    double& at(int c, int b, int t) {
        return values[(static_cast<size_t>(c) * bins + b) * frames + t];
    }
    double at(int c, int b, int t) const {
        return values[(static_cast<size_t>(c) * bins + b) * frames + t];
    }
    size_t size() const { return values.size(); }
};

struct AugConfig {
    double reverse_prob = 0.5;
    double mixup_alpha = 1.0;
    bool mixup_enabled = true;

    void validate() const;
};

// Hann-windowed frames, real-input DFT magnitude, log1p compression.
// log1p avoids an epsilon hyperparameter and keeps all values >= 0.
Spectrogram stft_log_magnitude(const BinauralWaveform& wave, const StftConfig& cfg);

// With probability p returns the time-reversed waveform (class preserved).
SourceWaveform reverse_augment(const SourceWaveform& x, double p, Rng& rng);

// lambda ~ Beta(alpha, alpha); alpha == 1 uses the uniform shortcut.
double sample_lambda(double alpha, Rng& rng);

// Sample-wise convex combination, re-normalized to the bank RMS. The result
// carries a composite class id recording both parents. Throws
// "degenerate mix" when the combination cancels below RMS 1e-8.
SourceWaveform mixup(const SourceWaveform& x1, const SourceWaveform& x2, double lambda);

// In-place iterative radix-2 FFT (size must be a power of two).
void fft_radix2(std::vector<double>& re, std::vector<double>& im);

} // namespace echonav
