#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echonav/rng.hpp"
#include "echonav/soundbank_types.hpp"

namespace echonav {

enum class SoundKind { SineTone, Chirp, Square, AmTone, NoiseBurst, HarmonicStack };

const char* sound_kind_name(SoundKind k);
SoundKind sound_kind_from_name(const std::string& name);

// All frequencies must stay inside the audible band used by the bank,
// [80, 7000] Hz, which is Nyquist-safe at 16 kHz.
constexpr double kBandLowHz = 80.0;
constexpr double kBandHighHz = 7000.0;

struct SoundClass {
    int64_t id = 0;
    SoundKind kind = SoundKind::SineTone;
    double freq_hz = 440.0;     // base / carrier / chirp start
    double freq2_hz = 0.0;      // chirp end (unused otherwise)
    double mod_rate_hz = 0.0;   // AM modulation rate
    double duty = 0.5;          // NoiseBurst on-fraction per burst period
    uint64_t seed = 0;          // NoiseBurst sample seed

    void validate() const;
};

struct SoundSplit {
    std::vector<int64_t> heard;
    std::vector<int64_t> unheard;

    void validate() const;  // disjoint, heard non-empty, unheard non-empty
};

struct SoundBank {
    int sample_rate = 16000;
    std::vector<SoundClass> classes;
    SoundSplit split;

    const SoundClass& by_id(int64_t id) const;
    void validate() const;
};

// Deterministic 1-second waveform, RMS-normalized to 0.1.
SourceWaveform generate_sound(const SoundClass& cls, int sample_rate);

// Uniform over heard \ {current}; never returns `current`.
int64_t sample_alternative_class(int64_t current, const std::vector<int64_t>& heard, Rng& rng);

// Default desk-scale bank: 8 heard classes spanning five generator kinds
// (broadband coverage) and 4 unheard classes, three with novel parameters
// of heard kinds plus one held-out kind (AmTone).
SoundBank default_bank(int sample_rate = 16000);

SoundBank load_bank(const std::string& path);
void save_bank(const SoundBank& bank, const std::string& path);

// In-place RMS normalization to kSourceRms. Throws on silent input.
void normalize_rms(std::vector<float>& samples);

} // namespace echonav
