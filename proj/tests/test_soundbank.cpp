#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <map>

#include "echonav/soundbank.hpp"
#include "echonav/wav.hpp"

using namespace echonav;

namespace {

double rms(const std::vector<float>& s) {
    double acc = 0.0;
    for (float v : s) acc += static_cast<double>(v) * v;
    return std::sqrt(acc / static_cast<double>(s.size()));
}

// Independent O(N^2)-style oracle for one DFT bin.
double dft_bin_magnitude(const std::vector<float>& x, int n_fft, int bin) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < n_fft; ++n) {
        double ang = -2.0 * M_PI * bin * n / n_fft;
        acc += static_cast<double>(x[n]) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return std::abs(acc);
}

} // namespace

TEST_CASE("generate_sound: length, RMS contract, determinism for all kinds") {
    SoundBank bank = default_bank();
    for (const auto& cls : bank.classes) {
        SourceWaveform a = generate_sound(cls, 16000);
        SourceWaveform b = generate_sound(cls, 16000);
        CHECK(a.samples.size() == 16000);
        CHECK(rms(a.samples) == doctest::Approx(0.1).epsilon(1e-5));
        CHECK(a.samples == b.samples);
        CHECK(a.class_id == cls.id);
    }
}

TEST_CASE("sine spectrum concentrates at the expected DFT bin") {
    SoundClass cls;
    cls.id = 0;
    cls.kind = SoundKind::SineTone;
    cls.freq_hz = 440.0;
    SourceWaveform w = generate_sound(cls, 16000);

    const int n_fft = 2048;
    const int peak_bin = static_cast<int>(std::lround(440.0 * n_fft / 16000.0));
    int best = 0;
    double best_mag = -1.0;
    for (int b = 1; b < n_fft / 2; ++b) {
        double m = dft_bin_magnitude(w.samples, n_fft, b);
        if (m > best_mag) {
            best_mag = m;
            best = b;
        }
    }
    CHECK(best == peak_bin);
}

TEST_CASE("band validation rejects out-of-range parameters") {
    SoundClass low;
    low.id = 100;
    low.kind = SoundKind::SineTone;
    low.freq_hz = 50.0;
    CHECK_THROWS(generate_sound(low, 16000));

    SoundClass high;
    high.id = 101;
    high.kind = SoundKind::Chirp;
    high.freq_hz = 500.0;
    high.freq2_hz = 7500.0;
    CHECK_THROWS(generate_sound(high, 16000));

    SoundClass am;
    am.id = 102;
    am.kind = SoundKind::AmTone;
    am.freq_hz = 6990.0;
    am.mod_rate_hz = 50.0;  // upper sideband leaves the band
    CHECK_THROWS(generate_sound(am, 16000));
}

TEST_CASE("sample_alternative_class: forced, never-current, uniform") {
    Rng rng(5);
    CHECK(sample_alternative_class(7, {7, 3}, rng) == 3);
    CHECK_THROWS(sample_alternative_class(0, {0}, rng));

    std::vector<int64_t> heard{0, 1, 2, 3, 4, 5, 6, 7};
    for (int i = 0; i < 2000; ++i) CHECK(sample_alternative_class(4, heard, rng) != 4);

    // 1e4 draws over 7 alternatives: each within 4 sigma of uniform.
    std::map<int64_t, int> counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) counts[sample_alternative_class(0, heard, rng)]++;
    const double p = 1.0 / 7.0;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(counts.size() == 7);
    CHECK(counts.count(0) == 0);
    for (const auto& [id, c] : counts) CHECK(std::abs(c - n * p) <= 4.0 * sigma);

    // current outside heard: uniform over the whole heard set.
    std::map<int64_t, int> all_counts;
    for (int i = 0; i < n; ++i) all_counts[sample_alternative_class(999, heard, rng)]++;
    CHECK(all_counts.size() == 8);
}

TEST_CASE("split invariants") {
    SoundBank bank = default_bank();
    CHECK_NOTHROW(bank.validate());

    SoundSplit bad;
    bad.heard = {0, 1};
    bad.unheard = {1, 2};
    CHECK_THROWS(bad.validate());

    SoundSplit empty;
    empty.heard = {};
    empty.unheard = {2};
    CHECK_THROWS(empty.validate());
}

TEST_CASE("bank manifest round-trip") {
    SoundBank bank = default_bank();
    auto path = std::filesystem::temp_directory_path() / "echonav_bank_test.json";
    save_bank(bank, path.string());
    SoundBank loaded = load_bank(path.string());
    CHECK(loaded.classes.size() == bank.classes.size());
    CHECK(loaded.split.heard == bank.split.heard);
    CHECK(loaded.split.unheard == bank.split.unheard);
    for (size_t i = 0; i < bank.classes.size(); ++i) {
        SourceWaveform a = generate_sound(bank.classes[i], 16000);
        SourceWaveform b = generate_sound(loaded.classes[i], 16000);
        CHECK(a.samples == b.samples);
    }
    std::filesystem::remove(path);
}

TEST_CASE("wav round-trip stays within the quantization bound") {
    SoundBank bank = default_bank();
    SourceWaveform sine = generate_sound(bank.by_id(0), 16000);
    auto path = std::filesystem::temp_directory_path() / "echonav_wav_test.wav";
    save_wav(path.string(), sine.samples, 16000);
    SourceWaveform loaded = load_wav(path.string());
    REQUIRE(loaded.samples.size() == sine.samples.size());
    CHECK(loaded.sample_rate == 16000);
    for (size_t i = 0; i < sine.samples.size(); i += 13)
        CHECK(std::abs(loaded.samples[i] - sine.samples[i]) <= 1.0 / 32767.0 + 1e-5);
    std::filesystem::remove(path);
}

TEST_CASE("wav loader resamples, loops and trims") {
    // Half a second at 8 kHz loops to one second at 16 kHz.
    std::vector<float> short_wave(4000);
    for (size_t i = 0; i < short_wave.size(); ++i)
        short_wave[i] = 0.25f * std::sin(2.0 * M_PI * 500.0 * i / 8000.0);
    auto path = std::filesystem::temp_directory_path() / "echonav_wav_8k.wav";
    save_wav(path.string(), short_wave, 8000);
    SourceWaveform loaded = load_wav(path.string(), 16000);
    CHECK(loaded.samples.size() == 16000);
    CHECK(rms(loaded.samples) == doctest::Approx(0.1).epsilon(1e-5));
    std::filesystem::remove(path);

    std::vector<float> long_wave(40000, 0.0f);
    for (size_t i = 0; i < long_wave.size(); ++i)
        long_wave[i] = 0.25f * std::sin(2.0 * M_PI * 313.0 * i / 16000.0);
    auto path2 = std::filesystem::temp_directory_path() / "echonav_wav_long.wav";
    save_wav(path2.string(), long_wave, 16000);
    SourceWaveform trimmed = load_wav(path2.string(), 16000);
    CHECK(trimmed.samples.size() == 16000);
    std::filesystem::remove(path2);
}

TEST_CASE("wav loader rejects malformed files with named fields") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path();

    // Stereo file: synthesize a header with 2 channels.
    auto stereo = dir / "echonav_stereo.wav";
    {
        std::vector<float> s(100, 0.1f);
        save_wav(stereo.string(), s, 16000);
        std::fstream f(stereo, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(22);
        char two[2] = {2, 0};
        f.write(two, 2);
    }
    CHECK_THROWS_WITH_AS(load_wav(stereo.string()), "load_wav: multichannel unsupported",
                         std::runtime_error);
    fs::remove(stereo);

    // Non-PCM format code.
    auto nonpcm = dir / "echonav_nonpcm.wav";
    {
        std::vector<float> s(100, 0.1f);
        save_wav(nonpcm.string(), s, 16000);
        std::fstream f(nonpcm, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(20);
        char code[2] = {3, 0};
        f.write(code, 2);
    }
    CHECK_THROWS_WITH_AS(load_wav(nonpcm.string()), "load_wav: non-PCM format code 3",
                         std::runtime_error);
    fs::remove(nonpcm);

    // Truncated header.
    auto trunc = dir / "echonav_trunc.wav";
    {
        std::ofstream f(trunc, std::ios::binary);
        f.write("RIFF\x10\x00\x00\x00WA", 10);
    }
    CHECK_THROWS(load_wav(trunc.string()));
    fs::remove(trunc);

    CHECK_THROWS(load_wav((dir / "echonav_missing.wav").string()));
}

TEST_CASE("composite class ids never collide with pure ids") {
    CHECK(is_composite_class(make_composite_class(0, 0)));
    CHECK(is_composite_class(make_composite_class(7, 3)));
    CHECK(!is_composite_class(11));
    CHECK(make_composite_class(1, 2) != make_composite_class(2, 1));
    CHECK_THROWS(make_composite_class(-1, 2));
}
