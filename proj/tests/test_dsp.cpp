#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "echonav/dsp.hpp"
#include "echonav/soundbank.hpp"

using namespace echonav;

namespace {

BinauralWaveform random_wave(Rng& rng, int n = 16000) {
    BinauralWaveform w;
    w.sample_rate = n;
    w.left.resize(n);
    w.right.resize(n);
    for (int i = 0; i < n; ++i) {
        w.left[i] = static_cast<float>(rng.uniform(-0.3, 0.3));
        w.right[i] = static_cast<float>(rng.uniform(-0.3, 0.3));
    }
    return w;
}

// Direct O(N^2) DFT magnitude of one Hann-windowed frame.
std::vector<double> naive_frame_magnitudes(const std::vector<float>& x, int offset,
                                           const StftConfig& cfg) {
    std::vector<double> frame(cfg.fft_len, 0.0);
    for (int i = 0; i < cfg.window_len; ++i)
        frame[i] = static_cast<double>(x[offset + i]) *
                   (0.5 - 0.5 * std::cos(2.0 * M_PI * i / cfg.window_len));
    std::vector<double> mags(cfg.bins());
    for (int k = 0; k < cfg.bins(); ++k) {
        std::complex<double> acc = 0.0;
        for (int n = 0; n < cfg.fft_len; ++n) {
            double ang = -2.0 * M_PI * k * n / cfg.fft_len;
            acc += frame[n] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        mags[k] = std::abs(acc);
    }
    return mags;
}

} // namespace

TEST_CASE("stft: all-zero wave maps to exactly zero") {
    BinauralWaveform w;
    w.left.assign(16000, 0.0f);
    w.right.assign(16000, 0.0f);
    StftConfig cfg;
    Spectrogram s = stft_log_magnitude(w, cfg);
    for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("stft: default config shape is (2, 257, 97)") {
    Rng rng(3);
    BinauralWaveform w = random_wave(rng);
    StftConfig cfg;  // 512 / 160 / 512
    Spectrogram s = stft_log_magnitude(w, cfg);
    CHECK(s.channels == 2);
    CHECK(s.bins == 257);
    CHECK(s.frames == 97);
    CHECK(s.size() == 2u * 257u * 97u);
}

TEST_CASE("stft magnitudes match the naive DFT oracle") {
    Rng rng(11);
    BinauralWaveform w = random_wave(rng);
    StftConfig cfg;
    Spectrogram s = stft_log_magnitude(w, cfg);
    for (int t : {0, 13, 96}) {
        auto oracle = naive_frame_magnitudes(w.left, t * cfg.hop, cfg);
        for (int b = 0; b < cfg.bins(); ++b) {
            double got = std::expm1(s.at(0, b, t));
            CHECK(got == doctest::Approx(oracle[b]).epsilon(1e-4));
        }
    }
}

TEST_CASE("stft shape is a pure function of length and config") {
    Rng rng(7);
    StftConfig cfg;
    cfg.hop = 320;
    for (int trial = 0; trial < 4; ++trial) {
        BinauralWaveform w = random_wave(rng);
        Spectrogram s = stft_log_magnitude(w, cfg);
        CHECK(s.frames == 1 + (16000 - 512) / 320);
        CHECK(s.bins == 257);
    }
}

TEST_CASE("pre-log magnitude is 1-homogeneous") {
    Rng rng(13);
    BinauralWaveform w = random_wave(rng);
    BinauralWaveform w2 = w;
    const float c = 3.7f;
    for (auto& v : w2.left) v *= c;
    for (auto& v : w2.right) v *= c;
    StftConfig cfg;
    cfg.hop = 512;
    Spectrogram a = stft_log_magnitude(w, cfg);
    Spectrogram b = stft_log_magnitude(w2, cfg);
    for (size_t i = 0; i < a.values.size(); i += 101) {
        double ma = std::expm1(a.values[i]);
        double mb = std::expm1(b.values[i]);
        CHECK(mb == doctest::Approx(c * ma).epsilon(1e-6));
    }
}

TEST_CASE("stft config validation") {
    StftConfig bad_hop{512, 600, 512};
    CHECK_THROWS(bad_hop.validate());
    StftConfig bad_fft{512, 160, 300};
    CHECK_THROWS(bad_fft.validate());
    StftConfig not_pow2{500, 160, 1000};
    CHECK_THROWS(not_pow2.validate());

    BinauralWaveform tiny;
    tiny.left.assign(100, 0.1f);
    tiny.right.assign(100, 0.1f);
    CHECK_THROWS(stft_log_magnitude(tiny, StftConfig{}));
}

TEST_CASE("reverse_augment: p=0 identity, p=1 reversal, involution") {
    Rng rng(1);
    SourceWaveform x{{1.0f, 2.0f, 3.0f}, 3, 5};
    SourceWaveform same = reverse_augment(x, 0.0, rng);
    CHECK(same.samples == x.samples);
    SourceWaveform rev = reverse_augment(x, 1.0, rng);
    CHECK(rev.samples == std::vector<float>{3.0f, 2.0f, 1.0f});
    CHECK(rev.class_id == 5);
    SourceWaveform back = reverse_augment(rev, 1.0, rng);
    CHECK(back.samples == x.samples);
}

TEST_CASE("reverse_augment fraction within 4 sigma of p") {
    Rng rng(99);
    SourceWaveform x{{1.0f, 2.0f, 3.0f, 4.0f}, 4, 0};
    const int n = 10000;
    int reversed = 0;
    for (int i = 0; i < n; ++i)
        if (reverse_augment(x, 0.5, rng).samples != x.samples) ++reversed;
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(reversed - n * 0.5) <= 4.0 * sigma);
}

TEST_CASE("sample_lambda: alpha=1 is Uniform(0,1)") {
    Rng rng(2025);
    const int n = 100000;
    std::vector<double> xs(n);
    double mean = 0.0;
    for (auto& x : xs) {
        x = sample_lambda(1.0, rng);
        mean += x;
    }
    mean /= n;
    CHECK(std::abs(mean - 0.5) <= 0.005);

    // Kolmogorov-Smirnov statistic against Uniform(0,1).
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        double f = xs[i];
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
    }
    CHECK(ks < 0.01);
}

TEST_CASE("sample_lambda: symmetry and Beta variance at alpha=0.2") {
    Rng rng(4);
    for (double alpha : {0.2, 0.7, 2.0, 5.0}) {
        const int n = 100000;
        double mean = 0.0;
        std::vector<double> xs(n);
        for (auto& x : xs) {
            x = sample_lambda(alpha, rng);
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
            mean += x;
        }
        mean /= n;
        const double true_var = 1.0 / (4.0 * (2.0 * alpha + 1.0));
        CHECK(std::abs(mean - 0.5) <= 4.0 * std::sqrt(true_var / n));
        if (alpha == 0.2) {
            double var = 0.0;
            for (double x : xs) var += (x - mean) * (x - mean);
            var /= n;
            CHECK(var == doctest::Approx(1.0 / (4.0 * 1.4)).epsilon(0.06));
            CHECK(std::abs(var - 0.179) <= 0.01);
        }
    }
    CHECK_THROWS(sample_lambda(0.0, rng));
    CHECK_THROWS(sample_lambda(-1.0, rng));
}

TEST_CASE("mixup endpoints and fixed point") {
    SoundBank bank = default_bank();
    SourceWaveform x1 = generate_sound(bank.by_id(0), 16000);
    SourceWaveform x2 = generate_sound(bank.by_id(4), 16000);

    SourceWaveform m1 = mixup(x1, x2, 1.0);
    for (size_t i = 0; i < m1.samples.size(); i += 53)
        CHECK(m1.samples[i] == doctest::Approx(x1.samples[i]).epsilon(1e-6));

    SourceWaveform m0 = mixup(x1, x2, 0.0);
    for (size_t i = 0; i < m0.samples.size(); i += 53)
        CHECK(m0.samples[i] == doctest::Approx(x2.samples[i]).epsilon(1e-6));

    SourceWaveform fix = mixup(x1, x1, 0.37);
    for (size_t i = 0; i < fix.samples.size(); i += 53)
        CHECK(fix.samples[i] == doctest::Approx(x1.samples[i]).epsilon(1e-6));

    CHECK(is_composite_class(m1.class_id));
    CHECK(m1.class_id == make_composite_class(0, 4));
}

TEST_CASE("mixup degenerate cancellation is an error") {
    SoundBank bank = default_bank();
    SourceWaveform x1 = generate_sound(bank.by_id(0), 16000);
    SourceWaveform x2 = x1;
    x2.class_id = 1;
    for (auto& v : x2.samples) v = -v;
    CHECK_THROWS_WITH_AS(mixup(x1, x2, 0.5), "degenerate mix", std::runtime_error);

    SourceWaveform shorter = x1;
    shorter.samples.resize(100);
    CHECK_THROWS(mixup(x1, shorter, 0.5));
}

TEST_CASE("mixup re-normalizes RMS") {
    SoundBank bank = default_bank();
    SourceWaveform x1 = generate_sound(bank.by_id(2), 16000);
    SourceWaveform x2 = generate_sound(bank.by_id(6), 16000);
    SourceWaveform m = mixup(x1, x2, 0.5);
    double acc = 0.0;
    for (float v : m.samples) acc += static_cast<double>(v) * v;
    CHECK(std::sqrt(acc / m.samples.size()) == doctest::Approx(0.1).epsilon(1e-5));
}
