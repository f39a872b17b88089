#include "echonav/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "echonav/soundbank.hpp"

namespace echonav {

void StftConfig::validate() const {
    if (window_len <= 0 || hop <= 0 || fft_len <= 0)
        throw std::runtime_error("StftConfig: sizes must be positive");
    if (hop > window_len) throw std::runtime_error("StftConfig: hop must be <= window_len");
    if (fft_len < window_len) throw std::runtime_error("StftConfig: fft_len must be >= window_len");
    if ((fft_len & (fft_len - 1)) != 0)
        throw std::runtime_error("StftConfig: fft_len must be a power of two");
}

void AugConfig::validate() const {
    if (reverse_prob < 0.0 || reverse_prob > 1.0)
        throw std::runtime_error("AugConfig: reverse_prob must be in [0, 1]");
    if (mixup_alpha <= 0.0) throw std::runtime_error("AugConfig: mixup_alpha must be positive");
}

void fft_radix2(std::vector<double>& re, std::vector<double>& im) {
    const size_t n = re.size();
    if (n == 0 || (n & (n - 1)) != 0 || im.size() != n)
        throw std::runtime_error("fft_radix2: size must be a power of two");

    // bit reversal
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const double wr = std::cos(ang), wi = std::sin(ang);
        for (size_t i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (size_t k = 0; k < len / 2; ++k) {
                const size_t a = i + k, b = i + k + len / 2;
                const double tr = re[b] * cr - im[b] * ci;
                const double ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                const double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

namespace {

void stft_channel(const std::vector<float>& x, const StftConfig& cfg,
                  const std::vector<double>& window, Spectrogram& out, int channel) {
    const int T = cfg.frames(static_cast<int>(x.size()));
    const int F = cfg.bins();
    std::vector<double> re(cfg.fft_len), im(cfg.fft_len);
    for (int t = 0; t < T; ++t) {
        const int off = t * cfg.hop;
        std::fill(re.begin(), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        for (int i = 0; i < cfg.window_len; ++i)
            re[i] = static_cast<double>(x[off + i]) * window[i];
        fft_radix2(re, im);
        for (int b = 0; b < F; ++b)
            out.at(channel, b, t) = std::log1p(std::hypot(re[b], im[b]));
    }
}

} // namespace

Spectrogram stft_log_magnitude(const BinauralWaveform& wave, const StftConfig& cfg) {
    cfg.validate();
    if (wave.left.size() != wave.right.size())
        throw std::runtime_error("stft_log_magnitude: channel lengths differ");
    if (static_cast<int>(wave.left.size()) < cfg.window_len)
        throw std::runtime_error("stft_log_magnitude: waveform shorter than window");

    std::vector<double> window(cfg.window_len);
    for (int i = 0; i < cfg.window_len; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / cfg.window_len);

    Spectrogram spec;
    spec.channels = 2;
    spec.bins = cfg.bins();
    spec.frames = cfg.frames(static_cast<int>(wave.left.size()));
    spec.values.assign(static_cast<size_t>(2) * spec.bins * spec.frames, 0.0);
    stft_channel(wave.left, cfg, window, spec, 0);
    stft_channel(wave.right, cfg, window, spec, 1);
    return spec;
}

SourceWaveform reverse_augment(const SourceWaveform& x, double p, Rng& rng) {
    if (rng.uniform01() >= p) return x;
    SourceWaveform out = x;
    std::reverse(out.samples.begin(), out.samples.end());
    return out;
}

double sample_lambda(double alpha, Rng& rng) {
    if (alpha <= 0.0) throw std::runtime_error("sample_lambda: alpha must be positive");
    if (alpha == 1.0) return rng.uniform01();
    const double g1 = rng.gamma(alpha);
    const double g2 = rng.gamma(alpha);
    return g1 / (g1 + g2);
}

SourceWaveform mixup(const SourceWaveform& x1, const SourceWaveform& x2, double lambda) {
    if (x1.samples.size() != x2.samples.size())
        throw std::runtime_error("mixup: length mismatch");
    if (x1.sample_rate != x2.sample_rate)
        throw std::runtime_error("mixup: sample-rate mismatch");
    if (lambda < 0.0 || lambda > 1.0)
        throw std::runtime_error("mixup: lambda must be in [0, 1]");

    SourceWaveform out;
    out.sample_rate = x1.sample_rate;
    out.samples.resize(x1.samples.size());
    double sum2 = 0.0;
    for (size_t i = 0; i < out.samples.size(); ++i) {
        double v = lambda * static_cast<double>(x1.samples[i]) +
                   (1.0 - lambda) * static_cast<double>(x2.samples[i]);
        out.samples[i] = static_cast<float>(v);
        sum2 += v * v;
    }
    if (std::sqrt(sum2 / static_cast<double>(out.samples.size())) < 1e-8)
        throw std::runtime_error("degenerate mix");
    normalize_rms(out.samples);
    out.class_id = make_composite_class(x1.class_id, x2.class_id);
    return out;
}

} // namespace echonav
