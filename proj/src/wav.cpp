#include "echonav/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "echonav/soundbank.hpp"

namespace echonav {

namespace {

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

std::vector<float> resample_linear(const std::vector<float>& in, int fs_in, int fs_out) {
    if (fs_in == fs_out) return in;
    const size_t n_out = static_cast<size_t>(
        std::llround(static_cast<double>(in.size()) * fs_out / fs_in));
    std::vector<float> out(n_out);
    const double step = static_cast<double>(fs_in) / fs_out;
    for (size_t i = 0; i < n_out; ++i) {
        double pos = i * step;
        size_t i0 = static_cast<size_t>(pos);
        if (i0 >= in.size() - 1) {
            out[i] = in.back();
            continue;
        }
        double frac = pos - static_cast<double>(i0);
        out[i] = static_cast<float>((1.0 - frac) * in[i0] + frac * in[i0 + 1]);
    }
    return out;
}

} // namespace

SourceWaveform load_wav(const std::string& path, int target_fs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_wav: cannot open '" + path + "'");
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());

    if (buf.size() < 12) throw std::runtime_error("load_wav: truncated header (RIFF chunk)");
    if (std::memcmp(buf.data(), "RIFF", 4) != 0)
        throw std::runtime_error("load_wav: missing RIFF id");
    if (std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("load_wav: missing WAVE form type");

    bool have_fmt = false;
    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t fs = 0;
    std::vector<float> samples;
    bool have_data = false;

    size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const char* cid = reinterpret_cast<const char*>(buf.data() + pos);
        uint32_t clen = read_u32(buf.data() + pos + 4);
        pos += 8;
        if (pos + clen > buf.size())
            throw std::runtime_error("load_wav: truncated chunk '" + std::string(cid, 4) + "'");
        if (std::memcmp(cid, "fmt ", 4) == 0) {
            if (clen < 16) throw std::runtime_error("load_wav: fmt chunk too short");
            format = read_u16(buf.data() + pos);
            channels = read_u16(buf.data() + pos + 2);
            fs = read_u32(buf.data() + pos + 4);
            bits = read_u16(buf.data() + pos + 14);
            have_fmt = true;
        } else if (std::memcmp(cid, "data", 4) == 0) {
            if (!have_fmt) throw std::runtime_error("load_wav: data chunk before fmt chunk");
            if (format != 1)
                throw std::runtime_error("load_wav: non-PCM format code " + std::to_string(format));
            if (channels != 1) throw std::runtime_error("load_wav: multichannel unsupported");
            if (bits != 16)
                throw std::runtime_error("load_wav: bits_per_sample " + std::to_string(bits) +
                                         " unsupported (PCM16 only)");
            const size_t n = clen / 2;
            samples.resize(n);
            for (size_t i = 0; i < n; ++i) {
                int16_t v = static_cast<int16_t>(read_u16(buf.data() + pos + 2 * i));
                samples[i] = static_cast<float>(v) / 32767.0f;
            }
            have_data = true;
        }
        pos += clen + (clen & 1);  // chunks are word-aligned
    }

    if (!have_fmt) throw std::runtime_error("load_wav: missing fmt chunk");
    if (!have_data) throw std::runtime_error("load_wav: missing data chunk");
    if (samples.empty()) throw std::runtime_error("load_wav: empty data chunk");
    if (fs == 0) throw std::runtime_error("load_wav: sample_rate is zero");

    samples = resample_linear(samples, static_cast<int>(fs), target_fs);

    // Loop or trim to exactly 1 second.
    const size_t L = static_cast<size_t>(target_fs);
    if (samples.size() < L) {
        std::vector<float> looped;
        looped.reserve(L);
        while (looped.size() < L) {
            size_t take = std::min(samples.size(), L - looped.size());
            looped.insert(looped.end(), samples.begin(), samples.begin() + take);
        }
        samples = std::move(looped);
    } else if (samples.size() > L) {
        samples.resize(L);
    }

    normalize_rms(samples);
    return SourceWaveform{std::move(samples), target_fs, -1};
}

void save_wav(const std::string& path, const std::vector<float>& samples, int sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_wav: cannot write '" + path + "'");

    const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
    const uint32_t riff_len = 36 + data_len;
    auto w16 = [&](uint16_t v) { out.put(static_cast<char>(v & 0xff)).put(static_cast<char>(v >> 8)); };
    auto w32 = [&](uint32_t v) {
        for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    };

    out.write("RIFF", 4);
    w32(riff_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    w32(16);
    w16(1);  // PCM
    w16(1);  // mono
    w32(static_cast<uint32_t>(sample_rate));
    w32(static_cast<uint32_t>(sample_rate) * 2);
    w16(2);   // block align
    w16(16);  // bits per sample
    out.write("data", 4);
    w32(data_len);
    for (float v : samples) {
        float c = std::clamp(v, -1.0f, 1.0f);
        w16(static_cast<uint16_t>(static_cast<int16_t>(std::lround(c * 32767.0f))));
    }
}

} // namespace echonav
