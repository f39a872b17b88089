#include "echonav/soundbank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace echonav {

using json = nlohmann::json;

const char* sound_kind_name(SoundKind k) {
    switch (k) {
        case SoundKind::SineTone: return "sine";
        case SoundKind::Chirp: return "chirp";
        case SoundKind::Square: return "square";
        case SoundKind::AmTone: return "am";
        case SoundKind::NoiseBurst: return "noise_burst";
        case SoundKind::HarmonicStack: return "harmonic_stack";
    }
    return "?";
}

SoundKind sound_kind_from_name(const std::string& name) {
    if (name == "sine") return SoundKind::SineTone;
    if (name == "chirp") return SoundKind::Chirp;
    if (name == "square") return SoundKind::Square;
    if (name == "am") return SoundKind::AmTone;
    if (name == "noise_burst") return SoundKind::NoiseBurst;
    if (name == "harmonic_stack") return SoundKind::HarmonicStack;
    throw std::runtime_error("unknown sound kind '" + name + "'");
}

namespace {

void check_band(double f, const char* what, int64_t id) {
    if (f < kBandLowHz || f > kBandHighHz)
        throw std::runtime_error("sound class " + std::to_string(id) + ": " + what + " " +
                                 std::to_string(f) + " Hz outside band [80, 7000]");
}

} // namespace

void SoundClass::validate() const {
    switch (kind) {
        case SoundKind::SineTone:
        case SoundKind::Square:
        case SoundKind::HarmonicStack:
            check_band(freq_hz, "base frequency", id);
            break;
        case SoundKind::Chirp:
            check_band(freq_hz, "chirp start frequency", id);
            check_band(freq2_hz, "chirp end frequency", id);
            break;
        case SoundKind::AmTone:
            check_band(freq_hz, "carrier frequency", id);
            if (mod_rate_hz <= 0.0)
                throw std::runtime_error("sound class " + std::to_string(id) +
                                         ": AM mod rate must be positive");
            check_band(freq_hz + mod_rate_hz, "upper sideband", id);
            check_band(freq_hz - mod_rate_hz, "lower sideband", id);
            break;
        case SoundKind::NoiseBurst:
            if (duty <= 0.0 || duty > 1.0)
                throw std::runtime_error("sound class " + std::to_string(id) +
                                         ": burst duty must be in (0, 1]");
            break;
    }
}

void SoundSplit::validate() const {
    if (heard.empty()) throw std::runtime_error("SoundSplit: heard set is empty");
    if (unheard.empty()) throw std::runtime_error("SoundSplit: unheard set is empty");
    std::set<int64_t> h(heard.begin(), heard.end());
    for (int64_t id : unheard)
        if (h.count(id))
            throw std::runtime_error("SoundSplit: class " + std::to_string(id) +
                                     " is in both heard and unheard");
}

const SoundClass& SoundBank::by_id(int64_t id) const {
    for (const auto& c : classes)
        if (c.id == id) return c;
    throw std::runtime_error("SoundBank: unknown class id " + std::to_string(id));
}

void SoundBank::validate() const {
    std::set<int64_t> ids;
    for (const auto& c : classes) {
        c.validate();
        if (!ids.insert(c.id).second)
            throw std::runtime_error("SoundBank: duplicate class id " + std::to_string(c.id));
    }
    split.validate();
    for (int64_t id : split.heard) by_id(id);
    for (int64_t id : split.unheard) by_id(id);
}

int64_t make_composite_class(int64_t parent_a, int64_t parent_b) {
    if (parent_a < 0 || parent_a >= kCompositeClassStride || parent_b < 0 ||
        parent_b >= kCompositeClassStride)
        throw std::runtime_error("make_composite_class: parent ids must be pure bank classes");
    return kCompositeClassBase + parent_a * kCompositeClassStride + parent_b;
}

void normalize_rms(std::vector<float>& samples) {
    double sum2 = 0.0;
    for (float v : samples) sum2 += static_cast<double>(v) * v;
    double rms = std::sqrt(sum2 / static_cast<double>(samples.size()));
    if (rms < 1e-8) throw std::runtime_error("normalize_rms: silent waveform");
    const double scale = kSourceRms / rms;
    for (float& v : samples) v = static_cast<float>(v * scale);
}

SourceWaveform generate_sound(const SoundClass& cls, int sample_rate) {
    cls.validate();
    const int n = sample_rate;  // 1 second
    const double fs = static_cast<double>(sample_rate);
    std::vector<float> s(n, 0.0f);

    switch (cls.kind) {
        case SoundKind::SineTone:
            for (int i = 0; i < n; ++i)
                s[i] = static_cast<float>(std::sin(2.0 * M_PI * cls.freq_hz * i / fs));
            break;
        case SoundKind::Chirp: {
            // Linear sweep freq_hz -> freq2_hz over the second.
            const double k = (cls.freq2_hz - cls.freq_hz);
            for (int i = 0; i < n; ++i) {
                double t = i / fs;
                double phase = 2.0 * M_PI * (cls.freq_hz * t + 0.5 * k * t * t);
                s[i] = static_cast<float>(std::sin(phase));
            }
            break;
        }
        case SoundKind::Square:
            // Band-limited: odd harmonics up to the band edge.
            for (int h = 1; cls.freq_hz * h <= kBandHighHz; h += 2)
                for (int i = 0; i < n; ++i)
                    s[i] += static_cast<float>(std::sin(2.0 * M_PI * cls.freq_hz * h * i / fs) / h);
            break;
        case SoundKind::AmTone:
            for (int i = 0; i < n; ++i) {
                double t = i / fs;
                double env = 1.0 + 0.8 * std::sin(2.0 * M_PI * cls.mod_rate_hz * t);
                s[i] = static_cast<float>(env * std::sin(2.0 * M_PI * cls.freq_hz * t));
            }
            break;
        case SoundKind::NoiseBurst: {
            Rng rng(cls.seed);
            const double burst_hz = 8.0;
            const int period = static_cast<int>(fs / burst_hz);
            const int on_len = std::max(1, static_cast<int>(period * cls.duty));
            for (int i = 0; i < n; ++i) {
                bool on = (i % period) < on_len;
                double v = rng.uniform(-1.0, 1.0);  // draw always, gate after
                if (on) s[i] = static_cast<float>(v);
            }
            break;
        }
        case SoundKind::HarmonicStack:
            for (int h = 1; cls.freq_hz * h <= kBandHighHz; ++h)
                for (int i = 0; i < n; ++i)
                    s[i] += static_cast<float>(std::sin(2.0 * M_PI * cls.freq_hz * h * i / fs) / h);
            break;
    }

    normalize_rms(s);
    return SourceWaveform{std::move(s), sample_rate, cls.id};
}

int64_t sample_alternative_class(int64_t current, const std::vector<int64_t>& heard, Rng& rng) {
    if (heard.size() < 2)
        throw std::runtime_error("sample_alternative_class: need at least 2 heard classes");
    std::vector<int64_t> pool;
    pool.reserve(heard.size());
    for (int64_t id : heard)
        if (id != current) pool.push_back(id);
    return pool[rng.uniform_int(static_cast<int64_t>(pool.size()))];
}

SoundBank default_bank(int sample_rate) {
    SoundBank bank;
    bank.sample_rate = sample_rate;
    auto add = [&](int64_t id, SoundKind kind, double f, double f2, double mod, double duty,
                   uint64_t seed) {
        SoundClass c;
        c.id = id;
        c.kind = kind;
        c.freq_hz = f;
        c.freq2_hz = f2;
        c.mod_rate_hz = mod;
        c.duty = duty;
        c.seed = seed;
        bank.classes.push_back(c);
    };
    // Heard: two sines, two chirps, a square, two harmonic stacks and a
    // noise burst, so the union of heard spectra covers the band.
    add(0, SoundKind::SineTone, 440.0, 0, 0, 0, 0);
    add(1, SoundKind::SineTone, 1870.0, 0, 0, 0, 0);
    add(2, SoundKind::Chirp, 500.0, 2400.0, 0, 0, 0);
    add(3, SoundKind::Chirp, 5200.0, 3000.0, 0, 0, 0);
    add(4, SoundKind::Square, 220.0, 0, 0, 0, 0);
    add(5, SoundKind::HarmonicStack, 330.0, 0, 0, 0, 0);
    add(6, SoundKind::NoiseBurst, 0, 0, 0, 0.6, 41);
    add(7, SoundKind::HarmonicStack, 520.0, 0, 0, 0, 0);
    // Unheard: novel parameters of heard kinds plus one held-out kind.
    add(8, SoundKind::SineTone, 990.0, 0, 0, 0, 0);
    add(9, SoundKind::Chirp, 1200.0, 3600.0, 0, 0, 0);
    add(10, SoundKind::Square, 330.0, 0, 0, 0, 0);
    add(11, SoundKind::AmTone, 1560.0, 0, 6.0, 0, 0);

    bank.split.heard = {0, 1, 2, 3, 4, 5, 6, 7};
    bank.split.unheard = {8, 9, 10, 11};
    bank.validate();
    return bank;
}

SoundBank load_bank(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_bank: cannot open '" + path + "'");
    json j;
    in >> j;

    SoundBank bank;
    bank.sample_rate = j.value("sample_rate", 16000);
    for (const auto& jc : j.at("classes")) {
        SoundClass c;
        c.id = jc.at("id").get<int64_t>();
        c.kind = sound_kind_from_name(jc.at("kind").get<std::string>());
        c.freq_hz = jc.value("freq_hz", 0.0);
        c.freq2_hz = jc.value("freq2_hz", 0.0);
        c.mod_rate_hz = jc.value("mod_rate_hz", 0.0);
        c.duty = jc.value("duty", 0.5);
        c.seed = jc.value("seed", 0ULL);
        bank.classes.push_back(c);
    }
    bank.split.heard = j.at("split").at("heard").get<std::vector<int64_t>>();
    bank.split.unheard = j.at("split").at("unheard").get<std::vector<int64_t>>();
    bank.validate();
    return bank;
}

void save_bank(const SoundBank& bank, const std::string& path) {
    json j;
    j["sample_rate"] = bank.sample_rate;
    j["classes"] = json::array();
    for (const auto& c : bank.classes) {
        json jc;
        jc["id"] = c.id;
        jc["kind"] = sound_kind_name(c.kind);
        jc["freq_hz"] = c.freq_hz;
        jc["freq2_hz"] = c.freq2_hz;
        jc["mod_rate_hz"] = c.mod_rate_hz;
        jc["duty"] = c.duty;
        jc["seed"] = c.seed;
        j["classes"].push_back(jc);
    }
    j["split"]["heard"] = bank.split.heard;
    j["split"]["unheard"] = bank.split.unheard;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_bank: cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace echonav
