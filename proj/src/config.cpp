#include "echonav/config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace echonav {

using json = nlohmann::json;

void LossConfig::validate() const {
    if (temperature <= 0.0) throw std::runtime_error("LossConfig: temperature must be positive");
    if (similarity_weight < 0.0)
        throw std::runtime_error("LossConfig: similarity_weight must be >= 0");
    if (pair_count < 1) throw std::runtime_error("LossConfig: pair_count must be >= 1");
}

void ExperimentConfig::validate() const {
    stft.validate();
    acoustics.validate();
    augment.validate();
    loss.validate();
    if (sample_rate <= 0) throw std::runtime_error("config: sample_rate must be positive");
    if (scenes.train_count < 1 || scenes.test_count < 1)
        throw std::runtime_error("config: scene counts must be >= 1");
    if (scenes.min_size < 3 || scenes.max_size < scenes.min_size)
        throw std::runtime_error("config: scene size range invalid");
    if (scenes.cell_size <= 0.0) throw std::runtime_error("config: cell_size must be positive");
    if (scenes.obstacle_fraction_max < 0.0 || scenes.obstacle_fraction_max > 0.5)
        throw std::runtime_error("config: obstacle_fraction_max out of range");
    if (scenes.reverb_min < 0.0 || scenes.reverb_max >= 1.0 ||
        scenes.reverb_min > scenes.reverb_max)
        throw std::runtime_error("config: reverb range invalid");
    if (model.hidden < 1 || model.embed < 1)
        throw std::runtime_error("config: model dims must be positive");
    if (lr <= 0.0) throw std::runtime_error("config: lr must be positive");
    if (train.updates < 1 || train.bc_batch < 1 || train.collect_every < 1 ||
        train.episodes_per_round < 1 || train.log_every < 1)
        throw std::runtime_error("config: train counts must be >= 1");
    if (train.epsilon < 0.0 || train.epsilon > 1.0)
        throw std::runtime_error("config: epsilon must be in [0, 1]");
    if (train.max_steps < 1) throw std::runtime_error("config: max_steps must be >= 1");
    if (eval.episodes_per_split < 1)
        throw std::runtime_error("config: episodes_per_split must be >= 1");
    if (matrix.seeds < 1) throw std::runtime_error("config: matrix.seeds must be >= 1");
}

int64_t ExperimentConfig::input_dim() const {
    return 2LL * stft.bins() * stft.frames(sample_rate);
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.loss.pair_count = 32;  // desk scale; 256 at full scale
    return cfg;
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load_config: " + std::string(e.what()));
    }

    ExperimentConfig cfg = default_config();
    get_if(j, "master_seed", cfg.master_seed);
    get_if(j, "sample_rate", cfg.sample_rate);
    get_if(j, "bank_manifest", cfg.bank_manifest);
    if (j.contains("scenes")) {
        const auto& s = j["scenes"];
        get_if(s, "train_count", cfg.scenes.train_count);
        get_if(s, "test_count", cfg.scenes.test_count);
        get_if(s, "min_size", cfg.scenes.min_size);
        get_if(s, "max_size", cfg.scenes.max_size);
        get_if(s, "cell_size", cfg.scenes.cell_size);
        get_if(s, "obstacle_fraction_max", cfg.scenes.obstacle_fraction_max);
        get_if(s, "reverb_min", cfg.scenes.reverb_min);
        get_if(s, "reverb_max", cfg.scenes.reverb_max);
    }
    if (j.contains("stft")) {
        const auto& s = j["stft"];
        get_if(s, "window_len", cfg.stft.window_len);
        get_if(s, "hop", cfg.stft.hop);
        get_if(s, "fft_len", cfg.stft.fft_len);
    }
    if (j.contains("acoustics")) {
        const auto& a = j["acoustics"];
        get_if(a, "speed_of_sound", cfg.acoustics.speed_of_sound);
        get_if(a, "head_radius", cfg.acoustics.head_radius);
        get_if(a, "min_distance", cfg.acoustics.min_distance);
        get_if(a, "shadow_min_gain", cfg.acoustics.shadow_min_gain);
        get_if(a, "tail_impulses", cfg.acoustics.tail_impulses);
        get_if(a, "tail_gap_meters", cfg.acoustics.tail_gap_meters);
    }
    if (j.contains("augment")) {
        const auto& a = j["augment"];
        get_if(a, "reverse_prob", cfg.augment.reverse_prob);
        get_if(a, "mixup_alpha", cfg.augment.mixup_alpha);
        get_if(a, "mixup_enabled", cfg.augment.mixup_enabled);
    }
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        get_if(l, "temperature", cfg.loss.temperature);
        get_if(l, "similarity_weight", cfg.loss.similarity_weight);
        get_if(l, "pair_count", cfg.loss.pair_count);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        get_if(m, "hidden", cfg.model.hidden);
        get_if(m, "embed", cfg.model.embed);
    }
    get_if(j, "lr", cfg.lr);
    if (j.contains("train")) {
        const auto& t = j["train"];
        get_if(t, "updates", cfg.train.updates);
        get_if(t, "bc_batch", cfg.train.bc_batch);
        get_if(t, "collect_every", cfg.train.collect_every);
        get_if(t, "episodes_per_round", cfg.train.episodes_per_round);
        get_if(t, "epsilon", cfg.train.epsilon);
        get_if(t, "max_steps", cfg.train.max_steps);
        get_if(t, "log_every", cfg.train.log_every);
    }
    if (j.contains("eval")) get_if(j["eval"], "episodes_per_split", cfg.eval.episodes_per_split);
    if (j.contains("flags")) {
        const auto& f = j["flags"];
        get_if(f, "contrast_on", cfg.flags.contrast_on);
        get_if(f, "reverse_on", cfg.flags.reverse_on);
        get_if(f, "mixup_on", cfg.flags.mixup_on);
        get_if(f, "distinct_positions", cfg.flags.distinct_positions);
    }
    if (j.contains("matrix")) {
        const auto& m = j["matrix"];
        get_if(m, "seeds", cfg.matrix.seeds);
        get_if(m, "ablations", cfg.matrix.ablations);
    }
    cfg.validate();
    return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    json j;
    j["master_seed"] = cfg.master_seed;
    j["sample_rate"] = cfg.sample_rate;
    j["bank_manifest"] = cfg.bank_manifest;
    j["scenes"] = {{"train_count", cfg.scenes.train_count},
                   {"test_count", cfg.scenes.test_count},
                   {"min_size", cfg.scenes.min_size},
                   {"max_size", cfg.scenes.max_size},
                   {"cell_size", cfg.scenes.cell_size},
                   {"obstacle_fraction_max", cfg.scenes.obstacle_fraction_max},
                   {"reverb_min", cfg.scenes.reverb_min},
                   {"reverb_max", cfg.scenes.reverb_max}};
    j["stft"] = {{"window_len", cfg.stft.window_len},
                 {"hop", cfg.stft.hop},
                 {"fft_len", cfg.stft.fft_len}};
    j["acoustics"] = {{"speed_of_sound", cfg.acoustics.speed_of_sound},
                      {"head_radius", cfg.acoustics.head_radius},
                      {"min_distance", cfg.acoustics.min_distance},
                      {"shadow_min_gain", cfg.acoustics.shadow_min_gain},
                      {"tail_impulses", cfg.acoustics.tail_impulses},
                      {"tail_gap_meters", cfg.acoustics.tail_gap_meters}};
    j["augment"] = {{"reverse_prob", cfg.augment.reverse_prob},
                    {"mixup_alpha", cfg.augment.mixup_alpha},
                    {"mixup_enabled", cfg.augment.mixup_enabled}};
    j["loss"] = {{"temperature", cfg.loss.temperature},
                 {"similarity_weight", cfg.loss.similarity_weight},
                 {"pair_count", cfg.loss.pair_count}};
    j["model"] = {{"hidden", cfg.model.hidden}, {"embed", cfg.model.embed}};
    j["lr"] = cfg.lr;
    j["train"] = {{"updates", cfg.train.updates},
                  {"bc_batch", cfg.train.bc_batch},
                  {"collect_every", cfg.train.collect_every},
                  {"episodes_per_round", cfg.train.episodes_per_round},
                  {"epsilon", cfg.train.epsilon},
                  {"max_steps", cfg.train.max_steps},
                  {"log_every", cfg.train.log_every}};
    j["eval"] = {{"episodes_per_split", cfg.eval.episodes_per_split}};
    j["flags"] = {{"contrast_on", cfg.flags.contrast_on},
                  {"reverse_on", cfg.flags.reverse_on},
                  {"mixup_on", cfg.flags.mixup_on},
                  {"distinct_positions", cfg.flags.distinct_positions}};
    j["matrix"] = {{"seeds", cfg.matrix.seeds}, {"ablations", cfg.matrix.ablations}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_config: cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace echonav
