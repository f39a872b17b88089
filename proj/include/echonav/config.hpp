#pragma once

#include <cstdint>
#include <string>

#include "echonav/acoustics.hpp"
#include "echonav/dsp.hpp"

namespace echonav {

// InfoNCE loss configuration. The full-scale batch is 256 pairs; the
// desk-scale experiment config lowers pair_count to 32.
struct LossConfig {
    double temperature = 0.07;
    double similarity_weight = 0.1;
    int64_t pair_count = 256;

    void validate() const;
};

struct SceneGenConfig {
    int train_count = 12;
    int test_count = 4;
    int min_size = 9;
    int max_size = 15;
    double cell_size = 2.0;
    double obstacle_fraction_max = 0.25;
    double reverb_min = 0.3;
    double reverb_max = 0.7;
};

struct ModelConfig {
    int64_t hidden = 64;
    int64_t embed = 32;
};

struct TrainConfig {
    int64_t updates = 3000;
    int64_t bc_batch = 32;
    int64_t collect_every = 250;
    int64_t episodes_per_round = 24;
    double epsilon = 0.2;  // exploration noise on the collection teacher
    int max_steps = 100;
    int64_t log_every = 50;
};

struct EvalConfig {
    int64_t episodes_per_split = 120;
};

struct AblationFlags {
    bool contrast_on = true;
    bool reverse_on = true;
    bool mixup_on = true;
    bool distinct_positions = true;
};

struct MatrixConfig {
    int seeds = 3;
    bool ablations = false;
};

struct ExperimentConfig {
    uint64_t master_seed = 7;
    int sample_rate = 16000;
    std::string bank_manifest;  // empty selects the built-in default bank
    SceneGenConfig scenes;
    StftConfig stft{512, 512, 512};
    AcousticConfig acoustics;
    AugConfig augment;  // reverse_prob 0.5, mixup_alpha 1
    LossConfig loss;    // desk default pair_count 32
    ModelConfig model;
    double lr = 1e-3;
    TrainConfig train;
    EvalConfig eval;
    AblationFlags flags;
    MatrixConfig matrix;

    void validate() const;
    int64_t input_dim() const;  // 2 * bins * frames at the 1 s render length
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

} // namespace echonav
