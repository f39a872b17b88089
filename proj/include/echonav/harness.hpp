#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "echonav/config.hpp"
#include "echonav/contrast.hpp"
#include "echonav/metrics.hpp"
#include "echonav/model.hpp"

namespace echonav {

// Raised when training produces a non-finite loss (CLI exit code 2).
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SceneSet {
    std::vector<GridScene> train;
    std::vector<GridScene> test;
    SceneMap by_id;
};

SceneSet build_scenes(const ExperimentConfig& cfg);
SoundBank build_bank(const ExperimentConfig& cfg);

struct CollectStats {
    int64_t episodes = 0;
    int64_t reversed_episodes = 0;
    int64_t mixed_episodes = 0;
    int64_t steps = 0;
};

// Rolls episodes driven by the shortest-path teacher with epsilon-random
// action noise. The recorded observation is the (augmented) source rendered
// at the visited pose; the label is always the teacher action there.
std::vector<TrajectoryStep> collect_trajectories(const ExperimentConfig& cfg,
                                                 const std::vector<GridScene>& scenes,
                                                 const SoundBank& bank, int64_t episodes,
                                                 Rng& rng, CollectStats* stats = nullptr);

struct TrainMetricsRow {
    int64_t update = 0;
    double bc_loss = 0.0;
    double sim_loss = 0.0;
    double total_loss = 0.0;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<TrainMetricsRow> metrics;
};

// Alternates collection rounds and optimizer updates. Fully deterministic
// for a given config (all randomness derives from master_seed).
TrainResult train(const ExperimentConfig& cfg);

void write_train_metrics(const std::vector<TrainMetricsRow>& rows, const std::string& path);

// Rollouts on one (scene split, sound split) combination. Success requires
// an explicit Stop on the source cell within the episode step budget.
using PolicyFn =
    std::function<Action(const GridScene&, const AgentPose&, const Spectrogram&)>;

MetricsSummary evaluate_with_policy(const PolicyFn& policy, const ExperimentConfig& cfg,
                                    const SceneSet& scenes, const SoundBank& bank,
                                    bool scene_unseen, bool sound_unheard,
                                    std::vector<EvalRecord>* records = nullptr);

// Greedy-argmax policy from the trained model.
MetricsSummary evaluate(const ModelParams& params, const ExperimentConfig& cfg,
                        const SceneSet& scenes, const SoundBank& bank, bool scene_unseen,
                        bool sound_unheard, std::vector<EvalRecord>* records = nullptr);

struct ArmResult {
    std::string arm;                       // "baseline", "ours", ...
    uint64_t seed = 0;
    std::vector<MetricsSummary> splits;    // 4 combinations
};

struct MatrixReport {
    std::string reference_note;
    std::vector<std::string> arms;
    std::vector<uint64_t> seeds;
    std::vector<ArmResult> runs;
    // Mean over seeds, keyed by arm then split index (seen/heard,
    // seen/unheard, unseen/heard, unseen/unheard).
    std::vector<std::vector<MetricsSummary>> means;
    double unheard_unseen_spl_delta = 0.0;  // ours - baseline
    double heard_unseen_spl_delta = 0.0;
};

// Trains baseline (regularizer and augmentations off) and ours (all on)
// across cfg.matrix.seeds seeds and reports per-split means and deltas.
MatrixReport run_experiment_matrix(const ExperimentConfig& cfg, const std::string& out_dir);

void write_matrix_report(const MatrixReport& report, const std::string& out_dir);

} // namespace echonav
