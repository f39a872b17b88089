#include <algorithm>

#include "echonav/harness.hpp"

namespace echonav {

namespace {

// Teacher action count from the start pose, including the final Stop.
int count_oracle_actions(const GridScene& scene, AgentPose pose) {
    int n = 0;
    for (;;) {
        Action a = oracle_action(scene, pose, scene.source_cell);
        ++n;
        if (a == Action::Stop) return n;
        pose = step(scene, pose, a);
    }
}

} // namespace

MetricsSummary evaluate_with_policy(const PolicyFn& policy, const ExperimentConfig& cfg,
                                    const SceneSet& scenes, const SoundBank& bank,
                                    bool scene_unseen, bool sound_unheard,
                                    std::vector<EvalRecord>* records_out) {
    const std::vector<GridScene>& pool = scene_unseen ? scenes.test : scenes.train;
    const std::vector<int64_t>& classes =
        sound_unheard ? bank.split.unheard : bank.split.heard;
    if (pool.empty() || classes.empty()) throw std::runtime_error("evaluate: empty split");

    const uint64_t split_seed = hash_combine(
        hash_combine(cfg.master_seed, hash_str("eval")),
        (scene_unseen ? 2ULL : 0ULL) | (sound_unheard ? 1ULL : 0ULL));

    std::vector<EvalRecord> records;
    records.reserve(cfg.eval.episodes_per_split);

    for (int64_t ep = 0; ep < cfg.eval.episodes_per_split; ++ep) {
        // Per-episode derived seed; episodes are independent by construction.
        Rng rng(hash_combine(split_seed, static_cast<uint64_t>(ep)));
        const GridScene& scene = pool[rng.uniform_int(static_cast<int64_t>(pool.size()))];
        Episode episode = sample_episode(scene, classes, rng, cfg.train.max_steps);
        SourceWaveform source = generate_sound(bank.by_id(episode.sound_class_id),
                                               bank.sample_rate);

        EvalRecord rec;
        rec.scene_unseen = scene_unseen;
        rec.sound_unheard = sound_unheard;
        rec.geodesic_length =
            geodesic(scene, episode.start_pose.cell, scene.source_cell).distance;
        rec.oracle_actions = count_oracle_actions(scene, episode.start_pose);

        AgentPose pose = episode.start_pose;
        for (int t = 0; t < episode.max_steps; ++t) {
            Rir rir = compute_rir(scene, pose, cfg.acoustics, bank.sample_rate);
            Spectrogram spec = stft_log_magnitude(render_binaural(rir, source), cfg.stft);
            const Action action = policy(scene, pose, spec);

            rec.agent_actions += 1;
            if (action == Action::Stop) {
                rec.success = pose.cell == scene.source_cell;
                break;
            }
            AgentPose next = step(scene, pose, action);
            if (!(next.cell == pose.cell)) rec.path_length += scene.cell_size;
            pose = next;
        }
        records.push_back(rec);
    }

    if (records_out) *records_out = records;
    return summarize(records, scene_unseen ? "unseen" : "seen",
                     sound_unheard ? "unheard" : "heard", cfg.master_seed);
}

MetricsSummary evaluate(const ModelParams& params, const ExperimentConfig& cfg,
                        const SceneSet& scenes, const SoundBank& bank, bool scene_unseen,
                        bool sound_unheard, std::vector<EvalRecord>* records_out) {
    PolicyFn greedy = [&params](const GridScene&, const AgentPose&, const Spectrogram& spec) {
        EncoderActivations acts = forward_encoder(params, batch_from_specs({spec}));
        Tensor logits = policy_logits(params, acts.E);
        int best = 0;
        for (int a = 1; a < kNumActions; ++a)
            if (logits.at(0, a) > logits.at(0, best)) best = a;
        return static_cast<Action>(best);
    };
    return evaluate_with_policy(greedy, cfg, scenes, bank, scene_unseen, sound_unheard,
                                records_out);
}

} // namespace echonav
