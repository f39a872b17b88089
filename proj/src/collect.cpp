#include <stdexcept>

#include "echonav/harness.hpp"

namespace echonav {

SceneSet build_scenes(const ExperimentConfig& cfg) {
    Rng rng = Rng(cfg.master_seed).descend("scenes");
    SceneSet out;
    auto make = [&](const std::string& id) {
        const int span = cfg.scenes.max_size - cfg.scenes.min_size + 1;
        const int w = cfg.scenes.min_size + static_cast<int>(rng.uniform_int(span));
        const int h = cfg.scenes.min_size + static_cast<int>(rng.uniform_int(span));
        const double frac = rng.uniform(0.0, cfg.scenes.obstacle_fraction_max);
        const double reverb = rng.uniform(cfg.scenes.reverb_min, cfg.scenes.reverb_max);
        return generate_scene(id, w, h, cfg.scenes.cell_size, frac, reverb, rng);
    };
    for (int i = 0; i < cfg.scenes.train_count; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "train_%02d", i);
        out.train.push_back(make(id));
    }
    for (int i = 0; i < cfg.scenes.test_count; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "test_%02d", i);
        out.test.push_back(make(id));
    }
    for (const auto& s : out.train) out.by_id.emplace(s.id, s);
    for (const auto& s : out.test) out.by_id.emplace(s.id, s);
    return out;
}

SoundBank build_bank(const ExperimentConfig& cfg) {
    if (!cfg.bank_manifest.empty()) {
        SoundBank bank = load_bank(cfg.bank_manifest);
        if (bank.sample_rate != cfg.sample_rate)
            throw std::runtime_error("build_bank: manifest sample rate differs from config");
        return bank;
    }
    return default_bank(cfg.sample_rate);
}

namespace {

// Episode-level source preparation: draw a heard class, optionally reverse
// (the mix partner too), optionally mix with a second heard draw.
SourceWaveform prepare_source(const ExperimentConfig& cfg, const SoundBank& bank,
                              int64_t class_id, Rng& rng, bool* reversed, bool* mixed) {
    SourceWaveform x = generate_sound(bank.by_id(class_id), bank.sample_rate);
    if (reversed) *reversed = false;
    if (mixed) *mixed = false;

    const double p = cfg.flags.reverse_on ? cfg.augment.reverse_prob : 0.0;
    if (cfg.flags.reverse_on) {
        SourceWaveform r = reverse_augment(x, p, rng);
        if (reversed && r.samples != x.samples) *reversed = true;
        x = std::move(r);
    }
    if (cfg.flags.mixup_on && cfg.augment.mixup_enabled) {
        const auto& heard = bank.split.heard;
        int64_t partner = heard[rng.uniform_int(static_cast<int64_t>(heard.size()))];
        SourceWaveform x2 = generate_sound(bank.by_id(partner), bank.sample_rate);
        if (cfg.flags.reverse_on) x2 = reverse_augment(x2, p, rng);
        const double lambda = sample_lambda(cfg.augment.mixup_alpha, rng);
        x = mixup(x, x2, lambda);
        if (mixed) *mixed = true;
    }
    return x;
}

} // namespace

std::vector<TrajectoryStep> collect_trajectories(const ExperimentConfig& cfg,
                                                 const std::vector<GridScene>& scenes,
                                                 const SoundBank& bank, int64_t episodes,
                                                 Rng& rng, CollectStats* stats) {
    if (scenes.empty()) throw std::runtime_error("collect_trajectories: no scenes");
    std::vector<TrajectoryStep> buffer;

    for (int64_t ep = 0; ep < episodes; ++ep) {
        const GridScene& scene = scenes[rng.uniform_int(static_cast<int64_t>(scenes.size()))];
        Episode episode = sample_episode(scene, bank.split.heard, rng, cfg.train.max_steps);

        bool reversed = false, mixed = false;
        SourceWaveform source =
            prepare_source(cfg, bank, episode.sound_class_id, rng, &reversed, &mixed);

        AgentPose pose = episode.start_pose;
        for (int t = 0; t < episode.max_steps; ++t) {
            Action teacher = oracle_action(scene, pose, scene.source_cell);

            TrajectoryStep step_rec;
            step_rec.key = PositionKey{scene.id, scene.source_cell, pose.cell, pose.heading};
            step_rec.class_id = source.class_id;
            Rir rir = compute_rir(scene, pose, cfg.acoustics, bank.sample_rate);
            step_rec.wave = render_binaural(rir, source);
            step_rec.spec = stft_log_magnitude(step_rec.wave, cfg.stft);
            step_rec.oracle_action = teacher;
            step_rec.episode_id = ep;
            step_rec.step_index = t;
            buffer.push_back(std::move(step_rec));

            Action executed = teacher;
            if (rng.uniform01() < cfg.train.epsilon)
                executed = static_cast<Action>(rng.uniform_int(kNumActions));
            if (executed == Action::Stop) break;
            pose = step(scene, pose, executed);
        }
        if (stats) {
            stats->episodes += 1;
            stats->reversed_episodes += reversed ? 1 : 0;
            stats->mixed_episodes += mixed ? 1 : 0;
        }
    }
    if (stats) stats->steps = static_cast<int64_t>(buffer.size());
    return buffer;
}

} // namespace echonav
