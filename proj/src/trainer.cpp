#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "echonav/harness.hpp"
#include "echonav/losses.hpp"

namespace echonav {

TrainResult train(const ExperimentConfig& cfg) {
    cfg.validate();
    SceneSet scenes = build_scenes(cfg);
    SoundBank bank = build_bank(cfg);

    ModelDims dims{cfg.input_dim(), cfg.model.hidden, cfg.model.embed};
    Rng master(cfg.master_seed);
    ModelParams params = ModelParams::init(dims, hash_combine(cfg.master_seed, hash_str("init")));
    AdamState adam = AdamState::zeros(dims);
    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;

    // Dedicated streams so toggling one feature never shifts the draws of
    // another (a w=0 run stays bit-identical to the regularizer-off run).
    Rng rng_collect = master.descend("collect");
    Rng rng_update = master.descend("update");
    Rng rng_mine = master.descend("mine");

    const bool mine_pairs = cfg.flags.contrast_on && cfg.loss.similarity_weight != 0.0;
    const int64_t min_buffer = std::max(cfg.train.bc_batch, mine_pairs ? cfg.loss.pair_count : 1);
    MiningConfig mining{cfg.flags.distinct_positions};

    TrainResult result;
    std::vector<TrajectoryStep> buffer;

    for (int64_t update = 0; update < cfg.train.updates; ++update) {
        if (update % cfg.train.collect_every == 0) {
            buffer = collect_trajectories(cfg, scenes.train, bank, cfg.train.episodes_per_round,
                                          rng_collect);
            while (static_cast<int64_t>(buffer.size()) < min_buffer) {
                auto extra = collect_trajectories(cfg, scenes.train, bank, 1, rng_collect);
                buffer.insert(buffer.end(), std::make_move_iterator(extra.begin()),
                              std::make_move_iterator(extra.end()));
            }
        }

        CombinedBatch batch;
        std::vector<Spectrogram> bc_specs(cfg.train.bc_batch);
        batch.bc_targets.resize(cfg.train.bc_batch);
        for (int64_t i = 0; i < cfg.train.bc_batch; ++i) {
            const auto& s = buffer[rng_update.uniform_int(static_cast<int64_t>(buffer.size()))];
            bc_specs[i] = s.spec;
            batch.bc_targets[i] = static_cast<int>(s.oracle_action);
        }
        batch.bc_X = batch_from_specs(bc_specs);

        if (mine_pairs) {
            PairBatch pairs = mine_pair_batch(buffer, cfg.loss.pair_count, bank.split.heard,
                                              rng_mine, scenes.by_id, cfg.acoustics, cfg.stft,
                                              bank, mining);
            batch.nce_X = batch_from_specs(pairs.specs);
            batch.pair_of = pairs.pair_of;
        }

        CombinedResult step;
        try {
            step = combined_loss_and_grads(params, batch, cfg.loss.temperature,
                                           cfg.loss.similarity_weight);
        } catch (const std::runtime_error& e) {
            throw DivergenceError("update " + std::to_string(update) + ": " + e.what());
        }
        if (!std::isfinite(step.total))
            throw DivergenceError("update " + std::to_string(update) + ": non-finite loss");

        adam_step(params, step.grads, adam, adam_cfg);

        if (update % cfg.train.log_every == 0 || update == cfg.train.updates - 1)
            result.metrics.push_back({update, step.bc, step.sim, step.total});
    }

    result.checkpoint.params = std::move(params);
    result.checkpoint.adam = std::move(adam);
    result.checkpoint.update_count = static_cast<uint64_t>(cfg.train.updates);
    result.checkpoint.stft = cfg.stft;
    result.checkpoint.rng_states = {rng_collect.state(), rng_update.state(), rng_mine.state()};
    return result;
}

void write_train_metrics(const std::vector<TrainMetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_train_metrics: cannot write '" + path + "'");
    for (const auto& r : rows) {
        nlohmann::json j;
        j["update"] = r.update;
        j["bc_loss"] = r.bc_loss;
        j["sim_loss"] = r.sim_loss;
        j["total_loss"] = r.total_loss;
        out << j.dump() << "\n";
    }
}

} // namespace echonav
