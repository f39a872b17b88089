#include "echonav/contrast.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "echonav/losses.hpp"

namespace echonav {

bool PositionKey::operator<(const PositionKey& o) const {
    return std::tie(scene_id, source.x, source.y, cell.x, cell.y, heading) <
           std::tie(o.scene_id, o.source.x, o.source.y, o.cell.x, o.cell.y, o.heading);
}

uint64_t PositionKey::hash() const {
    uint64_t h = hash_str(scene_id);
    h = hash_combine(h, static_cast<uint64_t>(source.x));
    h = hash_combine(h, static_cast<uint64_t>(source.y));
    h = hash_combine(h, static_cast<uint64_t>(cell.x));
    h = hash_combine(h, static_cast<uint64_t>(cell.y));
    h = hash_combine(h, static_cast<uint64_t>(heading));
    return h;
}

void PairBatch::validate() const {
    const int64_t M = size();
    if (M == 0 || M % 2 != 0) throw std::runtime_error("PairBatch: size must be even and > 0");
    if (static_cast<int64_t>(pair_of.size()) != M ||
        static_cast<int64_t>(keys.size()) != M ||
        static_cast<int64_t>(classes.size()) != M ||
        static_cast<int64_t>(simulated.size()) != M)
        throw std::runtime_error("PairBatch: field sizes disagree");
    int64_t n_sim = 0;
    for (int64_t i = 0; i < M; ++i) {
        const int j = pair_of[i];
        if (j < 0 || j >= M || j == static_cast<int>(i) || pair_of[j] != static_cast<int>(i))
            throw std::runtime_error("PairBatch: pair map is not a fixed-point-free involution");
        if (!(keys[i] == keys[j]))
            throw std::runtime_error("PairBatch: paired entries do not share a position key");
        if (classes[i] == classes[j])
            throw std::runtime_error("PairBatch: paired entries share a class id");
        n_sim += simulated[i] ? 1 : 0;
    }
    if (n_sim != M / 2)
        throw std::runtime_error("PairBatch: expected N original and N simulated entries");
}

PairBatch mine_pair_batch(const std::vector<TrajectoryStep>& buffer, int64_t n_pairs,
                          const std::vector<int64_t>& heard, Rng& rng, const SceneMap& scenes,
                          const AcousticConfig& acfg, const StftConfig& stft,
                          const SoundBank& bank, const MiningConfig& mining) {
    if (n_pairs < 1) throw std::runtime_error("mine_pair_batch: need at least one pair");
    if (static_cast<int64_t>(buffer.size()) < n_pairs)
        throw std::runtime_error("mine_pair_batch: buffer smaller than requested pair count");
    if (heard.size() < 2)
        throw std::runtime_error("mine_pair_batch: need at least 2 heard classes");

    // Fisher-Yates order, then greedily take unseen position keys first.
    std::vector<int64_t> order(buffer.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int64_t>(i);
    for (int64_t i = static_cast<int64_t>(order.size()) - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(i + 1)]);

    std::vector<int64_t> chosen;
    chosen.reserve(n_pairs);
    if (mining.distinct_positions) {
        std::set<PositionKey> seen;
        std::vector<int64_t> skipped;
        for (int64_t idx : order) {
            if (static_cast<int64_t>(chosen.size()) == n_pairs) break;
            if (seen.insert(buffer[idx].key).second) chosen.push_back(idx);
            else skipped.push_back(idx);
        }
        for (size_t i = 0; chosen.size() < static_cast<size_t>(n_pairs); ++i)
            chosen.push_back(skipped[i]);
    } else {
        chosen.assign(order.begin(), order.begin() + n_pairs);
    }

    PairBatch batch;
    const int64_t M = 2 * n_pairs;
    batch.specs.resize(M);
    batch.pair_of.resize(M);
    batch.keys.resize(M);
    batch.classes.resize(M);
    batch.simulated.resize(M);

    for (int64_t p = 0; p < n_pairs; ++p) {
        const TrajectoryStep& step = buffer[chosen[p]];
        auto sit = scenes.find(step.key.scene_id);
        if (sit == scenes.end())
            throw std::runtime_error("mine_pair_batch: unknown scene '" + step.key.scene_id + "'");

        const int64_t alt = sample_alternative_class(step.class_id, heard, rng);
        Rir rir = compute_rir(sit->second, {step.key.cell, step.key.heading}, acfg,
                              bank.sample_rate);
        SourceWaveform alt_src = generate_sound(bank.by_id(alt), bank.sample_rate);
        Spectrogram sim_spec = stft_log_magnitude(render_binaural(rir, alt_src), stft);

        batch.specs[p] = step.spec;
        batch.keys[p] = step.key;
        batch.classes[p] = step.class_id;
        batch.simulated[p] = 0;
        batch.pair_of[p] = static_cast<int>(n_pairs + p);

        batch.specs[n_pairs + p] = std::move(sim_spec);
        batch.keys[n_pairs + p] = step.key;
        batch.classes[n_pairs + p] = alt;
        batch.simulated[n_pairs + p] = 1;
        batch.pair_of[n_pairs + p] = static_cast<int>(p);
    }
    batch.validate();
    return batch;
}

int64_t fn_audit(const PairBatch& batch) {
    batch.validate();
    int64_t collisions = 0;
    const int64_t M = batch.size();
    for (int64_t i = 0; i < M; ++i)
        for (int64_t k = i + 1; k < M; ++k) {
            if (batch.pair_of[i] == static_cast<int>(k)) continue;
            if (batch.keys[i] == batch.keys[k]) ++collisions;
        }
    return collisions;
}

void dump_pair_batch(const PairBatch& batch, const std::string& path_prefix) {
    batch.validate();
    nlohmann::json j;
    j["pairs"] = batch.size() / 2;
    j["spec_shape"] = {batch.specs[0].channels, batch.specs[0].bins, batch.specs[0].frames};
    j["values_file"] = path_prefix + ".bin";
    j["entries"] = nlohmann::json::array();
    for (int64_t i = 0; i < batch.size(); ++i) {
        nlohmann::json e;
        e["scene_id"] = batch.keys[i].scene_id;
        e["source_cell"] = {batch.keys[i].source.x, batch.keys[i].source.y};
        e["cell"] = {batch.keys[i].cell.x, batch.keys[i].cell.y};
        e["heading"] = heading_name(batch.keys[i].heading);
        e["class_id"] = batch.classes[i];
        e["simulated"] = batch.simulated[i] != 0;
        e["pair_of"] = batch.pair_of[i];
        j["entries"].push_back(e);
    }
    std::ofstream meta(path_prefix + ".json");
    if (!meta) throw std::runtime_error("dump_pair_batch: cannot write metadata");
    meta << j.dump(2) << "\n";

    std::ofstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("dump_pair_batch: cannot write values");
    for (const auto& spec : batch.specs)
        bin.write(reinterpret_cast<const char*>(spec.values.data()),
                  static_cast<std::streamsize>(spec.values.size() * sizeof(double)));
}

SimilarityContribution similarity_contribution(const ModelParams& params, const PairBatch& batch,
                                               double tau) {
    batch.validate();
    SimilarityContribution out;
    out.encoder_grads = GradientSet::zeros(params.dims);
    EncoderActivations acts = forward_encoder(params, batch_from_specs(batch.specs));
    InfoNceResult nce = info_nce(acts.E, batch.pair_of, tau);
    out.sim_loss = nce.loss;
    encoder_backward(params, acts, nce.d_embeddings, out.encoder_grads);
    out.encoder_grads.check_all_finite();
    return out;
}

} // namespace echonav
