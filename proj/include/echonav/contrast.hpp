#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "echonav/acoustics.hpp"
#include "echonav/dsp.hpp"
#include "echonav/grid.hpp"
#include "echonav/model.hpp"
#include "echonav/rng.hpp"
#include "echonav/soundbank.hpp"

namespace echonav {

// Acoustic identity of an observation: same key implies the simulator
// produces the same RIR.
struct PositionKey {
    std::string scene_id;
    Cell source;
    Cell cell;
    Heading heading = Heading::North;

    bool operator==(const PositionKey&) const = default;
    bool operator<(const PositionKey& o) const;
    uint64_t hash() const;
};

struct TrajectoryStep {
    PositionKey key;
    int64_t class_id = 0;
    BinauralWaveform wave;
    Spectrogram spec;
    Action oracle_action = Action::Stop;
    int64_t episode_id = 0;
    int step_index = 0;
};

// 2N spectrograms: N originals followed by their N simulated partners.
// pair_of is a fixed-point-free involution; paired entries share the
// position key and differ in class id.
struct PairBatch {
    std::vector<Spectrogram> specs;
    std::vector<int> pair_of;
    std::vector<PositionKey> keys;
    std::vector<int64_t> classes;
    std::vector<uint8_t> simulated;  // origin flag, 0 = original

    int64_t size() const { return static_cast<int64_t>(specs.size()); }
    void validate() const;
};

using SceneMap = std::map<std::string, GridScene>;

struct MiningConfig {
    // Greedy de-duplication by position key before uniform fallback.
    // Disable for plain uniform subset sampling.
    bool distinct_positions = true;
};

// Samples N buffer steps, renders each position's RIR with an alternative
// heard sound (clean, no augmentation) and assembles the contrastive batch.
PairBatch mine_pair_batch(const std::vector<TrajectoryStep>& buffer, int64_t n_pairs,
                          const std::vector<int64_t>& heard, Rng& rng, const SceneMap& scenes,
                          const AcousticConfig& acfg, const StftConfig& stft,
                          const SoundBank& bank, const MiningConfig& mining = {});

// Number of unordered non-partner index pairs that share a position key,
// i.e. negatives that are acoustically positive. Diagnostic only.
int64_t fn_audit(const PairBatch& batch);

struct SimilarityContribution {
    double sim_loss = 0.0;
    GradientSet encoder_grads;  // policy-head entries stay zero
};

// Forward all 2N spectrograms, InfoNCE, backprop into encoder parameters
// only. The weight w is applied by the caller at combination time.
SimilarityContribution similarity_contribution(const ModelParams& params, const PairBatch& batch,
                                               double tau);

// Offline-inspection dump. Writes <prefix>.json with the batch metadata
// (pair map, position keys, class ids, origin flags, spectrogram shape)
// and <prefix>.bin with the 2N spectrograms as little-endian float64,
// entry-major in the JSON "entries" order.
void dump_pair_batch(const PairBatch& batch, const std::string& path_prefix);

} // namespace echonav
