#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "echonav/dsp.hpp"
#include "echonav/rng.hpp"
#include "echonav/tensor.hpp"

namespace echonav {

struct ModelDims {
    int64_t input = 0;   // 2 * bins * frames from the StftConfig in use
    int64_t hidden = 256;
    int64_t embed = 64;
    static constexpr int64_t actions = 4;

    bool operator==(const ModelDims&) const = default;
};

// Audio encoder (flatten -> hidden -> ReLU -> embed) plus a linear policy
// head on the embedding. Cosine similarity handles scale, so no
// normalization is baked into the encoder output.
struct ModelParams {
    ModelDims dims;
    Tensor W1, b1, W2, b2, Wp, bp;

    static ModelParams init(const ModelDims& dims, uint64_t seed);
    void validate_shapes() const;

    std::array<Tensor*, 6> fields() { return {&W1, &b1, &W2, &b2, &Wp, &bp}; }
    std::array<const Tensor*, 6> fields() const { return {&W1, &b1, &W2, &b2, &Wp, &bp}; }
    static const std::array<const char*, 6>& field_names();
};

struct GradientSet {
    Tensor W1, b1, W2, b2, Wp, bp;

    static GradientSet zeros(const ModelDims& dims);
    std::array<Tensor*, 6> fields() { return {&W1, &b1, &W2, &b2, &Wp, &bp}; }
    std::array<const Tensor*, 6> fields() const { return {&W1, &b1, &W2, &b2, &Wp, &bp}; }

    void accumulate(const GradientSet& other, double scale);
    void check_all_finite() const;
};

struct EncoderActivations {
    Tensor X;     // B x input
    Tensor Hpre;  // B x hidden
    Tensor H;     // B x hidden (ReLU)
    Tensor E;     // B x embed
};

// Flattens spectrograms (channel-major) into one batch row each.
Tensor batch_from_specs(const std::vector<Spectrogram>& specs);

EncoderActivations forward_encoder(const ModelParams& params, Tensor X);
Tensor policy_logits(const ModelParams& params, const Tensor& E);

// Accumulates encoder gradients for upstream dE; policy head untouched.
void encoder_backward(const ModelParams& params, const EncoderActivations& acts,
                      const Tensor& dE, GradientSet& grads);
// Accumulates policy-head gradients and returns dE.
Tensor policy_backward(const ModelParams& params, const Tensor& E, const Tensor& dlogits,
                       GradientSet& grads);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    GradientSet m, v;
    int64_t step = 0;

    static AdamState zeros(const ModelDims& dims);
};

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const AdamConfig& cfg);

// One training objective evaluation: BC cross-entropy on (bc_X, bc_targets)
// plus w * InfoNCE on nce_X with the given pair map (skipped when nce_X is
// empty). Gradients of the total land in `grads`; the similarity branch
// reaches only the encoder.
struct CombinedBatch {
    Tensor bc_X;
    std::vector<int> bc_targets;
    Tensor nce_X;
    std::vector<int> pair_of;
};

struct CombinedResult {
    double bc = 0.0;
    double sim = 0.0;
    double total = 0.0;
    GradientSet grads;
};

CombinedResult combined_loss_and_grads(const ModelParams& params, const CombinedBatch& batch,
                                       double tau, double w);

// Versioned binary checkpoint: dims echo, parameters, Adam state, RNG
// stream states and the update counter. Load validates shapes.
struct Checkpoint {
    ModelParams params;
    AdamState adam;
    uint64_t update_count = 0;
    StftConfig stft;
    std::vector<std::array<uint64_t, 4>> rng_states;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace echonav
