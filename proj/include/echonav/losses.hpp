#pragma once

#include <cstdint>
#include <vector>

#include "echonav/tensor.hpp"

namespace echonav {

// Exact u.v / (|u||v|), clamped to [-1, 1] against rounding.
// Throws "zero-norm embedding" on a zero vector.
double cosine_sim(const std::vector<double>& u, const std::vector<double>& v);
double cosine_sim(const double* u, const double* v, int64_t d);

struct InfoNceResult {
    double loss = 0.0;
    Tensor d_embeddings;  // dLoss/dE, same shape as E
};

// SimCLR-style InfoNCE over 2N embeddings with cosine similarity and
// temperature tau: both orderings of every pair, mean over the 2N terms.
// pair_of must be a fixed-point-free involution on {0..2N-1}.
InfoNceResult info_nce(const Tensor& embeddings, const std::vector<int>& pair_of, double tau);

struct BcResult {
    double loss = 0.0;
    Tensor d_logits;
};

// Mean softmax cross-entropy over action labels in {0..3}.
BcResult bc_loss(const Tensor& logits, const std::vector<int>& targets);

inline double total_loss(double bc, double sim_loss, double w) { return bc + w * sim_loss; }

} // namespace echonav
