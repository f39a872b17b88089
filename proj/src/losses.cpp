#include "echonav/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace echonav {

double cosine_sim(const double* u, const double* v, int64_t d) {
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (int64_t i = 0; i < d; ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw std::runtime_error("zero-norm embedding");
    return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double cosine_sim(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw std::runtime_error("cosine_sim: dimension mismatch");
    if (u.empty()) throw std::runtime_error("cosine_sim: empty vectors");
    return cosine_sim(u.data(), v.data(), static_cast<int64_t>(u.size()));
}

InfoNceResult info_nce(const Tensor& embeddings, const std::vector<int>& pair_of, double tau) {
    if (tau <= 0.0) throw std::runtime_error("info_nce: tau must be positive");
    const int64_t M = embeddings.rows();
    const int64_t D = embeddings.cols();
    if (M < 2 || M % 2 != 0)
        throw std::runtime_error("info_nce: embedding count must be even and >= 2");
    if (static_cast<int64_t>(pair_of.size()) != M)
        throw std::runtime_error("info_nce: non-matching pair map (size)");
    for (int64_t i = 0; i < M; ++i) {
        int j = pair_of[i];
        if (j < 0 || j >= M || j == i || pair_of[j] != i)
            throw std::runtime_error("info_nce: non-matching pair map (not a perfect matching)");
    }

    // Normalized rows and pairwise cosine matrix.
    std::vector<double> norm(M);
    Tensor U({M, D});
    for (int64_t i = 0; i < M; ++i) {
        double n2 = 0.0;
        for (int64_t k = 0; k < D; ++k) n2 += embeddings.at(i, k) * embeddings.at(i, k);
        if (n2 == 0.0) throw std::runtime_error("zero-norm embedding");
        norm[i] = std::sqrt(n2);
        for (int64_t k = 0; k < D; ++k) U.at(i, k) = embeddings.at(i, k) / norm[i];
    }
    Tensor S({M, M});
    for (int64_t i = 0; i < M; ++i)
        for (int64_t j = 0; j < M; ++j) {
            double s = 0.0;
            for (int64_t k = 0; k < D; ++k) s += U.at(i, k) * U.at(j, k);
            S.at(i, j) = std::clamp(s, -1.0, 1.0);
        }

    // Loss and dLoss/dS. Per anchor i the denominator runs over all k != i;
    // logsumexp subtracts the row max so the N=1 anchor is exactly zero.
    InfoNceResult res;
    res.d_embeddings = Tensor({M, D});
    Tensor dS({M, M});
    double loss = 0.0;
    for (int64_t i = 0; i < M; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t k = 0; k < M; ++k)
            if (k != i) mx = std::max(mx, S.at(i, k) / tau);
        double sum = 0.0;
        for (int64_t k = 0; k < M; ++k)
            if (k != i) sum += std::exp(S.at(i, k) / tau - mx);
        const double lse = mx + std::log(sum);
        loss += -S.at(i, pair_of[i]) / tau + lse;
        for (int64_t k = 0; k < M; ++k) {
            if (k == i) continue;
            double soft = std::exp(S.at(i, k) / tau - lse);
            double g = (soft - (k == pair_of[i] ? 1.0 : 0.0)) / tau / static_cast<double>(M);
            dS.at(i, k) = g;
        }
    }
    res.loss = loss / static_cast<double>(M);

    // Chain through the cosine: dS(i,k)/dE_i = (U_k - S_ik U_i) / |E_i|.
    for (int64_t i = 0; i < M; ++i)
        for (int64_t k = 0; k < M; ++k) {
            if (k == i) continue;
            const double g = dS.at(i, k);
            if (g == 0.0) continue;
            for (int64_t d = 0; d < D; ++d) {
                res.d_embeddings.at(i, d) += g * (U.at(k, d) - S.at(i, k) * U.at(i, d)) / norm[i];
                res.d_embeddings.at(k, d) += g * (U.at(i, d) - S.at(i, k) * U.at(k, d)) / norm[k];
            }
        }
    check_finite(res.d_embeddings, "info_nce d_embeddings");
    return res;
}

BcResult bc_loss(const Tensor& logits, const std::vector<int>& targets) {
    const int64_t B = logits.rows();
    const int64_t A = logits.cols();
    if (B == 0) throw std::runtime_error("bc_loss: empty batch");
    if (static_cast<int64_t>(targets.size()) != B)
        throw std::runtime_error("bc_loss: target count does not match batch");

    BcResult res;
    res.d_logits = Tensor({B, A});
    double loss = 0.0;
    for (int64_t i = 0; i < B; ++i) {
        const int t = targets[i];
        if (t < 0 || t >= A)
            throw std::runtime_error("bc_loss: label " + std::to_string(t) + " out of range");
        double mx = logits.at(i, 0);
        for (int64_t a = 1; a < A; ++a) mx = std::max(mx, logits.at(i, a));
        double sum = 0.0;
        for (int64_t a = 0; a < A; ++a) sum += std::exp(logits.at(i, a) - mx);
        const double lse = mx + std::log(sum);
        loss += lse - logits.at(i, t);
        for (int64_t a = 0; a < A; ++a) {
            double p = std::exp(logits.at(i, a) - lse);
            res.d_logits.at(i, a) = (p - (a == t ? 1.0 : 0.0)) / static_cast<double>(B);
        }
    }
    res.loss = loss / static_cast<double>(B);
    check_finite(res.d_logits, "bc_loss d_logits");
    return res;
}

} // namespace echonav
