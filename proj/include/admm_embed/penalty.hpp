#pragma once

#include "admm_embed/core.hpp"

namespace admm_embed {

// Consensus penalty over the shared vocabulary:
//   L_P = sum_i y_i'(w_i - v_i) + (rho/2) sum_i ||w_i - v_i||^2
// y has one row per shared word, indexed by joint index.
struct PenaltyContext {
    const JointVocabulary* joint = nullptr;
    EmbeddingTable* w = nullptr;
    EmbeddingTable* v = nullptr;
    EmbeddingTable* y = nullptr;
    double rho = 0.0;
};

double penalty_loss(const PenaltyContext& ctx);

// d L_P / d w_i = y_i + rho (w_i - v_i); the v gradient is its negation.
// Returns gradients for every shared word, joint-index order, flattened
// row-major. Non-shared words have zero gradient and are not represented.
struct PenaltyGradients {
    std::vector<double> w_rows;  // size() == joint->size() * dim
    std::vector<double> v_rows;
};

PenaltyGradients penalty_gradients(const PenaltyContext& ctx);

// Writes y_i + rho (w_i - v_i) for the shared word with the given corpus id
// into `out` (length dim); returns false when the word is not shared.
bool penalty_grad_w_row(const PenaltyContext& ctx, Index corpus_id, std::span<double> out);
// Same for a relational id; gradient sign is already flipped for v.
bool penalty_grad_v_row(const PenaltyContext& ctx, Index relational_id, std::span<double> out);

// ADMM step (3): y_i += rho (w_i - v_i) for every shared word.
void dual_update(const PenaltyContext& ctx);

// (1/N) sum_i ||w_i - v_i|| / max(||w_i||, ||v_i||, eps); 0 when N = 0.
double mean_residual(const PenaltyContext& ctx);

}  // namespace admm_embed
