#include "admm_embed/penalty.hpp"

#include <algorithm>
#include <cmath>

namespace admm_embed {

double penalty_loss(const PenaltyContext& ctx) {
    double total = 0.0;
    const std::size_t dim = ctx.w->dim();
    for (std::size_t j = 0; j < ctx.joint->size(); ++j) {
        const auto& entry = ctx.joint->shared[j];
        auto wi = ctx.w->row(entry.corpus_id);
        auto vi = ctx.v->row(entry.relational_id);
        auto yi = ctx.y->row(static_cast<Index>(j));
        for (std::size_t k = 0; k < dim; ++k) {
            double r = wi[k] - vi[k];
            total += yi[k] * r + 0.5 * ctx.rho * r * r;
        }
    }
    return total;
}

PenaltyGradients penalty_gradients(const PenaltyContext& ctx) {
    const std::size_t dim = ctx.w->dim();
    PenaltyGradients g;
    g.w_rows.resize(ctx.joint->size() * dim);
    g.v_rows.resize(ctx.joint->size() * dim);
    for (std::size_t j = 0; j < ctx.joint->size(); ++j) {
        const auto& entry = ctx.joint->shared[j];
        auto wi = ctx.w->row(entry.corpus_id);
        auto vi = ctx.v->row(entry.relational_id);
        auto yi = ctx.y->row(static_cast<Index>(j));
        for (std::size_t k = 0; k < dim; ++k) {
            double grad = yi[k] + ctx.rho * (wi[k] - vi[k]);
            g.w_rows[j * dim + k] = grad;
            g.v_rows[j * dim + k] = -grad;
        }
    }
    return g;
}

bool penalty_grad_w_row(const PenaltyContext& ctx, Index corpus_id, std::span<double> out) {
    auto it = ctx.joint->by_corpus.find(corpus_id);
    if (it == ctx.joint->by_corpus.end()) return false;
    const auto& entry = ctx.joint->shared[it->second];
    auto wi = ctx.w->row(entry.corpus_id);
    auto vi = ctx.v->row(entry.relational_id);
    auto yi = ctx.y->row(static_cast<Index>(it->second));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = yi[k] + ctx.rho * (wi[k] - vi[k]);
    return true;
}

bool penalty_grad_v_row(const PenaltyContext& ctx, Index relational_id, std::span<double> out) {
    auto it = ctx.joint->by_relational.find(relational_id);
    if (it == ctx.joint->by_relational.end()) return false;
    const auto& entry = ctx.joint->shared[it->second];
    auto wi = ctx.w->row(entry.corpus_id);
    auto vi = ctx.v->row(entry.relational_id);
    auto yi = ctx.y->row(static_cast<Index>(it->second));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = -(yi[k] + ctx.rho * (wi[k] - vi[k]));
    return true;
}

void dual_update(const PenaltyContext& ctx) {
    const std::size_t dim = ctx.w->dim();
    for (std::size_t j = 0; j < ctx.joint->size(); ++j) {
        const auto& entry = ctx.joint->shared[j];
        auto wi = ctx.w->row(entry.corpus_id);
        auto vi = ctx.v->row(entry.relational_id);
        auto yi = ctx.y->row(static_cast<Index>(j));
        for (std::size_t k = 0; k < dim; ++k) yi[k] += ctx.rho * (wi[k] - vi[k]);
    }
}

double mean_residual(const PenaltyContext& ctx) {
    constexpr double kEps = 1e-12;
    if (ctx.joint->size() == 0) return 0.0;
    double total = 0.0;
    const std::size_t dim = ctx.w->dim();
    std::vector<double> diff(dim);
    for (const auto& entry : ctx.joint->shared) {
        auto wi = ctx.w->row(entry.corpus_id);
        auto vi = ctx.v->row(entry.relational_id);
        for (std::size_t k = 0; k < dim; ++k) diff[k] = wi[k] - vi[k];
        double denom = std::max({l2_norm(wi), l2_norm(vi), kEps});
        total += l2_norm(diff) / denom;
    }
    return total / static_cast<double>(ctx.joint->size());
}

}  // namespace admm_embed
