#include "admm_embed/distributional.hpp"

#include <cmath>

namespace admm_embed {

NlmParams NlmParams::init(std::size_t n, std::size_t d, std::size_t h, Rng& rng, double scale) {
    NlmParams p;
    p.n = n;
    p.d = d;
    p.h = h;
    p.A.resize(h * n * d);
    p.b.resize(h);
    p.u.resize(h);
    for (double& x : p.A) x = rng.uniform(-scale, scale);
    for (double& x : p.b) x = rng.uniform(-scale, scale);
    for (double& x : p.u) x = rng.uniform(-scale, scale);
    return p;
}

bool NlmParams::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    return ok(A) && ok(b) && ok(u);
}

const Ngram& NgramCorpus::sample(Rng& rng) const {
    if (ngrams.empty()) throw InputError("cannot sample from empty n-gram corpus");
    if (counts.empty()) return ngrams[static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(ngrams.size())))];
    std::discrete_distribution<std::size_t> dist(counts.begin(), counts.end());
    return ngrams[dist(rng.engine())];
}

namespace {

void concat_embeddings(const Ngram& g, const EmbeddingTable& w, std::vector<double>& x) {
    const std::size_t d = w.dim();
    x.resize(g.size() * d);
    for (std::size_t pos = 0; pos < g.size(); ++pos) {
        auto row = w.row(g[pos]);
        for (std::size_t k = 0; k < d; ++k) x[pos * d + k] = row[k];
    }
}

struct Forward {
    std::vector<double> x;    // n*d
    std::vector<double> act;  // sigmoid(A x + b), h
    double score = 0.0;
};

Forward forward_nlm(const Ngram& g, const EmbeddingTable& w, const NlmParams& p) {
    if (g.size() != p.n || w.dim() != p.d)
        throw ConfigError("score_nlm: n-gram length or embedding dim inconsistent with params");
    Forward f;
    concat_embeddings(g, w, f.x);
    const std::size_t nd = p.n * p.d;
    f.act.resize(p.h);
    for (std::size_t k = 0; k < p.h; ++k) {
        double z = p.b[k];
        const double* arow = p.A.data() + k * nd;
        for (std::size_t j = 0; j < nd; ++j) z += arow[j] * f.x[j];
        f.act[k] = sigmoid(z);
        f.score += p.u[k] * f.act[k];
    }
    return f;
}

// Adds sign * d score / d (params, embeddings) for one n-gram.
void accumulate_score_grad(const Ngram& g, const Forward& f, const NlmParams& p, double sign,
                           NlmGradients& out) {
    const std::size_t nd = p.n * p.d;
    std::vector<double> dx(nd, 0.0);
    for (std::size_t k = 0; k < p.h; ++k) {
        out.u[k] += sign * f.act[k];
        double dz = sign * p.u[k] * f.act[k] * (1.0 - f.act[k]);
        out.b[k] += dz;
        const double* arow = p.A.data() + k * nd;
        double* garow = out.A.data() + k * nd;
        for (std::size_t j = 0; j < nd; ++j) {
            garow[j] += dz * f.x[j];
            dx[j] += dz * arow[j];
        }
    }
    for (std::size_t pos = 0; pos < g.size(); ++pos) {
        auto [it, inserted] = out.w_rows.try_emplace(g[pos], p.d, 0.0);
        for (std::size_t k = 0; k < p.d; ++k) it->second[k] += dx[pos * p.d + k];
    }
}

}  // namespace

double score_nlm(const Ngram& g, const EmbeddingTable& w, const NlmParams& p) {
    return forward_nlm(g, w, p).score;
}

Ngram corrupt_ngram(const Ngram& g, std::size_t vocab_size, Rng& rng) {
    if (vocab_size < 2) throw InputError("corrupt_ngram: vocabulary too small to corrupt");
    Ngram out = g;
    std::size_t center = g.size() / 2;
    out[center] = rng.uniform_index_excluding(static_cast<Index>(vocab_size), g[center]);
    return out;
}

NlmGradients nlm_gradients(const Ngram& pos, const Ngram& neg, const EmbeddingTable& w,
                           const NlmParams& p) {
    NlmGradients g;
    g.A.assign(p.A.size(), 0.0);
    g.b.assign(p.h, 0.0);
    g.u.assign(p.h, 0.0);
    Forward fp = forward_nlm(pos, w, p);
    Forward fn = forward_nlm(neg, w, p);
    g.loss = hinge_loss(fp.score, fn.score);
    if (1.0 - fp.score + fn.score <= 0.0) return g;  // flat region
    accumulate_score_grad(pos, fp, p, -1.0, g);
    accumulate_score_grad(neg, fn, p, +1.0, g);
    return g;
}

double nlm_sgd_step(const std::vector<Ngram>& batch, EmbeddingTable& w, NlmParams& p, double lr,
                    const PenaltyContext* penalty, Rng& rng) {
    if (lr < 0.0) throw ConfigError("learning rate must be non-negative");
    double total_loss = 0.0;
    std::vector<double> pgrad(w.dim());
    for (const Ngram& pos : batch) {
        Ngram neg = corrupt_ngram(pos, w.rows(), rng);
        NlmGradients g = nlm_gradients(pos, neg, w, p);
        total_loss += g.loss;
        if (penalty != nullptr) {
            // Penalty applies to every touched row even when the hinge is flat.
            for (const Ngram* gram : std::initializer_list<const Ngram*>{&pos, &neg})
                for (Index id : *gram) g.w_rows.try_emplace(id, w.dim(), 0.0);
            for (auto& [id, grad] : g.w_rows) {
                if (penalty_grad_w_row(*penalty, id, pgrad))
                    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += pgrad[k];
            }
        }
        for (const auto& [id, grad] : g.w_rows) {
            auto row = w.row(id);
            for (std::size_t k = 0; k < row.size(); ++k) row[k] -= lr * grad[k];
        }
        for (std::size_t j = 0; j < p.A.size(); ++j) p.A[j] -= lr * g.A[j];
        for (std::size_t k = 0; k < p.h; ++k) {
            p.b[k] -= lr * g.b[k];
            p.u[k] -= lr * g.u[k];
        }
    }
    return batch.empty() ? 0.0 : total_loss / static_cast<double>(batch.size());
}

}  // namespace admm_embed
