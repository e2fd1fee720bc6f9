#pragma once

#include <unordered_map>
#include <vector>

#include "admm_embed/core.hpp"
#include "admm_embed/penalty.hpp"

namespace admm_embed {

using Ngram = std::vector<Index>;

// Two-layer n-gram scorer: S(x) = u' sigmoid(A x + b), x the concatenation
// of the n word embeddings.
struct NlmParams {
    std::size_t n = 0;  // context length
    std::size_t d = 0;  // embedding dimension
    std::size_t h = 0;  // hidden width
    std::vector<double> A;  // h x (n*d), row-major
    std::vector<double> b;  // h
    std::vector<double> u;  // h

    static NlmParams init(std::size_t n, std::size_t d, std::size_t h, Rng& rng, double scale);
    bool all_finite() const;
};

struct NgramCorpus {
    std::size_t n = 0;
    std::vector<Ngram> ngrams;
    std::vector<double> counts;  // empty => uniform sampling

    const Ngram& sample(Rng& rng) const;
};

double score_nlm(const Ngram& g, const EmbeddingTable& w, const NlmParams& p);

// Replaces the center word (position n/2) with a uniform draw != original.
Ngram corrupt_ngram(const Ngram& g, std::size_t vocab_size, Rng& rng);

inline double hinge_loss(double s_pos, double s_neg) {
    double m = 1.0 - s_pos + s_neg;
    return m > 0.0 ? m : 0.0;
}

// Gradient of hinge_loss(score(pos), score(neg)) w.r.t. the touched
// embedding rows and all scorer parameters. Zero everywhere when the
// margin is satisfied.
struct NlmGradients {
    double loss = 0.0;
    std::unordered_map<Index, std::vector<double>> w_rows;
    std::vector<double> A, b, u;
};

NlmGradients nlm_gradients(const Ngram& pos, const Ngram& neg, const EmbeddingTable& w,
                           const NlmParams& p);

// One corruption + SGD update per n-gram; when `penalty` is non-null its
// gradient is added to each distinct touched w row once per n-gram.
// Returns the mean hinge loss over the batch.
double nlm_sgd_step(const std::vector<Ngram>& batch, EmbeddingTable& w, NlmParams& p, double lr,
                    const PenaltyContext* penalty, Rng& rng);

}  // namespace admm_embed
