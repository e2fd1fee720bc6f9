#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "admm_embed/core.hpp"
#include "admm_embed/relational.hpp"

namespace admm_embed {

using TripleScorer = std::function<double(const RelationTriple&)>;

// Per-relation plausibility threshold; classify score > threshold as
// positive.
struct ThresholdModel {
    std::unordered_map<int, double> thresholds;
    std::vector<int> single_class_relations;  // threshold forced to -inf
};

// Midpoint threshold maximizing dev accuracy per relation; ties broken
// toward the smaller threshold.
ThresholdModel fit_thresholds(const std::vector<RelationTriple>& dev, const TripleScorer& scorer);

struct PerRelationResult {
    std::size_t correct = 0;
    std::size_t total = 0;
};

struct KbResult {
    double accuracy = 0.0;
    std::unordered_map<int, PerRelationResult> per_relation;
    std::size_t unseen_relation_triples = 0;  // counted as errors
};

KbResult kb_completion_accuracy(const std::vector<RelationTriple>& test,
                                const TripleScorer& scorer, const ThresholdModel& thresholds);

struct AnalogyQuestion {
    std::vector<std::pair<Index, Index>> prototypes;
    std::vector<std::pair<Index, Index>> candidates;
    std::optional<int> gold_most;
    std::optional<int> gold_least;
};

struct MaxDiffPrediction {
    int most = 0;
    int least = 0;
    bool degenerate_candidates = false;  // some candidate had a zero-norm diff
};

// Prototype vector = mean of example-pair differences; candidates ranked
// by cosine against it. Ties break toward the lowest index.
MaxDiffPrediction analogy_maxdiff(const AnalogyQuestion& q, const EmbeddingTable& table);

double maxdiff_accuracy(const std::vector<AnalogyQuestion>& questions,
                        const EmbeddingTable& table);

// Top-k rows by cosine similarity to the query row, query excluded,
// descending, ties by index.
std::vector<std::pair<Index, double>> nearest_neighbors(Index word, const EmbeddingTable& table,
                                                        std::size_t k);

}  // namespace admm_embed
