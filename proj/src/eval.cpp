#include "admm_embed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace admm_embed {

ThresholdModel fit_thresholds(const std::vector<RelationTriple>& dev, const TripleScorer& scorer) {
    std::map<int, std::vector<std::pair<double, bool>>> by_relation;  // (score, is_positive)
    for (const RelationTriple& t : dev) {
        if (t.label == TripleLabel::Unlabeled)
            throw InputError("fit_thresholds: dev triples must be labeled");
        by_relation[t.relation].emplace_back(scorer(t), t.label == TripleLabel::Positive);
    }
    ThresholdModel model;
    for (auto& [relation, scored] : by_relation) {
        bool has_pos = false, has_neg = false;
        for (const auto& [score, pos] : scored) (pos ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) {
            model.thresholds[relation] = -std::numeric_limits<double>::infinity();
            model.single_class_relations.push_back(relation);
            continue;
        }
        std::sort(scored.begin(), scored.end());
        std::vector<double> candidates;
        candidates.push_back(scored.front().first - 1.0);
        for (std::size_t k = 0; k + 1 < scored.size(); ++k)
            candidates.push_back(0.5 * (scored[k].first + scored[k + 1].first));
        candidates.push_back(scored.back().first + 1.0);
        double best_threshold = candidates.front();
        std::size_t best_correct = 0;
        bool first = true;
        for (double thr : candidates) {
            std::size_t correct = 0;
            for (const auto& [score, pos] : scored)
                if ((score > thr) == pos) ++correct;
            if (first || correct > best_correct) {  // ties keep the smaller threshold
                best_correct = correct;
                best_threshold = thr;
                first = false;
            }
        }
        model.thresholds[relation] = best_threshold;
    }
    return model;
}

KbResult kb_completion_accuracy(const std::vector<RelationTriple>& test,
                                const TripleScorer& scorer, const ThresholdModel& thresholds) {
    KbResult result;
    if (test.empty()) return result;
    std::size_t correct = 0;
    for (const RelationTriple& t : test) {
        if (t.label == TripleLabel::Unlabeled)
            throw InputError("kb_completion_accuracy: test triples must be labeled");
        auto& slot = result.per_relation[t.relation];
        ++slot.total;
        auto it = thresholds.thresholds.find(t.relation);
        if (it == thresholds.thresholds.end()) {
            ++result.unseen_relation_triples;  // no threshold -> counted wrong
            continue;
        }
        bool predicted = scorer(t) > it->second;
        if (predicted == (t.label == TripleLabel::Positive)) {
            ++correct;
            ++slot.correct;
        }
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    return result;
}

namespace {

std::vector<double> pair_difference(const std::pair<Index, Index>& p, const EmbeddingTable& t) {
    auto a = t.row(p.first);
    auto b = t.row(p.second);
    std::vector<double> diff(t.dim());
    for (std::size_t k = 0; k < t.dim(); ++k) diff[k] = b[k] - a[k];
    return diff;
}

}  // namespace

MaxDiffPrediction analogy_maxdiff(const AnalogyQuestion& q, const EmbeddingTable& table) {
    if (q.prototypes.empty()) throw InputError("analogy_maxdiff: no prototype pairs");
    if (q.candidates.empty()) throw InputError("analogy_maxdiff: no candidate pairs");
    std::vector<double> proto(table.dim(), 0.0);
    for (const auto& p : q.prototypes) {
        std::vector<double> diff = pair_difference(p, table);
        for (std::size_t k = 0; k < table.dim(); ++k) proto[k] += diff[k];
    }
    for (double& x : proto) x /= static_cast<double>(q.prototypes.size());
    if (l2_norm(proto) == 0.0) throw InputError("analogy_maxdiff: zero-norm prototype vector");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    MaxDiffPrediction out;
    double best_most = -kInf, best_least = kInf;
    bool have_most = false, have_least = false;
    for (std::size_t c = 0; c < q.candidates.size(); ++c) {
        std::vector<double> diff = pair_difference(q.candidates[c], table);
        double score_most, score_least;
        if (l2_norm(diff) == 0.0) {
            out.degenerate_candidates = true;
            score_most = -kInf;
            score_least = kInf;
        } else {
            score_most = score_least = cosine_similarity(proto, diff);
        }
        if (!have_most || score_most > best_most) {
            best_most = score_most;
            out.most = static_cast<int>(c);
            have_most = true;
        }
        if (!have_least || score_least < best_least) {
            best_least = score_least;
            out.least = static_cast<int>(c);
            have_least = true;
        }
    }
    return out;
}

double maxdiff_accuracy(const std::vector<AnalogyQuestion>& questions,
                        const EmbeddingTable& table) {
    if (questions.empty()) return 0.0;
    double total = 0.0;
    for (const AnalogyQuestion& q : questions) {
        if (!q.gold_most || !q.gold_least)
            throw InputError("maxdiff_accuracy: question lacks gold labels");
        MaxDiffPrediction pred = analogy_maxdiff(q, table);
        double hits = 0.0;
        if (pred.most == *q.gold_most) hits += 1.0;
        if (pred.least == *q.gold_least) hits += 1.0;
        total += hits / 2.0;
    }
    return total / static_cast<double>(questions.size());
}

std::vector<std::pair<Index, double>> nearest_neighbors(Index word, const EmbeddingTable& table,
                                                        std::size_t k) {
    if (word < 0 || static_cast<std::size_t>(word) >= table.rows())
        throw InputError("nearest_neighbors: word id out of range");
    if (k < 1) throw InputError("nearest_neighbors: k must be positive");
    auto query = table.row(word);
    if (l2_norm(query) == 0.0) throw InputError("nearest_neighbors: zero-norm query embedding");
    std::vector<std::pair<Index, double>> scored;
    scored.reserve(table.rows());
    for (Index i = 0; i < static_cast<Index>(table.rows()); ++i) {
        if (i == word) continue;
        auto row = table.row(i);
        double c = l2_norm(row) == 0.0 ? -std::numeric_limits<double>::infinity()
                                       : cosine_similarity(query, row);
        scored.emplace_back(i, c);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

}  // namespace admm_embed
