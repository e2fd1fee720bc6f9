#pragma once

#include <functional>
#include <optional>

#include "admm_embed/config.hpp"
#include "admm_embed/distributional.hpp"
#include "admm_embed/penalty.hpp"
#include "admm_embed/relational.hpp"

namespace admm_embed {

struct MetricsRow {
    std::size_t iter = 0;
    double loss_nlm = 0.0;
    double loss_rel = 0.0;
    double loss_penalty = 0.0;
    double mean_residual = 0.0;
};

// Everything a run owns: both embedding tables, duals, parameter bundles,
// and the append-only metric history.
struct AdmmState {
    RunConfig config;
    Vocabulary corpus_vocab;
    Vocabulary rel_vocab;
    RelationRegistry relations;
    JointVocabulary joint;

    std::optional<EmbeddingTable> w;
    std::optional<EmbeddingTable> v;
    std::optional<EmbeddingTable> y;
    std::optional<NlmParams> nlm;
    GdParams gd;
    std::optional<TransEParams> transe;
    std::optional<NtnParams> ntn;

    std::size_t iteration = 0;
    std::vector<MetricsRow> history;

    PenaltyContext penalty_context();
};

// Training inputs; pointers must outlive the trainer. Which ones are
// required depends on the mode.
struct TrainingData {
    const NgramCorpus* corpus = nullptr;
    const WordGraph* graph = nullptr;
    const std::vector<RelationTriple>* triples = nullptr;
};

// Raised when a table or parameter bundle goes non-finite; message names
// the iteration and ADMM step.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class AdmmTrainer {
public:
    AdmmTrainer(const RunConfig& config, Vocabulary corpus_vocab, Vocabulary rel_vocab,
                RelationRegistry relations, TrainingData data);

    // One ADMM iteration: step (1) distributional SGD, step (2) relational
    // SGD, step (3) dual update, then a metrics row.
    void iterate();

    // Runs to the configured iteration count, stopping early once the mean
    // residual stays under the threshold for the configured patience.
    void run(const std::function<void(const MetricsRow&)>& on_iteration = {});

    AdmmState& state() { return state_; }
    const AdmmState& state() const { return state_; }

private:
    std::vector<Ngram> sample_ngram_batch();
    std::vector<GdPair> sample_gd_batch();
    void check_finite(const char* step) const;

    AdmmState state_;
    TrainingData data_;
    Rng dist_rng_;
    Rng rel_rng_;
    std::vector<Index> gd_words_;  // words with synsets, sampling pool
};

}  // namespace admm_embed
