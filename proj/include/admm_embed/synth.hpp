#pragma once

#include <cstdint>
#include <string>

#include "admm_embed/core.hpp"

namespace admm_embed {

// Desk-scale synthetic data: a latent-class bigram corpus, a tree-plus-
// shortcuts synset graph, and planted-structure relation triples whose
// positives follow a cluster-pair rule.
struct SynthConfig {
    std::uint64_t seed = 7;

    std::size_t vocab_size = 100;
    std::size_t sentences = 600;
    std::size_t sentence_length = 12;
    std::size_t word_classes = 5;

    std::size_t synsets = 50;
    std::size_t shortcut_edges = 5;

    std::size_t entities = 200;
    std::size_t relations = 4;
    std::size_t entity_clusters = 5;
    std::size_t train_triples = 2000;
    std::size_t dev_triples = 400;
    std::size_t test_triples = 400;
};

struct SynthPaths {
    std::string corpus;
    std::string graph;
    std::string triples_train;
    std::string triples_dev;
    std::string triples_test;
};

// Writes corpus.txt, graph.txt and triples_{train,dev,test}.tsv under
// `out_dir`; train/dev/test triple sets are pairwise disjoint.
SynthPaths make_synthetic(const SynthConfig& config, const std::string& out_dir);

}  // namespace admm_embed
