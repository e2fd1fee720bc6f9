#pragma once

#include <string>
#include <vector>

#include "admm_embed/admm.hpp"
#include "admm_embed/eval.hpp"

namespace admm_embed {

// Reserved out-of-vocabulary token on the corpus side.
inline constexpr const char* kUnkToken = "<unk>";

struct CorpusData {
    Vocabulary vocab;
    NgramCorpus ngrams;
};

// One pre-tokenized sentence per line; n-grams from a width-n sliding
// window. Vocabulary capped to the top `vocab_cap` tokens by frequency
// (0 = no cap); out-of-vocabulary tokens map to <unk>.
CorpusData load_corpus_text(const std::string& path, std::size_t n, std::size_t vocab_cap);

// token TAB ... TAB token TAB count, one n-gram per line.
CorpusData load_corpus_counts(const std::string& path, std::size_t n, std::size_t vocab_cap);

// Line-oriented graph file: S synset / E s t / M word synset / D depth.
// Words named in M lines are added to `vocab`.
WordGraph load_graph(const std::string& path, Vocabulary& vocab);

// left TAB relation TAB right TAB label, label in {1, 0}.
std::vector<RelationTriple> load_triples(const std::string& path, Vocabulary& vocab,
                                         RelationRegistry& relations);

// Same format, but every word must already be present; throws InputError
// reporting the missing-token count otherwise.
std::vector<RelationTriple> load_triples_strict(const std::string& path, const Vocabulary& vocab,
                                                RelationRegistry& relations);

// P w1 w2 prototype / Q question start / C w1 w2 [most|least] candidate.
std::vector<AnalogyQuestion> load_analogy(const std::string& path, const Vocabulary& vocab);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& history);

// Header "admm-embed v1 TAB role TAB rows TAB dim" + little-endian f32
// values, row-major.
void write_tensor_file(const std::string& path, const std::string& role, std::size_t rows,
                       std::size_t dim, std::span<const double> values);

struct TensorFile {
    std::string role;
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> values;
};
TensorFile read_tensor_file(const std::string& path);

void save_checkpoint(const std::string& dir, const AdmmState& state);
AdmmState load_checkpoint(const std::string& dir);

}  // namespace admm_embed
