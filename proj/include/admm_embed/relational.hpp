#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "admm_embed/core.hpp"
#include "admm_embed/penalty.hpp"

namespace admm_embed {

// Undirected synset graph with word -> synset membership.
class WordGraph {
public:
    int add_synset(const std::string& name);
    std::optional<int> lookup_synset(const std::string& name) const;
    void add_edge(int s, int t);
    void add_membership(Index word, int synset);

    std::size_t synset_count() const { return adjacency_.size(); }
    const std::vector<int>& neighbors(int s) const;
    const std::vector<int>* synsets_of(Index word) const;
    std::vector<Index> words_with_synsets() const;

    void set_depth(int depth);
    // Lazily computed from graph eccentricities when not set explicitly.
    int depth() const;

private:
    std::vector<std::string> synset_names_;
    std::unordered_map<std::string, int> synset_index_;
    std::vector<std::vector<int>> adjacency_;
    std::unordered_map<Index, std::vector<int>> membership_;
    mutable std::optional<int> depth_;
};

// BFS edge count; nullopt when disconnected.
std::optional<int> shortest_path(const WordGraph& graph, int s, int t);

// 1 - L/(2D) clamped to [0,1], L the min synset-pair distance; 0 when
// every synset pair is disconnected.
double word_sim(const WordGraph& graph, Index i, Index j);

struct GdParams {
    double a = 1.0;
    double b = 0.0;
};

struct GdPair {
    Index i;
    Index j;
    double sim;
};

struct GdGradients {
    double loss = 0.0;
    std::vector<double> vi, vj;  // zero-length when i == j is folded into vi
    double da = 0.0, db = 0.0;
};

// L = (cos(v_i, v_j) - (a*sim + b))^2 with analytic gradients.
GdGradients loss_gd(Index i, Index j, const EmbeddingTable& v, const GdParams& p, double sim);

class RelationRegistry {
public:
    int add(const std::string& name);
    std::optional<int> lookup(const std::string& name) const;
    const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

enum class TripleLabel : std::int8_t { Negative = 0, Positive = 1, Unlabeled = -1 };

struct RelationTriple {
    Index left;
    int relation;
    Index right;
    TripleLabel label = TripleLabel::Unlabeled;
};

// One translation vector per relation.
struct TransEParams {
    std::size_t d = 0;
    std::vector<std::vector<double>> translations;

    static TransEParams init(std::size_t relations, std::size_t d, Rng& rng, double scale);
    bool all_finite() const;
};

// Per-relation tensor W (h slices of d x d), V (h x 2d), bias (h); shared
// output vector U (h).
struct NtnParams {
    std::size_t d = 0;
    std::size_t h = 0;
    std::vector<std::vector<double>> W;     // per relation, h*d*d (slice-major)
    std::vector<std::vector<double>> V;     // per relation, h x 2d row-major
    std::vector<std::vector<double>> bias;  // per relation, h
    std::vector<double> U;                  // h

    static NtnParams init(std::size_t relations, std::size_t d, std::size_t h, Rng& rng,
                          double scale);
    bool all_finite() const;
};

// -||v_l + R - v_r||_2
double score_transe(const RelationTriple& t, const EmbeddingTable& v, const TransEParams& p);

// U' sigmoid(v_l' W_R v_r + V_R [v_l; v_r] + b_R)
double score_ntn(const RelationTriple& t, const EmbeddingTable& v, const NtnParams& p);

// Replaces the left or right slot (uniform choice) with a uniform word
// id != the original; relation unchanged.
RelationTriple corrupt_triple(const RelationTriple& t, std::size_t vocab_size, Rng& rng);

enum class RelationalObjective { GraphDistance, TransE, Ntn };

// Squared-error SGD over word pairs; penalty gradient added to the two
// touched v rows when present. Returns mean loss.
double gd_sgd_step(const std::vector<GdPair>& batch, EmbeddingTable& v, GdParams& p, double lr,
                   const PenaltyContext* penalty);

// Hinge-loss SGD over triples (one corruption per positive); objective
// selects TransE or NTN. Returns mean loss.
double triple_sgd_step(const std::vector<RelationTriple>& batch, EmbeddingTable& v,
                       TransEParams* transe, NtnParams* ntn, RelationalObjective objective,
                       double lr, const PenaltyContext* penalty, Rng& rng);

// Gradient bundles used by the SGD steps and the gradient-check tests.
struct TransEGradients {
    double loss = 0.0;
    std::unordered_map<Index, std::vector<double>> v_rows;
    std::unordered_map<int, std::vector<double>> relation;  // d R
};
TransEGradients transe_hinge_gradients(const RelationTriple& pos, const RelationTriple& neg,
                                       const EmbeddingTable& v, const TransEParams& p);

struct NtnGradients {
    double loss = 0.0;
    std::unordered_map<Index, std::vector<double>> v_rows;
    std::unordered_map<int, std::vector<double>> W, V, bias;
    std::vector<double> U;
};
NtnGradients ntn_hinge_gradients(const RelationTriple& pos, const RelationTriple& neg,
                                 const EmbeddingTable& v, const NtnParams& p);

}  // namespace admm_embed
