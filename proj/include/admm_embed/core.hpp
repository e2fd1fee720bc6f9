#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace admm_embed {

using Index = std::int32_t;

// Thrown when an input violates an operation's precondition (zero-norm
// vector, unknown word, unregistered relation, ...).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on inconsistent dimensions or invalid configuration values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered set of unique tokens with token -> id lookup.
class Vocabulary {
public:
    Index add(const std::string& token);
    std::optional<Index> lookup(const std::string& token) const;
    bool contains(const std::string& token) const { return lookup(token).has_value(); }
    const std::string& word(Index id) const { return words_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, Index> index_;
};

struct SharedWord {
    Index corpus_id;
    Index relational_id;
};

// Words present in both vocabularies, with the cross-mapping in both
// directions. Joint index = position in `shared`.
struct JointVocabulary {
    std::vector<SharedWord> shared;
    std::unordered_map<Index, std::size_t> by_corpus;
    std::unordered_map<Index, std::size_t> by_relational;

    std::size_t size() const { return shared.size(); }
};

JointVocabulary build_joint_vocabulary(const Vocabulary& corpus, const Vocabulary& relational);

enum class TableRole { DistributionalW, RelationalV, DualY };

const char* table_role_name(TableRole role);
std::optional<TableRole> table_role_from_name(const std::string& name);

// Dense row-major matrix of per-word vectors. Training arithmetic is
// float64; checkpoints truncate to float32 on write.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t rows, std::size_t dim, TableRole role);

    std::size_t rows() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    TableRole role() const { return role_; }

    std::span<double> row(Index i);
    std::span<const double> row(Index i) const;

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

private:
    std::size_t dim_ = 0;
    TableRole role_ = TableRole::DistributionalW;
    std::vector<double> data_;
};

// Seeded generator: identical seed, identical draw sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    Index uniform_index(Index n);
    // Uniform integer in [0, n) excluding `skip`; requires n >= 2.
    Index uniform_index_excluding(Index n, Index skip);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

double cosine_similarity(std::span<const double> x, std::span<const double> y);

// Uniform entries in [-scale, +scale]; dual tables start at zero.
EmbeddingTable init_table(std::size_t vocab_size, std::size_t dim, TableRole role, Rng& rng,
                          double scale);

double dot(std::span<const double> x, std::span<const double> y);
double l2_norm(std::span<const double> x);
inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace admm_embed
