#include "admm_embed/core.hpp"

#include <algorithm>
#include <cmath>

namespace admm_embed {

Index Vocabulary::add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    Index id = static_cast<Index>(words_.size());
    words_.push_back(token);
    index_.emplace(token, id);
    return id;
}

std::optional<Index> Vocabulary::lookup(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

JointVocabulary build_joint_vocabulary(const Vocabulary& corpus, const Vocabulary& relational) {
    JointVocabulary joint;
    for (Index cid = 0; cid < static_cast<Index>(corpus.size()); ++cid) {
        auto rid = relational.lookup(corpus.word(cid));
        if (!rid) continue;
        joint.by_corpus.emplace(cid, joint.shared.size());
        joint.by_relational.emplace(*rid, joint.shared.size());
        joint.shared.push_back({cid, *rid});
    }
    return joint;
}

const char* table_role_name(TableRole role) {
    switch (role) {
        case TableRole::DistributionalW: return "distributional-w";
        case TableRole::RelationalV: return "relational-v";
        case TableRole::DualY: return "dual-y";
    }
    return "?";
}

std::optional<TableRole> table_role_from_name(const std::string& name) {
    if (name == "distributional-w") return TableRole::DistributionalW;
    if (name == "relational-v") return TableRole::RelationalV;
    if (name == "dual-y") return TableRole::DualY;
    return std::nullopt;
}

EmbeddingTable::EmbeddingTable(std::size_t rows, std::size_t dim, TableRole role)
    : dim_(dim), role_(role), data_(rows * dim, 0.0) {
    if (dim == 0) throw ConfigError("embedding dimension must be positive");
}

std::span<double> EmbeddingTable::row(Index i) {
    return {data_.data() + static_cast<std::size_t>(i) * dim_, dim_};
}

std::span<const double> EmbeddingTable::row(Index i) const {
    return {data_.data() + static_cast<std::size_t>(i) * dim_, dim_};
}

bool EmbeddingTable::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

Index Rng::uniform_index(Index n) {
    return std::uniform_int_distribution<Index>(0, n - 1)(engine_);
}

Index Rng::uniform_index_excluding(Index n, Index skip) {
    if (n < 2) throw InputError("need at least 2 candidates to draw a replacement");
    Index draw = std::uniform_int_distribution<Index>(0, n - 2)(engine_);
    return draw >= skip ? draw + 1 : draw;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
    return s;
}

double l2_norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty())
        throw InputError("cosine_similarity: vectors must be nonempty and equal length");
    double nx = l2_norm(x);
    double ny = l2_norm(y);
    if (nx == 0.0 || ny == 0.0) throw InputError("cosine_similarity: zero-norm input");
    double c = dot(x, y) / (nx * ny);
    return std::clamp(c, -1.0, 1.0);
}

EmbeddingTable init_table(std::size_t vocab_size, std::size_t dim, TableRole role, Rng& rng,
                          double scale) {
    if (scale <= 0.0) throw ConfigError("init scale must be positive");
    EmbeddingTable table(vocab_size, dim, role);
    if (role == TableRole::DualY) return table;  // duals start at zero
    for (double& x : table.data()) x = rng.uniform(-scale, scale);
    return table;
}

}  // namespace admm_embed
