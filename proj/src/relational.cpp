#include "admm_embed/relational.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace admm_embed {

int WordGraph::add_synset(const std::string& name) {
    auto it = synset_index_.find(name);
    if (it != synset_index_.end()) return it->second;
    int id = static_cast<int>(synset_names_.size());
    synset_names_.push_back(name);
    synset_index_.emplace(name, id);
    adjacency_.emplace_back();
    depth_.reset();
    return id;
}

std::optional<int> WordGraph::lookup_synset(const std::string& name) const {
    auto it = synset_index_.find(name);
    if (it == synset_index_.end()) return std::nullopt;
    return it->second;
}

void WordGraph::add_edge(int s, int t) {
    if (s < 0 || t < 0 || s >= static_cast<int>(adjacency_.size()) ||
        t >= static_cast<int>(adjacency_.size()))
        throw InputError("add_edge: unknown synset id");
    if (s == t) return;
    adjacency_[static_cast<std::size_t>(s)].push_back(t);
    adjacency_[static_cast<std::size_t>(t)].push_back(s);
    depth_.reset();
}

void WordGraph::add_membership(Index word, int synset) {
    if (synset < 0 || synset >= static_cast<int>(adjacency_.size()))
        throw InputError("add_membership: unknown synset id");
    membership_[word].push_back(synset);
}

const std::vector<int>& WordGraph::neighbors(int s) const {
    if (s < 0 || s >= static_cast<int>(adjacency_.size()))
        throw InputError("neighbors: unknown synset id");
    return adjacency_[static_cast<std::size_t>(s)];
}

const std::vector<int>* WordGraph::synsets_of(Index word) const {
    auto it = membership_.find(word);
    return it == membership_.end() ? nullptr : &it->second;
}

std::vector<Index> WordGraph::words_with_synsets() const {
    std::vector<Index> out;
    out.reserve(membership_.size());
    for (const auto& [word, synsets] : membership_)
        if (!synsets.empty()) out.push_back(word);
    std::sort(out.begin(), out.end());
    return out;
}

void WordGraph::set_depth(int depth) {
    if (depth < 1) throw InputError("taxonomy depth must be positive");
    depth_ = depth;
}

namespace {

// Distances from a source set to every node; -1 = unreachable.
std::vector<int> bfs_from(const std::vector<std::vector<int>>& adj, std::span<const int> sources) {
    std::vector<int> dist(adj.size(), -1);
    std::deque<int> queue;
    for (int s : sources) {
        if (dist[static_cast<std::size_t>(s)] == 0) continue;
        dist[static_cast<std::size_t>(s)] = 0;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int nb : adj[static_cast<std::size_t>(cur)]) {
            if (dist[static_cast<std::size_t>(nb)] >= 0) continue;
            dist[static_cast<std::size_t>(nb)] = dist[static_cast<std::size_t>(cur)] + 1;
            queue.push_back(nb);
        }
    }
    return dist;
}

}  // namespace

int WordGraph::depth() const {
    if (depth_) return *depth_;
    // Half the graph diameter, computed per component.
    int diameter = 0;
    for (int s = 0; s < static_cast<int>(adjacency_.size()); ++s) {
        int src[1] = {s};
        for (int d : bfs_from(adjacency_, src)) diameter = std::max(diameter, d);
    }
    depth_ = std::max(1, (diameter + 1) / 2);
    return *depth_;
}

std::optional<int> shortest_path(const WordGraph& graph, int s, int t) {
    if (s < 0 || t < 0 || s >= static_cast<int>(graph.synset_count()) ||
        t >= static_cast<int>(graph.synset_count()))
        throw InputError("shortest_path: unknown synset id");
    if (s == t) return 0;
    std::vector<std::vector<int>> adj(graph.synset_count());
    for (int n = 0; n < static_cast<int>(graph.synset_count()); ++n) adj[static_cast<std::size_t>(n)] = graph.neighbors(n);
    int src[1] = {s};
    int d = bfs_from(adj, src)[static_cast<std::size_t>(t)];
    if (d < 0) return std::nullopt;
    return d;
}

double word_sim(const WordGraph& graph, Index i, Index j) {
    const std::vector<int>* si = graph.synsets_of(i);
    const std::vector<int>* sj = graph.synsets_of(j);
    if (si == nullptr || sj == nullptr) throw InputError("word_sim: word has no synset");
    std::vector<std::vector<int>> adj(graph.synset_count());
    for (int n = 0; n < static_cast<int>(graph.synset_count()); ++n) adj[static_cast<std::size_t>(n)] = graph.neighbors(n);
    std::vector<int> dist = bfs_from(adj, *si);
    int best = -1;
    for (int t : *sj) {
        int d = dist[static_cast<std::size_t>(t)];
        if (d >= 0 && (best < 0 || d < best)) best = d;
    }
    if (best < 0) return 0.0;  // disconnected
    double sim = 1.0 - static_cast<double>(best) / (2.0 * graph.depth());
    return std::clamp(sim, 0.0, 1.0);
}

GdGradients loss_gd(Index i, Index j, const EmbeddingTable& v, const GdParams& p, double sim) {
    auto vi = v.row(i);
    auto vj = v.row(j);
    double ni = l2_norm(vi);
    double nj = l2_norm(vj);
    if (ni == 0.0 || nj == 0.0) throw InputError("loss_gd: zero-norm embedding");
    double c = dot(vi, vj) / (ni * nj);
    double target = p.a * sim + p.b;
    double e = c - target;
    GdGradients g;
    g.loss = e * e;
    g.da = -2.0 * e * sim;
    g.db = -2.0 * e;
    g.vi.resize(v.dim());
    g.vj.resize(v.dim());
    for (std::size_t k = 0; k < v.dim(); ++k) {
        double dci = vj[k] / (ni * nj) - c * vi[k] / (ni * ni);
        double dcj = vi[k] / (ni * nj) - c * vj[k] / (nj * nj);
        g.vi[k] = 2.0 * e * dci;
        g.vj[k] = 2.0 * e * dcj;
    }
    return g;
}

int RelationRegistry::add(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    names_.push_back(name);
    index_.emplace(name, id);
    return id;
}

std::optional<int> RelationRegistry::lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TransEParams TransEParams::init(std::size_t relations, std::size_t d, Rng& rng, double scale) {
    TransEParams p;
    p.d = d;
    p.translations.resize(relations);
    for (auto& vec : p.translations) {
        vec.resize(d);
        for (double& x : vec) x = rng.uniform(-scale, scale);
    }
    return p;
}

bool TransEParams::all_finite() const {
    for (const auto& vec : translations)
        for (double x : vec)
            if (!std::isfinite(x)) return false;
    return true;
}

NtnParams NtnParams::init(std::size_t relations, std::size_t d, std::size_t h, Rng& rng,
                          double scale) {
    NtnParams p;
    p.d = d;
    p.h = h;
    p.W.resize(relations);
    p.V.resize(relations);
    p.bias.resize(relations);
    for (std::size_t r = 0; r < relations; ++r) {
        p.W[r].resize(h * d * d);
        p.V[r].resize(h * 2 * d);
        p.bias[r].resize(h);
        for (double& x : p.W[r]) x = rng.uniform(-scale, scale);
        for (double& x : p.V[r]) x = rng.uniform(-scale, scale);
        for (double& x : p.bias[r]) x = rng.uniform(-scale, scale);
    }
    p.U.resize(h);
    for (double& x : p.U) x = rng.uniform(-scale, scale);
    return p;
}

bool NtnParams::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    for (const auto& t : W)
        if (!ok(t)) return false;
    for (const auto& t : V)
        if (!ok(t)) return false;
    for (const auto& t : bias)
        if (!ok(t)) return false;
    return ok(U);
}

double score_transe(const RelationTriple& t, const EmbeddingTable& v, const TransEParams& p) {
    if (t.relation < 0 || t.relation >= static_cast<int>(p.translations.size()))
        throw InputError("score_transe: unregistered relation");
    auto vl = v.row(t.left);
    auto vr = v.row(t.right);
    const auto& rel = p.translations[static_cast<std::size_t>(t.relation)];
    double sq = 0.0;
    for (std::size_t k = 0; k < p.d; ++k) {
        double diff = vl[k] + rel[k] - vr[k];
        sq += diff * diff;
    }
    return -std::sqrt(sq);
}

namespace {

struct NtnForward {
    std::vector<double> act;  // h
    double score = 0.0;
};

NtnForward ntn_forward(const RelationTriple& t, const EmbeddingTable& v, const NtnParams& p) {
    if (t.relation < 0 || t.relation >= static_cast<int>(p.W.size()))
        throw InputError("score_ntn: unregistered relation");
    if (v.dim() != p.d) throw ConfigError("score_ntn: embedding dim inconsistent with params");
    auto vl = v.row(t.left);
    auto vr = v.row(t.right);
    const std::size_t r = static_cast<std::size_t>(t.relation);
    NtnForward f;
    f.act.resize(p.h);
    for (std::size_t k = 0; k < p.h; ++k) {
        double z = p.bias[r][k];
        const double* slice = p.W[r].data() + k * p.d * p.d;
        for (std::size_t a = 0; a < p.d; ++a)
            for (std::size_t b = 0; b < p.d; ++b) z += vl[a] * slice[a * p.d + b] * vr[b];
        const double* vrow = p.V[r].data() + k * 2 * p.d;
        for (std::size_t a = 0; a < p.d; ++a) z += vrow[a] * vl[a] + vrow[p.d + a] * vr[a];
        f.act[k] = sigmoid(z);
        f.score += p.U[k] * f.act[k];
    }
    return f;
}

std::vector<double>& touch(std::unordered_map<Index, std::vector<double>>& map, Index id,
                           std::size_t len) {
    return map.try_emplace(id, len, 0.0).first->second;
}

std::vector<double>& touch_rel(std::unordered_map<int, std::vector<double>>& map, int id,
                               std::size_t len) {
    return map.try_emplace(id, len, 0.0).first->second;
}

// sign * d score_transe / d (vl, vr, R)
void accumulate_transe_grad(const RelationTriple& t, const EmbeddingTable& v,
                            const TransEParams& p, double sign, TransEGradients& out) {
    auto vl = v.row(t.left);
    auto vr = v.row(t.right);
    const auto& rel = p.translations[static_cast<std::size_t>(t.relation)];
    std::vector<double> diff(p.d);
    double sq = 0.0;
    for (std::size_t k = 0; k < p.d; ++k) {
        diff[k] = vl[k] + rel[k] - vr[k];
        sq += diff[k] * diff[k];
    }
    double norm = std::sqrt(sq);
    if (norm < 1e-12) return;  // score gradient undefined at the cusp
    auto& gl = touch(out.v_rows, t.left, p.d);
    auto& gr = touch(out.v_rows, t.right, p.d);
    auto& grel = touch_rel(out.relation, t.relation, p.d);
    for (std::size_t k = 0; k < p.d; ++k) {
        double ds = -diff[k] / norm;  // d score / d vl[k]
        gl[k] += sign * ds;
        grel[k] += sign * ds;
        gr[k] -= sign * ds;
    }
}

// sign * d score_ntn / d (vl, vr, W, V, b, U)
void accumulate_ntn_grad(const RelationTriple& t, const EmbeddingTable& v, const NtnParams& p,
                         double sign, NtnGradients& out) {
    NtnForward f = ntn_forward(t, v, p);
    auto vl = v.row(t.left);
    auto vr = v.row(t.right);
    const std::size_t r = static_cast<std::size_t>(t.relation);
    auto& gl = touch(out.v_rows, t.left, p.d);
    auto& gr = touch(out.v_rows, t.right, p.d);
    auto& gW = touch_rel(out.W, t.relation, p.h * p.d * p.d);
    auto& gV = touch_rel(out.V, t.relation, p.h * 2 * p.d);
    auto& gb = touch_rel(out.bias, t.relation, p.h);
    for (std::size_t k = 0; k < p.h; ++k) {
        out.U[k] += sign * f.act[k];
        double dz = sign * p.U[k] * f.act[k] * (1.0 - f.act[k]);
        gb[k] += dz;
        const double* slice = p.W[r].data() + k * p.d * p.d;
        double* gslice = gW.data() + k * p.d * p.d;
        const double* vrow = p.V[r].data() + k * 2 * p.d;
        double* gvrow = gV.data() + k * 2 * p.d;
        for (std::size_t a = 0; a < p.d; ++a) {
            for (std::size_t b = 0; b < p.d; ++b) {
                gslice[a * p.d + b] += dz * vl[a] * vr[b];
                gl[a] += dz * slice[a * p.d + b] * vr[b];
                gr[b] += dz * vl[a] * slice[a * p.d + b];
            }
            gvrow[a] += dz * vl[a];
            gvrow[p.d + a] += dz * vr[a];
            gl[a] += dz * vrow[a];
            gr[a] += dz * vrow[p.d + a];
        }
    }
}

}  // namespace

double score_ntn(const RelationTriple& t, const EmbeddingTable& v, const NtnParams& p) {
    return ntn_forward(t, v, p).score;
}

RelationTriple corrupt_triple(const RelationTriple& t, std::size_t vocab_size, Rng& rng) {
    if (vocab_size < 2) throw InputError("corrupt_triple: vocabulary too small to corrupt");
    RelationTriple out = t;
    bool corrupt_left = rng.uniform_index(2) == 0;
    if (corrupt_left)
        out.left = rng.uniform_index_excluding(static_cast<Index>(vocab_size), t.left);
    else
        out.right = rng.uniform_index_excluding(static_cast<Index>(vocab_size), t.right);
    return out;
}

TransEGradients transe_hinge_gradients(const RelationTriple& pos, const RelationTriple& neg,
                                       const EmbeddingTable& v, const TransEParams& p) {
    TransEGradients g;
    double sp = score_transe(pos, v, p);
    double sn = score_transe(neg, v, p);
    double m = 1.0 - sp + sn;
    g.loss = m > 0.0 ? m : 0.0;
    if (m <= 0.0) return g;
    accumulate_transe_grad(pos, v, p, -1.0, g);
    accumulate_transe_grad(neg, v, p, +1.0, g);
    return g;
}

NtnGradients ntn_hinge_gradients(const RelationTriple& pos, const RelationTriple& neg,
                                 const EmbeddingTable& v, const NtnParams& p) {
    NtnGradients g;
    g.U.assign(p.h, 0.0);
    double sp = score_ntn(pos, v, p);
    double sn = score_ntn(neg, v, p);
    double m = 1.0 - sp + sn;
    g.loss = m > 0.0 ? m : 0.0;
    if (m <= 0.0) return g;
    accumulate_ntn_grad(pos, v, p, -1.0, g);
    accumulate_ntn_grad(neg, v, p, +1.0, g);
    return g;
}

double gd_sgd_step(const std::vector<GdPair>& batch, EmbeddingTable& v, GdParams& p, double lr,
                   const PenaltyContext* penalty) {
    if (lr < 0.0) throw ConfigError("learning rate must be non-negative");
    double total = 0.0;
    std::vector<double> pgrad(v.dim());
    for (const GdPair& pair : batch) {
        GdGradients g = loss_gd(pair.i, pair.j, v, p, pair.sim);
        total += g.loss;
        auto rowi = v.row(pair.i);
        auto rowj = v.row(pair.j);
        for (std::size_t k = 0; k < v.dim(); ++k) {
            rowi[k] -= lr * g.vi[k];
            rowj[k] -= lr * g.vj[k];
        }
        p.a -= lr * g.da;
        p.b -= lr * g.db;
        if (penalty != nullptr) {
            for (Index id : {pair.i, pair.j}) {
                if (penalty_grad_v_row(*penalty, id, pgrad)) {
                    auto row = v.row(id);
                    for (std::size_t k = 0; k < v.dim(); ++k) row[k] -= lr * pgrad[k];
                }
                if (pair.i == pair.j) break;  // single distinct row
            }
        }
    }
    return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

double triple_sgd_step(const std::vector<RelationTriple>& batch, EmbeddingTable& v,
                       TransEParams* transe, NtnParams* ntn, RelationalObjective objective,
                       double lr, const PenaltyContext* penalty, Rng& rng) {
    if (lr < 0.0) throw ConfigError("learning rate must be non-negative");
    double total = 0.0;
    std::vector<double> pgrad(v.dim());
    auto apply_penalty = [&](const std::unordered_map<Index, std::vector<double>>& touched) {
        if (penalty == nullptr) return;
        for (const auto& [id, unused] : touched) {
            if (penalty_grad_v_row(*penalty, id, pgrad)) {
                auto row = v.row(id);
                for (std::size_t k = 0; k < v.dim(); ++k) row[k] -= lr * pgrad[k];
            }
        }
    };
    for (const RelationTriple& pos : batch) {
        RelationTriple neg = corrupt_triple(pos, v.rows(), rng);
        if (objective == RelationalObjective::TransE) {
            TransEGradients g = transe_hinge_gradients(pos, neg, v, *transe);
            total += g.loss;
            // Rows touched by either triple get the penalty even on a flat hinge.
            touch(g.v_rows, pos.left, v.dim());
            touch(g.v_rows, pos.right, v.dim());
            touch(g.v_rows, neg.left, v.dim());
            touch(g.v_rows, neg.right, v.dim());
            for (const auto& [id, grad] : g.v_rows) {
                auto row = v.row(id);
                for (std::size_t k = 0; k < v.dim(); ++k) row[k] -= lr * grad[k];
            }
            for (const auto& [rel, grad] : g.relation) {
                auto& vec = transe->translations[static_cast<std::size_t>(rel)];
                for (std::size_t k = 0; k < vec.size(); ++k) vec[k] -= lr * grad[k];
            }
            apply_penalty(g.v_rows);
        } else if (objective == RelationalObjective::Ntn) {
            NtnGradients g = ntn_hinge_gradients(pos, neg, v, *ntn);
            total += g.loss;
            touch(g.v_rows, pos.left, v.dim());
            touch(g.v_rows, pos.right, v.dim());
            touch(g.v_rows, neg.left, v.dim());
            touch(g.v_rows, neg.right, v.dim());
            for (const auto& [id, grad] : g.v_rows) {
                auto row = v.row(id);
                for (std::size_t k = 0; k < v.dim(); ++k) row[k] -= lr * grad[k];
            }
            for (const auto& [rel, grad] : g.W) {
                auto& t = ntn->W[static_cast<std::size_t>(rel)];
                for (std::size_t k = 0; k < t.size(); ++k) t[k] -= lr * grad[k];
            }
            for (const auto& [rel, grad] : g.V) {
                auto& t = ntn->V[static_cast<std::size_t>(rel)];
                for (std::size_t k = 0; k < t.size(); ++k) t[k] -= lr * grad[k];
            }
            for (const auto& [rel, grad] : g.bias) {
                auto& t = ntn->bias[static_cast<std::size_t>(rel)];
                for (std::size_t k = 0; k < t.size(); ++k) t[k] -= lr * grad[k];
            }
            for (std::size_t k = 0; k < ntn->U.size(); ++k) ntn->U[k] -= lr * g.U[k];
            apply_penalty(g.v_rows);
        } else {
            throw ConfigError("triple_sgd_step: objective must be TransE or NTN");
        }
    }
    return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

}  // namespace admm_embed
