#include "admm_embed/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>
#include <vector>

namespace fs = std::filesystem;

namespace admm_embed {

namespace {

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    return out;
}

void write_corpus(const SynthConfig& c, const std::string& path, Rng& rng) {
    std::ofstream out = open_out(path);
    const std::size_t classes = c.word_classes;
    // words of class k: ids k, k+classes, k+2*classes, ...
    std::vector<std::vector<std::size_t>> members(classes);
    for (std::size_t w = 0; w < c.vocab_size; ++w) members[w % classes].push_back(w);
    for (std::size_t s = 0; s < c.sentences; ++s) {
        std::size_t cls = static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(classes)));
        for (std::size_t pos = 0; pos < c.sentence_length; ++pos) {
            const auto& pool = members[cls];
            std::size_t w = pool[static_cast<std::size_t>(
                rng.uniform_index(static_cast<Index>(pool.size())))];
            out << numbered("w", w) << (pos + 1 == c.sentence_length ? '\n' : ' ');
            // mostly cyclic class transitions, occasionally a jump
            if (rng.uniform(0.0, 1.0) < 0.8)
                cls = (cls + 1) % classes;
            else
                cls = static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(classes)));
        }
    }
}

void write_graph(const SynthConfig& c, const std::string& path, Rng& rng) {
    std::ofstream out = open_out(path);
    for (std::size_t s = 0; s < c.synsets; ++s) out << "S\t" << numbered("s", s) << '\n';
    // random tree
    for (std::size_t s = 1; s < c.synsets; ++s) {
        std::size_t parent =
            static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(s)));
        out << "E\t" << numbered("s", parent) << '\t' << numbered("s", s) << '\n';
    }
    for (std::size_t e = 0; e < c.shortcut_edges; ++e) {
        std::size_t a = static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(c.synsets)));
        std::size_t b = static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(c.synsets)));
        if (a == b) continue;
        out << "E\t" << numbered("s", a) << '\t' << numbered("s", b) << '\n';
    }
    for (std::size_t w = 0; w < c.vocab_size; ++w)
        out << "M\t" << numbered("w", w) << '\t' << numbered("s", w % c.synsets) << '\n';
}

struct TripleKey {
    std::size_t left, relation, right;
    auto operator<=>(const TripleKey&) const = default;
};

void write_triples(const SynthConfig& c, const SynthPaths& paths, Rng& rng) {
    std::vector<std::size_t> cluster(c.entities);
    for (auto& cl : cluster)
        cl = static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(c.entity_clusters)));
    std::vector<std::vector<std::size_t>> by_cluster(c.entity_clusters);
    for (std::size_t e = 0; e < c.entities; ++e) by_cluster[cluster[e]].push_back(e);

    // relation r holds iff cluster(left) == r mod K and cluster(right) == (r+1) mod K
    auto rule_holds = [&](const TripleKey& t) {
        return cluster[t.left] == t.relation % c.entity_clusters &&
               cluster[t.right] == (t.relation + 1) % c.entity_clusters;
    };
    auto pick = [&](const std::vector<std::size_t>& pool) {
        return pool[static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(pool.size())))];
    };

    std::set<TripleKey> used;
    auto draw_positive = [&]() -> TripleKey {
        for (int attempt = 0; attempt < 100000; ++attempt) {
            std::size_t r = static_cast<std::size_t>(
                rng.uniform_index(static_cast<Index>(c.relations)));
            TripleKey t{pick(by_cluster[r % c.entity_clusters]), r,
                        pick(by_cluster[(r + 1) % c.entity_clusters])};
            if (used.insert(t).second) return t;
        }
        throw InputError("synthetic triples: ran out of distinct positive triples");
    };
    auto draw_negative = [&]() -> TripleKey {
        for (int attempt = 0; attempt < 100000; ++attempt) {
            TripleKey t{static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(c.entities))),
                        static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(c.relations))),
                        static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(c.entities)))};
            if (rule_holds(t)) continue;
            if (used.insert(t).second) return t;
        }
        throw InputError("synthetic triples: ran out of distinct negative triples");
    };
    auto emit = [&](std::ofstream& out, const TripleKey& t, int label) {
        out << numbered("e", t.left) << '\t' << numbered("r", t.relation) << '\t'
            << numbered("e", t.right) << '\t' << label << '\n';
    };

    std::ofstream train = open_out(paths.triples_train);
    for (std::size_t i = 0; i < c.train_triples; ++i) emit(train, draw_positive(), 1);
    for (const auto& [path, count] :
         {std::pair{paths.triples_dev, c.dev_triples}, {paths.triples_test, c.test_triples}}) {
        std::ofstream out = open_out(path);
        for (std::size_t i = 0; i < count; ++i) {
            if (i % 2 == 0) emit(out, draw_positive(), 1);
            else emit(out, draw_negative(), 0);
        }
    }
}

}  // namespace

SynthPaths make_synthetic(const SynthConfig& config, const std::string& out_dir) {
    if (config.vocab_size < 2 || config.entities < 2 || config.relations < 1 ||
        config.entity_clusters < 2 || config.synsets < 1)
        throw ConfigError("make_synthetic: sizes must be positive");
    fs::create_directories(out_dir);
    SynthPaths paths;
    paths.corpus = (fs::path(out_dir) / "corpus.txt").string();
    paths.graph = (fs::path(out_dir) / "graph.txt").string();
    paths.triples_train = (fs::path(out_dir) / "triples_train.tsv").string();
    paths.triples_dev = (fs::path(out_dir) / "triples_dev.tsv").string();
    paths.triples_test = (fs::path(out_dir) / "triples_test.tsv").string();
    Rng rng(config.seed);
    write_corpus(config, paths.corpus, rng);
    write_graph(config, paths.graph, rng);
    write_triples(config, paths, rng);
    return paths;
}

}  // namespace admm_embed
