#include "admm_embed/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace admm_embed {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

// Top tokens by (count desc, token asc); <unk> gets id 0.
Vocabulary build_capped_vocabulary(const std::unordered_map<std::string, std::uint64_t>& freq,
                                   std::size_t cap) {
    std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (cap > 0 && ranked.size() > cap) ranked.resize(cap);
    Vocabulary vocab;
    vocab.add(kUnkToken);
    for (const auto& [token, unused] : ranked) vocab.add(token);
    return vocab;
}

Index map_token(const Vocabulary& vocab, const std::string& token) {
    auto id = vocab.lookup(token);
    return id ? *id : *vocab.lookup(kUnkToken);
}

}  // namespace

CorpusData load_corpus_text(const std::string& path, std::size_t n, std::size_t vocab_cap) {
    if (n < 1) throw ConfigError("n-gram width must be positive");
    std::unordered_map<std::string, std::uint64_t> freq;
    {
        std::ifstream in = open_input(path);
        std::string token;
        while (in >> token) ++freq[token];
    }
    CorpusData data;
    data.vocab = build_capped_vocabulary(freq, vocab_cap);
    data.ngrams.n = n;
    std::ifstream in = open_input(path);
    std::string line;
    std::vector<Index> sentence;
    while (std::getline(in, line)) {
        sentence.clear();
        std::istringstream words(line);
        std::string token;
        while (words >> token) sentence.push_back(map_token(data.vocab, token));
        if (sentence.size() < n) continue;
        for (std::size_t start = 0; start + n <= sentence.size(); ++start)
            data.ngrams.ngrams.emplace_back(sentence.begin() + static_cast<std::ptrdiff_t>(start),
                                            sentence.begin() + static_cast<std::ptrdiff_t>(start + n));
    }
    return data;
}

CorpusData load_corpus_counts(const std::string& path, std::size_t n, std::size_t vocab_cap) {
    if (n < 1) throw ConfigError("n-gram width must be positive");
    std::unordered_map<std::string, std::uint64_t> freq;
    {
        std::ifstream in = open_input(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> fields = split_tabs(line);
            if (fields.size() != n + 1)
                throw InputError("n-gram count line has wrong field count: " + line);
            std::uint64_t count = std::stoull(fields.back());
            for (std::size_t k = 0; k < n; ++k) freq[fields[k]] += count;
        }
    }
    CorpusData data;
    data.vocab = build_capped_vocabulary(freq, vocab_cap);
    data.ngrams.n = n;
    std::ifstream in = open_input(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields = split_tabs(line);
        Ngram gram(n);
        for (std::size_t k = 0; k < n; ++k) gram[k] = map_token(data.vocab, fields[k]);
        data.ngrams.ngrams.push_back(std::move(gram));
        data.ngrams.counts.push_back(static_cast<double>(std::stoull(fields.back())));
    }
    return data;
}

WordGraph load_graph(const std::string& path, Vocabulary& vocab) {
    std::ifstream in = open_input(path);
    WordGraph graph;
    std::string line;
    std::size_t lineno = 0;
    auto synset_id = [&](const std::string& name) {
        auto id = graph.lookup_synset(name);
        if (!id)
            throw InputError("graph line " + std::to_string(lineno) + ": unknown synset " + name);
        return *id;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split_tabs(line);
        const std::string& kind = fields[0];
        if (kind == "S" && fields.size() == 2) {
            graph.add_synset(fields[1]);
        } else if (kind == "E" && fields.size() == 3) {
            graph.add_edge(synset_id(fields[1]), synset_id(fields[2]));
        } else if (kind == "M" && fields.size() == 3) {
            graph.add_membership(vocab.add(fields[1]), synset_id(fields[2]));
        } else if (kind == "D" && fields.size() == 2) {
            graph.set_depth(std::stoi(fields[1]));
        } else {
            throw InputError("graph line " + std::to_string(lineno) + ": unrecognized record");
        }
    }
    return graph;
}

namespace {

std::vector<RelationTriple> load_triples_impl(const std::string& path, const Vocabulary* strict,
                                              Vocabulary* grow, RelationRegistry& relations) {
    std::ifstream in = open_input(path);
    std::vector<RelationTriple> triples;
    std::string line;
    std::size_t lineno = 0;
    std::size_t missing = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 4)
            throw InputError("triple line " + std::to_string(lineno) + ": expected 4 fields");
        RelationTriple t;
        if (strict != nullptr) {
            auto left = strict->lookup(fields[0]);
            auto right = strict->lookup(fields[2]);
            if (!left || !right) {
                ++missing;
                continue;
            }
            t.left = *left;
            t.right = *right;
        } else {
            t.left = grow->add(fields[0]);
            t.right = grow->add(fields[2]);
        }
        t.relation = relations.add(fields[1]);
        if (fields[3] == "1") t.label = TripleLabel::Positive;
        else if (fields[3] == "0") t.label = TripleLabel::Negative;
        else throw InputError("triple line " + std::to_string(lineno) + ": label must be 1 or 0");
        triples.push_back(t);
    }
    if (missing > 0)
        throw InputError("triple file " + path + ": " + std::to_string(missing) +
                         " triples reference tokens missing from the checkpoint vocabulary");
    return triples;
}

}  // namespace

std::vector<RelationTriple> load_triples(const std::string& path, Vocabulary& vocab,
                                         RelationRegistry& relations) {
    return load_triples_impl(path, nullptr, &vocab, relations);
}

std::vector<RelationTriple> load_triples_strict(const std::string& path, const Vocabulary& vocab,
                                                RelationRegistry& relations) {
    return load_triples_impl(path, &vocab, nullptr, relations);
}

std::vector<AnalogyQuestion> load_analogy(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in = open_input(path);
    std::vector<AnalogyQuestion> questions;
    std::vector<std::pair<Index, Index>> prototypes;
    std::optional<AnalogyQuestion> open;
    bool prototypes_closed = false;
    std::string line;
    std::size_t lineno = 0;
    std::size_t missing = 0;

    auto resolve_pair = [&](const std::string& a,
                            const std::string& b) -> std::optional<std::pair<Index, Index>> {
        auto ia = vocab.lookup(a);
        auto ib = vocab.lookup(b);
        if (!ia || !ib) {
            ++missing;
            return std::nullopt;
        }
        return std::make_pair(*ia, *ib);
    };
    auto finalize = [&]() {
        if (!open) return;
        if (open->candidates.size() < 4 || open->candidates.size() > 5)
            throw InputError("analogy question ending at line " + std::to_string(lineno) +
                             ": needs 4 or 5 candidates");
        questions.push_back(std::move(*open));
        open.reset();
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split_tabs(line);
        const std::string& kind = fields[0];
        if (kind == "P" && fields.size() == 3) {
            finalize();
            if (prototypes_closed) {
                prototypes.clear();
                prototypes_closed = false;
            }
            if (auto p = resolve_pair(fields[1], fields[2])) prototypes.push_back(*p);
        } else if (kind == "Q" && fields.size() == 1) {
            finalize();
            prototypes_closed = true;
            if (prototypes.empty())
                throw InputError("analogy line " + std::to_string(lineno) +
                                 ": question without prototype pairs");
            open = AnalogyQuestion{};
            open->prototypes = prototypes;
        } else if (kind == "C" && (fields.size() == 3 || fields.size() == 4)) {
            if (!open)
                throw InputError("analogy line " + std::to_string(lineno) +
                                 ": candidate outside a question block");
            auto p = resolve_pair(fields[1], fields[2]);
            if (!p) continue;
            open->candidates.push_back(*p);
            if (fields.size() == 4) {
                int idx = static_cast<int>(open->candidates.size()) - 1;
                if (fields[3] == "most") open->gold_most = idx;
                else if (fields[3] == "least") open->gold_least = idx;
                else throw InputError("analogy line " + std::to_string(lineno) +
                                      ": gold tag must be most or least");
            }
        } else {
            throw InputError("analogy line " + std::to_string(lineno) + ": unrecognized record");
        }
    }
    finalize();
    if (missing > 0)
        throw InputError("analogy file " + path + ": " + std::to_string(missing) +
                         " word pairs reference tokens missing from the vocabulary");
    return questions;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& history) {
    std::ofstream out = open_output(path);
    out << "iter,loss_nlm,loss_rel,loss_penalty,mean_residual\n";
    for (const MetricsRow& row : history)
        out << row.iter << ',' << format_double(row.loss_nlm) << ',' << format_double(row.loss_rel)
            << ',' << format_double(row.loss_penalty) << ',' << format_double(row.mean_residual)
            << '\n';
}

void write_tensor_file(const std::string& path, const std::string& role, std::size_t rows,
                       std::size_t dim, std::span<const double> values) {
    if (values.size() != rows * dim)
        throw ConfigError("write_tensor_file: value count does not match rows*dim");
    std::ofstream out = open_output(path);
    out << "admm-embed v1\t" << role << '\t' << rows << '\t' << dim << '\n';
    std::vector<float> f32(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) f32[k] = static_cast<float>(values[k]);
    out.write(reinterpret_cast<const char*>(f32.data()),
              static_cast<std::streamsize>(f32.size() * sizeof(float)));
}

TensorFile read_tensor_file(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string header;
    if (!std::getline(in, header)) throw InputError("tensor file truncated: " + path);
    std::vector<std::string> fields = split_tabs(header);
    if (fields.size() != 4 || fields[0] != "admm-embed v1")
        throw InputError("bad tensor file header: " + path);
    TensorFile t;
    t.role = fields[1];
    t.rows = std::stoull(fields[2]);
    t.dim = std::stoull(fields[3]);
    std::vector<float> f32(t.rows * t.dim);
    in.read(reinterpret_cast<char*>(f32.data()),
            static_cast<std::streamsize>(f32.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != f32.size() * sizeof(float))
        throw InputError("tensor file truncated: " + path);
    t.values.assign(f32.begin(), f32.end());
    return t;
}

namespace {

void write_vocab_file(const std::string& path, const Vocabulary& vocab) {
    std::ofstream out = open_output(path);
    for (const std::string& token : vocab.words()) out << token << '\n';
}

Vocabulary read_vocab_file(const std::string& path) {
    std::ifstream in = open_input(path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) vocab.add(line);
    return vocab;
}

std::string tensor_path(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

}  // namespace

void save_checkpoint(const std::string& dir, const AdmmState& state) {
    fs::create_directories(dir);
    {
        std::ofstream manifest = open_output(tensor_path(dir, "manifest.txt"));
        manifest << "mode=" << mode_name(state.config.mode) << '\n'
                 << "d=" << state.config.d << '\n'
                 << "h=" << state.config.h << '\n'
                 << "n=" << state.config.n << '\n'
                 << "iterations=" << state.iteration << '\n';
    }
    if (state.w) {
        write_vocab_file(tensor_path(dir, "vocab_corpus.txt"), state.corpus_vocab);
        write_tensor_file(tensor_path(dir, "w.bin"), table_role_name(TableRole::DistributionalW),
                          state.w->rows(), state.w->dim(), state.w->data());
    }
    if (state.v) {
        write_vocab_file(tensor_path(dir, "vocab_relational.txt"), state.rel_vocab);
        write_tensor_file(tensor_path(dir, "v.bin"), table_role_name(TableRole::RelationalV),
                          state.v->rows(), state.v->dim(), state.v->data());
    }
    if (state.y)
        write_tensor_file(tensor_path(dir, "y.bin"), table_role_name(TableRole::DualY),
                          state.y->rows(), state.y->dim(), state.y->data());
    if (state.nlm) {
        const NlmParams& p = *state.nlm;
        write_tensor_file(tensor_path(dir, "nlm_A.bin"), "nlm-A", p.h, p.n * p.d, p.A);
        write_tensor_file(tensor_path(dir, "nlm_b.bin"), "nlm-b", 1, p.h, p.b);
        write_tensor_file(tensor_path(dir, "nlm_u.bin"), "nlm-u", 1, p.h, p.u);
    }
    if (state.relations.size() > 0) {
        std::ofstream out = open_output(tensor_path(dir, "relations.txt"));
        for (const std::string& name : state.relations.names()) out << name << '\n';
    }
    if (mode_has_relational(state.config.mode) &&
        mode_relational_kind(state.config.mode) == RelKind::GraphDistance) {
        double ab[2] = {state.gd.a, state.gd.b};
        write_tensor_file(tensor_path(dir, "gd.bin"), "gd-ab", 1, 2, ab);
    }
    if (state.transe) {
        std::vector<double> flat;
        for (const auto& vec : state.transe->translations)
            flat.insert(flat.end(), vec.begin(), vec.end());
        write_tensor_file(tensor_path(dir, "transe.bin"), "transe-R",
                          state.transe->translations.size(), state.transe->d, flat);
    }
    if (state.ntn) {
        const NtnParams& p = *state.ntn;
        auto flatten = [](const std::vector<std::vector<double>>& tensors) {
            std::vector<double> flat;
            for (const auto& t : tensors) flat.insert(flat.end(), t.begin(), t.end());
            return flat;
        };
        write_tensor_file(tensor_path(dir, "ntn_W.bin"), "ntn-W", p.W.size(), p.h * p.d * p.d,
                          flatten(p.W));
        write_tensor_file(tensor_path(dir, "ntn_V.bin"), "ntn-V", p.V.size(), p.h * 2 * p.d,
                          flatten(p.V));
        write_tensor_file(tensor_path(dir, "ntn_b.bin"), "ntn-b", p.bias.size(), p.h,
                          flatten(p.bias));
        write_tensor_file(tensor_path(dir, "ntn_U.bin"), "ntn-U", 1, p.h, p.U);
    }
}

AdmmState load_checkpoint(const std::string& dir) {
    AdmmState state;
    {
        std::ifstream manifest = open_input(tensor_path(dir, "manifest.txt"));
        std::string line;
        while (std::getline(manifest, line)) {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            if (key == "mode") state.config.mode = mode_from_name(value);
            else if (key == "d") state.config.d = std::stoull(value);
            else if (key == "h") state.config.h = std::stoull(value);
            else if (key == "n") state.config.n = std::stoull(value);
            else if (key == "iterations") state.iteration = std::stoull(value);
        }
    }
    auto load_table = [&](const char* file, TableRole role) -> std::optional<EmbeddingTable> {
        std::string path = tensor_path(dir, file);
        if (!fs::exists(path)) return std::nullopt;
        TensorFile t = read_tensor_file(path);
        if (table_role_from_name(t.role) != role)
            throw InputError("unexpected table role in " + path + ": " + t.role);
        EmbeddingTable table(t.rows, t.dim, role);
        table.data() = std::move(t.values);
        return table;
    };
    state.w = load_table("w.bin", TableRole::DistributionalW);
    state.v = load_table("v.bin", TableRole::RelationalV);
    state.y = load_table("y.bin", TableRole::DualY);
    if (state.w) state.corpus_vocab = read_vocab_file(tensor_path(dir, "vocab_corpus.txt"));
    if (state.v) state.rel_vocab = read_vocab_file(tensor_path(dir, "vocab_relational.txt"));
    if (state.w && state.v)
        state.joint = build_joint_vocabulary(state.corpus_vocab, state.rel_vocab);
    if (fs::exists(tensor_path(dir, "relations.txt"))) {
        std::ifstream in = open_input(tensor_path(dir, "relations.txt"));
        std::string line;
        while (std::getline(in, line)) state.relations.add(line);
    }
    if (fs::exists(tensor_path(dir, "nlm_A.bin"))) {
        NlmParams p;
        TensorFile A = read_tensor_file(tensor_path(dir, "nlm_A.bin"));
        TensorFile b = read_tensor_file(tensor_path(dir, "nlm_b.bin"));
        TensorFile u = read_tensor_file(tensor_path(dir, "nlm_u.bin"));
        p.n = state.config.n;
        p.d = state.config.d;
        p.h = A.rows;
        p.A = std::move(A.values);
        p.b = std::move(b.values);
        p.u = std::move(u.values);
        state.nlm = std::move(p);
    }
    if (fs::exists(tensor_path(dir, "gd.bin"))) {
        TensorFile t = read_tensor_file(tensor_path(dir, "gd.bin"));
        state.gd.a = t.values.at(0);
        state.gd.b = t.values.at(1);
    }
    if (fs::exists(tensor_path(dir, "transe.bin"))) {
        TensorFile t = read_tensor_file(tensor_path(dir, "transe.bin"));
        TransEParams p;
        p.d = t.dim;
        p.translations.resize(t.rows);
        for (std::size_t r = 0; r < t.rows; ++r)
            p.translations[r].assign(t.values.begin() + static_cast<std::ptrdiff_t>(r * t.dim),
                                     t.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.dim));
        state.transe = std::move(p);
    }
    if (fs::exists(tensor_path(dir, "ntn_W.bin"))) {
        NtnParams p;
        p.d = state.config.d;
        p.h = state.config.h;
        auto unflatten = [](const TensorFile& t) {
            std::vector<std::vector<double>> out(t.rows);
            for (std::size_t r = 0; r < t.rows; ++r)
                out[r].assign(t.values.begin() + static_cast<std::ptrdiff_t>(r * t.dim),
                              t.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.dim));
            return out;
        };
        p.W = unflatten(read_tensor_file(tensor_path(dir, "ntn_W.bin")));
        p.V = unflatten(read_tensor_file(tensor_path(dir, "ntn_V.bin")));
        p.bias = unflatten(read_tensor_file(tensor_path(dir, "ntn_b.bin")));
        p.U = read_tensor_file(tensor_path(dir, "ntn_U.bin")).values;
        state.ntn = std::move(p);
    }
    return state;
}

}  // namespace admm_embed
