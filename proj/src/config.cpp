#include "admm_embed/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace admm_embed {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::Nlm: return "nlm";
        case Mode::Gd: return "gd";
        case Mode::TransE: return "transe";
        case Mode::Ntn: return "ntn";
        case Mode::NlmGd: return "nlm+gd";
        case Mode::NlmTransE: return "nlm+transe";
        case Mode::NlmNtn: return "nlm+ntn";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    for (Mode m : {Mode::Nlm, Mode::Gd, Mode::TransE, Mode::Ntn, Mode::NlmGd, Mode::NlmTransE,
                   Mode::NlmNtn})
        if (name == mode_name(m)) return m;
    throw ConfigError("unknown mode: " + name);
}

bool mode_has_distributional(Mode mode) {
    return mode == Mode::Nlm || mode == Mode::NlmGd || mode == Mode::NlmTransE ||
           mode == Mode::NlmNtn;
}

bool mode_has_relational(Mode mode) { return mode != Mode::Nlm; }

RelKind mode_relational_kind(Mode mode) {
    switch (mode) {
        case Mode::Gd:
        case Mode::NlmGd: return RelKind::GraphDistance;
        case Mode::TransE:
        case Mode::NlmTransE: return RelKind::TransE;
        case Mode::Ntn:
        case Mode::NlmNtn: return RelKind::Ntn;
        default: throw ConfigError("mode has no relational objective");
    }
}

namespace {
void require(bool ok, const char* field) {
    if (!ok) throw ConfigError(std::string("invalid config field: ") + field);
}
}  // namespace

void RunConfig::validate_hyperparameters() const {
    require(d >= 1, "d");
    require(h >= 1, "h");
    require(n >= 1, "n");
    require(rho >= 0.0, "rho");
    require(lr_dist > 0.0, "lr_dist");
    require(lr_rel > 0.0, "lr_rel");
    require(init_scale > 0.0, "init_scale");
    require(early_stop_residual >= 0.0, "early_stop_residual");
    if (mode_has_distributional(mode)) require(ngram_samples >= 1, "ngram_samples");
    if (mode_has_relational(mode) && mode_relational_kind(mode) == RelKind::GraphDistance) {
        require(rel_samples >= 1, "rel_samples");
        require(gd_partners >= 1, "gd_partners");
    }
}

void RunConfig::validate() const {
    validate_hyperparameters();
    if (mode_has_distributional(mode)) require(!corpus_path.empty(), "corpus_path");
    if (mode_has_relational(mode)) {
        if (mode_relational_kind(mode) == RelKind::GraphDistance)
            require(!graph_path.empty(), "graph_path");
        else
            require(!triples_path.empty(), "triples_path");
    }
    require(!output_dir.empty(), "output_dir");
}

std::string format_double(double value) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "mode=" << mode_name(c.mode) << '\n'
        << "d=" << c.d << '\n'
        << "h=" << c.h << '\n'
        << "n=" << c.n << '\n'
        << "rho=" << format_double(c.rho) << '\n'
        << "lr_dist=" << format_double(c.lr_dist) << '\n'
        << "lr_rel=" << format_double(c.lr_rel) << '\n'
        << "iterations=" << c.iterations << '\n'
        << "ngram_samples=" << c.ngram_samples << '\n'
        << "rel_samples=" << c.rel_samples << '\n'
        << "gd_partners=" << c.gd_partners << '\n'
        << "seed=" << c.seed << '\n'
        << "vocab_cap=" << c.vocab_cap << '\n'
        << "init_scale=" << format_double(c.init_scale) << '\n'
        << "early_stop_residual=" << format_double(c.early_stop_residual) << '\n'
        << "early_stop_patience=" << c.early_stop_patience << '\n'
        << "corpus_path=" << c.corpus_path << '\n'
        << "corpus_format=" << (c.corpus_format == CorpusFormat::Text ? "text" : "counts") << '\n'
        << "graph_path=" << c.graph_path << '\n'
        << "triples_path=" << c.triples_path << '\n'
        << "output_dir=" << c.output_dir << '\n';
    return out.str();
}

namespace {

std::size_t parse_size(const std::string& value, const std::string& key) {
    try {
        return static_cast<std::size_t>(std::stoull(value));
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": " + value);
    }
}

double parse_real(const std::string& value, const std::string& key) {
    char* end = nullptr;
    double x = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError("invalid number for " + key + ": " + value);
    return x;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line missing '=': " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "mode") c.mode = mode_from_name(value);
        else if (key == "d") c.d = parse_size(value, key);
        else if (key == "h") c.h = parse_size(value, key);
        else if (key == "n") c.n = parse_size(value, key);
        else if (key == "rho") c.rho = parse_real(value, key);
        else if (key == "lr_dist") c.lr_dist = parse_real(value, key);
        else if (key == "lr_rel") c.lr_rel = parse_real(value, key);
        else if (key == "iterations") c.iterations = parse_size(value, key);
        else if (key == "ngram_samples") c.ngram_samples = parse_size(value, key);
        else if (key == "rel_samples") c.rel_samples = parse_size(value, key);
        else if (key == "gd_partners") c.gd_partners = parse_size(value, key);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "vocab_cap") c.vocab_cap = parse_size(value, key);
        else if (key == "init_scale") c.init_scale = parse_real(value, key);
        else if (key == "early_stop_residual") c.early_stop_residual = parse_real(value, key);
        else if (key == "early_stop_patience") c.early_stop_patience = parse_size(value, key);
        else if (key == "corpus_path") c.corpus_path = value;
        else if (key == "corpus_format") {
            if (value == "text") c.corpus_format = CorpusFormat::Text;
            else if (value == "counts") c.corpus_format = CorpusFormat::Counts;
            else throw ConfigError("invalid corpus_format: " + value);
        }
        else if (key == "graph_path") c.graph_path = value;
        else if (key == "triples_path") c.triples_path = value;
        else if (key == "output_dir") c.output_dir = value;
        else throw ConfigError("unknown config key: " + key);
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace admm_embed
