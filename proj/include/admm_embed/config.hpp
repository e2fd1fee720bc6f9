#pragma once

#include <cstdint>
#include <string>

#include "admm_embed/core.hpp"

namespace admm_embed {

enum class Mode { Nlm, Gd, TransE, Ntn, NlmGd, NlmTransE, NlmNtn };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

bool mode_has_distributional(Mode mode);
bool mode_has_relational(Mode mode);
inline bool mode_is_joint(Mode mode) {
    return mode_has_distributional(mode) && mode_has_relational(mode);
}
// Which relational objective a mode trains; only valid when
// mode_has_relational(mode).
enum class RelKind { GraphDistance, TransE, Ntn };
RelKind mode_relational_kind(Mode mode);

enum class CorpusFormat { Text, Counts };

// Flat key=value run configuration; command-line flags mirror these
// fields, last writer wins.
struct RunConfig {
    Mode mode = Mode::NlmGd;
    std::size_t d = 50;
    std::size_t h = 50;
    std::size_t n = 5;
    double rho = 0.05;
    double lr_dist = 0.01;
    double lr_rel = 0.01;
    std::size_t iterations = 300;
    std::size_t ngram_samples = 100000;  // per iteration
    std::size_t rel_samples = 100000;    // GD words per iteration
    std::size_t gd_partners = 5;
    std::uint64_t seed = 1;
    std::size_t vocab_cap = 50000;  // corpus side only
    double init_scale = 0.01;
    double early_stop_residual = 1e-3;
    std::size_t early_stop_patience = 10;
    std::string corpus_path;
    CorpusFormat corpus_format = CorpusFormat::Text;
    std::string graph_path;
    std::string triples_path;
    std::string output_dir;

    // Throws ConfigError naming the offending field.
    void validate_hyperparameters() const;
    // Hyperparameters plus the paths the mode requires.
    void validate() const;
};

std::string serialize_config(const RunConfig& config);
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Canonical shortest-round-trip formatting used everywhere a double is
// written as text (config echo, metrics CSV).
std::string format_double(double value);

}  // namespace admm_embed
