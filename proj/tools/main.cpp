// Command-line front end: train / eval / synth / inspect.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "admm_embed/admm.hpp"
#include "admm_embed/eval.hpp"
#include "admm_embed/io.hpp"
#include "admm_embed/synth.hpp"

namespace fs = std::filesystem;
using namespace admm_embed;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// One run per output directory.
class RunLock {
public:
    explicit RunLock(const fs::path& dir) : path_(dir / "lock") {
        if (fs::exists(path_))
            throw ConfigError("output directory is locked by another run: " + path_.string());
        std::ofstream(path_) << "locked\n";
    }
    ~RunLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

private:
    fs::path path_;
};

struct TrainCli {
    std::string config_path;
    RunConfig config;
};

void add_train_flags(CLI::App& cmd, TrainCli& cli, std::string& mode_str,
                     std::string& corpus_format_str) {
    cmd.set_help_flag("--help", "print help");  // frees -h / --h for the hidden width
    cmd.add_option("--config", cli.config_path, "flat key=value config file");
    cmd.add_option("--mode", mode_str, "nlm|gd|transe|ntn|nlm+gd|nlm+transe|nlm+ntn");
    cmd.add_option("--d", cli.config.d, "embedding dimension");
    cmd.add_option("--h", cli.config.h, "hidden width");
    cmd.add_option("--n", cli.config.n, "n-gram width");
    cmd.add_option("--rho", cli.config.rho, "ADMM penalty weight");
    cmd.add_option("--lr_dist", cli.config.lr_dist, "distributional learning rate");
    cmd.add_option("--lr_rel", cli.config.lr_rel, "relational learning rate");
    cmd.add_option("--iterations", cli.config.iterations, "ADMM iterations");
    cmd.add_option("--ngram_samples", cli.config.ngram_samples, "n-grams sampled per iteration");
    cmd.add_option("--rel_samples", cli.config.rel_samples, "GD words sampled per iteration");
    cmd.add_option("--gd_partners", cli.config.gd_partners, "similarity partners per GD word");
    cmd.add_option("--seed", cli.config.seed, "RNG seed");
    cmd.add_option("--vocab_cap", cli.config.vocab_cap, "corpus vocabulary cap (0 = none)");
    cmd.add_option("--init_scale", cli.config.init_scale, "uniform init half-range");
    cmd.add_option("--early_stop_residual", cli.config.early_stop_residual,
                   "residual threshold for early stop");
    cmd.add_option("--early_stop_patience", cli.config.early_stop_patience,
                   "consecutive iterations under threshold");
    cmd.add_option("--corpus_path", cli.config.corpus_path, "corpus file");
    cmd.add_option("--corpus_format", corpus_format_str, "text|counts");
    cmd.add_option("--graph_path", cli.config.graph_path, "word graph file");
    cmd.add_option("--triples_path", cli.config.triples_path, "training triples file");
    cmd.add_option("--output_dir", cli.config.output_dir, "run output directory");
}

int run_train(const TrainCli& cli) {
    RunConfig config = cli.config;
    config.validate();
    fs::create_directories(config.output_dir);
    RunLock lock(config.output_dir);
    std::ofstream log((fs::path(config.output_dir) / "run.log").string());

    CorpusData corpus;
    Vocabulary rel_vocab;
    WordGraph graph;
    RelationRegistry relations;
    std::vector<RelationTriple> triples;
    TrainingData data;

    if (mode_has_distributional(config.mode)) {
        corpus = config.corpus_format == CorpusFormat::Text
                     ? load_corpus_text(config.corpus_path, config.n, config.vocab_cap)
                     : load_corpus_counts(config.corpus_path, config.n, config.vocab_cap);
        data.corpus = &corpus.ngrams;
        log << "corpus: " << corpus.ngrams.ngrams.size() << " n-grams, vocabulary "
            << corpus.vocab.size() << "\n";
    }
    if (mode_has_relational(config.mode)) {
        if (mode_relational_kind(config.mode) == RelKind::GraphDistance) {
            graph = load_graph(config.graph_path, rel_vocab);
            data.graph = &graph;
            log << "graph: " << graph.synset_count() << " synsets, depth " << graph.depth()
                << ", vocabulary " << rel_vocab.size() << "\n";
        } else {
            triples = load_triples(config.triples_path, rel_vocab, relations);
            data.triples = &triples;
            log << "triples: " << triples.size() << ", relations " << relations.size()
                << ", vocabulary " << rel_vocab.size() << "\n";
        }
    }

    // Config echo before training, for provenance even on failed runs.
    std::ofstream((fs::path(config.output_dir) / "config.txt").string())
        << serialize_config(config);

    AdmmTrainer trainer(config, std::move(corpus.vocab), std::move(rel_vocab),
                        std::move(relations), data);
    try {
        trainer.run([&](const MetricsRow& row) {
            log << "iter " << row.iter << " loss_nlm=" << format_double(row.loss_nlm)
                << " loss_rel=" << format_double(row.loss_rel)
                << " loss_penalty=" << format_double(row.loss_penalty)
                << " mean_residual=" << format_double(row.mean_residual) << "\n";
        });
    } catch (const NumericError& e) {
        log << "aborted: " << e.what() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    write_metrics_csv((fs::path(config.output_dir) / "metrics.csv").string(),
                      trainer.state().history);
    save_checkpoint((fs::path(config.output_dir) / "checkpoint").string(), trainer.state());
    log << "finished after " << trainer.state().iteration << " iterations\n";
    std::cout << "trained " << trainer.state().iteration << " iterations; output in "
              << config.output_dir << "\n";
    return 0;
}

TripleScorer make_scorer(const AdmmState& state) {
    if (state.transe)
        return [&state](const RelationTriple& t) { return score_transe(t, *state.v, *state.transe); };
    if (state.ntn)
        return [&state](const RelationTriple& t) { return score_ntn(t, *state.v, *state.ntn); };
    throw ConfigError("checkpoint has no triple-scoring parameters (TransE or NTN)");
}

int run_eval_kb(const AdmmState& state, const std::string& dev_path,
                const std::string& test_path, const std::string& out_dir) {
    if (!state.v) throw ConfigError("checkpoint has no relational table");
    if (dev_path.empty()) throw ConfigError("kb task requires --dev (thresholds unfittable)");
    if (test_path.empty()) throw ConfigError("kb task requires --test");
    RelationRegistry relations = state.relations;
    std::vector<RelationTriple> dev = load_triples_strict(dev_path, state.rel_vocab, relations);
    std::vector<RelationTriple> test = load_triples_strict(test_path, state.rel_vocab, relations);
    std::size_t known = state.relations.size();
    std::erase_if(dev, [&](const RelationTriple& t) {
        if (static_cast<std::size_t>(t.relation) < known) return false;
        std::cerr << "warning: dev triple with relation unknown to the checkpoint, skipped\n";
        return true;
    });
    TripleScorer scorer = make_scorer(state);
    ThresholdModel thresholds = fit_thresholds(dev, scorer);
    for (int rel : thresholds.single_class_relations)
        std::cerr << "warning: relation " << relations.name(rel)
                  << " has single-class dev data; threshold set to -inf\n";
    // Test triples with relations the model cannot score keep their
    // unfitted status and count as errors.
    TripleScorer safe_scorer = [&](const RelationTriple& t) {
        return static_cast<std::size_t>(t.relation) < known ? scorer(t) : 0.0;
    };
    KbResult result = kb_completion_accuracy(test, safe_scorer, thresholds);

    fs::create_directories(out_dir);
    std::ofstream txt((fs::path(out_dir) / "kb_report.txt").string());
    std::ofstream csv((fs::path(out_dir) / "kb_report.csv").string());
    txt << "knowledge base completion accuracy: " << format_double(result.accuracy) << "\n";
    if (result.unseen_relation_triples > 0)
        txt << "test triples with unseen relations (counted as errors): "
            << result.unseen_relation_triples << "\n";
    csv << "relation,correct,total,accuracy\n";
    for (const auto& [rel, slot] : result.per_relation) {
        double acc = slot.total == 0 ? 0.0
                                     : static_cast<double>(slot.correct) /
                                           static_cast<double>(slot.total);
        txt << "  " << relations.name(rel) << ": " << slot.correct << "/" << slot.total << " = "
            << format_double(acc) << "\n";
        csv << relations.name(rel) << ',' << slot.correct << ',' << slot.total << ','
            << format_double(acc) << '\n';
    }
    std::cout << "kb completion accuracy: " << format_double(result.accuracy) << "\n";
    return 0;
}

EmbeddingTable analogy_table(const AdmmState& state, const std::string& side) {
    if (side == "w") {
        if (!state.w) throw ConfigError("checkpoint has no distributional table");
        return *state.w;
    }
    if (side == "v") {
        if (!state.v) throw ConfigError("checkpoint has no relational table");
        return *state.v;
    }
    if (side == "mean") {
        if (!state.w || !state.v)
            throw ConfigError("mean table requires both embedding tables in the checkpoint");
        EmbeddingTable mean = *state.w;
        for (const auto& entry : state.joint.shared) {
            auto row = mean.row(entry.corpus_id);
            auto vrow = state.v->row(entry.relational_id);
            for (std::size_t k = 0; k < mean.dim(); ++k) row[k] = 0.5 * (row[k] + vrow[k]);
        }
        return mean;
    }
    throw ConfigError("--table must be w, v or mean");
}

int run_eval_analogy(const AdmmState& state, const std::string& analogy_path,
                     const std::string& side, const std::string& out_dir) {
    if (analogy_path.empty()) throw ConfigError("analogy task requires --analogy");
    const Vocabulary& vocab = side == "v" ? state.rel_vocab : state.corpus_vocab;
    std::vector<AnalogyQuestion> questions = load_analogy(analogy_path, vocab);
    EmbeddingTable table = analogy_table(state, side);
    bool gold = !questions.empty() && questions.front().gold_most && questions.front().gold_least;

    fs::create_directories(out_dir);
    std::ofstream txt((fs::path(out_dir) / "analogy_report.txt").string());
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
        MaxDiffPrediction pred = analogy_maxdiff(questions[qi], table);
        txt << "question " << qi << ": most=" << pred.most << " least=" << pred.least
            << (pred.degenerate_candidates ? " (degenerate candidates)" : "") << "\n";
    }
    if (gold) {
        double acc = maxdiff_accuracy(questions, table);
        txt << "maxdiff accuracy: " << format_double(acc) << "\n";
        std::cout << "maxdiff accuracy: " << format_double(acc) << "\n";
    } else {
        std::cout << "predictions for " << questions.size() << " questions written (no gold labels)\n";
    }
    return 0;
}

int run_eval_neighbors(const AdmmState& state, const std::string& word, std::size_t k,
                       const std::string& out_dir) {
    if (word.empty()) throw ConfigError("neighbors task requires --word");
    const EmbeddingTable& table = state.w ? *state.w : *state.v;
    const Vocabulary& vocab = state.w ? state.corpus_vocab : state.rel_vocab;
    auto id = vocab.lookup(word);
    if (!id) throw InputError("word not in checkpoint vocabulary: " + word);
    auto neighbors = nearest_neighbors(*id, table, k);
    fs::create_directories(out_dir);
    std::ofstream txt((fs::path(out_dir) / "neighbors_report.txt").string());
    for (const auto& [nid, cos] : neighbors) {
        txt << vocab.word(nid) << '\t' << format_double(cos) << '\n';
        std::cout << vocab.word(nid) << '\t' << format_double(cos) << '\n';
    }
    return 0;
}

int run_inspect(const std::string& checkpoint_dir) {
    std::ifstream manifest((fs::path(checkpoint_dir) / "manifest.txt").string());
    if (!manifest) throw InputError("cannot read checkpoint manifest in " + checkpoint_dir);
    std::cout << manifest.rdbuf();
    for (const auto& entry : fs::directory_iterator(checkpoint_dir)) {
        if (entry.path().extension() != ".bin") continue;
        TensorFile t = read_tensor_file(entry.path().string());
        std::cout << entry.path().filename().string() << ": role=" << t.role
                  << " rows=" << t.rows << " dim=" << t.dim << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint distributional/relational word embedding trainer"};
    app.require_subcommand(1);

    TrainCli train_cli;
    std::string mode_str, corpus_format_str;
    CLI::App* train_cmd = app.add_subcommand("train", "train embeddings");
    add_train_flags(*train_cmd, train_cli, mode_str, corpus_format_str);

    std::string eval_checkpoint, eval_task, eval_dev, eval_test, eval_analogy, eval_word;
    std::string eval_table = "w", eval_out = ".";
    std::size_t eval_k = 10;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint directory")->required();
    eval_cmd->add_option("--task", eval_task, "kb|analogy|neighbors")->required();
    eval_cmd->add_option("--dev", eval_dev, "labeled dev triples (kb)");
    eval_cmd->add_option("--test", eval_test, "labeled test triples (kb)");
    eval_cmd->add_option("--analogy", eval_analogy, "analogy question file");
    eval_cmd->add_option("--word", eval_word, "query word (neighbors)");
    eval_cmd->add_option("--k", eval_k, "neighbor count");
    eval_cmd->add_option("--table", eval_table, "w|v|mean (analogy side)");
    eval_cmd->add_option("--out", eval_out, "report directory");

    SynthConfig synth_config;
    std::string synth_out = "synthetic";
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic training data");
    synth_cmd->add_option("--out", synth_out, "output directory");
    synth_cmd->add_option("--seed", synth_config.seed, "RNG seed");
    synth_cmd->add_option("--vocab_size", synth_config.vocab_size, "corpus vocabulary size");
    synth_cmd->add_option("--sentences", synth_config.sentences, "sentence count");
    synth_cmd->add_option("--sentence_length", synth_config.sentence_length, "tokens per sentence");
    synth_cmd->add_option("--word_classes", synth_config.word_classes, "latent word classes");
    synth_cmd->add_option("--synsets", synth_config.synsets, "graph synset count");
    synth_cmd->add_option("--shortcut_edges", synth_config.shortcut_edges, "extra non-tree edges");
    synth_cmd->add_option("--entities", synth_config.entities, "triple entities");
    synth_cmd->add_option("--relations", synth_config.relations, "relation count");
    synth_cmd->add_option("--entity_clusters", synth_config.entity_clusters, "entity clusters");
    synth_cmd->add_option("--train_triples", synth_config.train_triples, "training triples");
    synth_cmd->add_option("--dev_triples", synth_config.dev_triples, "dev triples");
    synth_cmd->add_option("--test_triples", synth_config.test_triples, "test triples");

    std::string inspect_checkpoint;
    CLI::App* inspect_cmd = app.add_subcommand("inspect", "dump checkpoint metadata");
    inspect_cmd->add_option("--checkpoint", inspect_checkpoint, "checkpoint directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*train_cmd) {
            if (!train_cli.config_path.empty()) {
                // File first, command-line flags override: last writer wins.
                RunConfig flags = train_cli.config;
                train_cli.config = load_config_file(train_cli.config_path);
                auto set = [&](const char* name, auto member) {
                    if (train_cmd->count(name) > 0) train_cli.config.*member = flags.*member;
                };
                set("--d", &RunConfig::d);
                set("--h", &RunConfig::h);
                set("--n", &RunConfig::n);
                set("--rho", &RunConfig::rho);
                set("--lr_dist", &RunConfig::lr_dist);
                set("--lr_rel", &RunConfig::lr_rel);
                set("--iterations", &RunConfig::iterations);
                set("--ngram_samples", &RunConfig::ngram_samples);
                set("--rel_samples", &RunConfig::rel_samples);
                set("--gd_partners", &RunConfig::gd_partners);
                set("--seed", &RunConfig::seed);
                set("--vocab_cap", &RunConfig::vocab_cap);
                set("--init_scale", &RunConfig::init_scale);
                set("--early_stop_residual", &RunConfig::early_stop_residual);
                set("--early_stop_patience", &RunConfig::early_stop_patience);
                set("--corpus_path", &RunConfig::corpus_path);
                set("--graph_path", &RunConfig::graph_path);
                set("--triples_path", &RunConfig::triples_path);
                set("--output_dir", &RunConfig::output_dir);
            }
            if (train_cmd->count("--mode")) train_cli.config.mode = mode_from_name(mode_str);
            if (train_cmd->count("--corpus_format"))
                train_cli.config.corpus_format =
                    corpus_format_str == "counts" ? CorpusFormat::Counts : CorpusFormat::Text;
            return run_train(train_cli);
        }
        if (*eval_cmd) {
            AdmmState state = load_checkpoint(eval_checkpoint);
            if (eval_task == "kb") return run_eval_kb(state, eval_dev, eval_test, eval_out);
            if (eval_task == "analogy")
                return run_eval_analogy(state, eval_analogy, eval_table, eval_out);
            if (eval_task == "neighbors")
                return run_eval_neighbors(state, eval_word, eval_k, eval_out);
            throw ConfigError("--task must be kb, analogy or neighbors");
        }
        if (*synth_cmd) {
            SynthPaths paths = make_synthetic(synth_config, synth_out);
            std::cout << "wrote " << paths.corpus << ", " << paths.graph << ", "
                      << paths.triples_train << ", " << paths.triples_dev << ", "
                      << paths.triples_test << "\n";
            return 0;
        }
        if (*inspect_cmd) return run_inspect(inspect_checkpoint);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
