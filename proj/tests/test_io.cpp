#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "admm_embed/io.hpp"

using namespace admm_embed;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("admm_embed_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& contents) const {
        fs::path p = path / name;
        std::ofstream out(p);
        out << contents;
        return p.string();
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config serialization") {
    SUBCASE("serialize -> parse -> serialize is byte stable") {
        RunConfig c;
        c.mode = Mode::NlmTransE;
        c.rho = 0.125;
        c.lr_dist = 0.007;
        c.seed = 987654321;
        c.corpus_path = "data/corpus.txt";
        c.triples_path = "data/triples.tsv";
        c.output_dir = "out";
        std::string once = serialize_config(c);
        std::string twice = serialize_config(parse_config(once));
        CHECK(once == twice);
    }
    SUBCASE("parse round-trips every field") {
        RunConfig c;
        c.mode = Mode::Gd;
        c.d = 7;
        c.h = 3;
        c.n = 4;
        c.rho = 1.0 / 3.0;
        c.iterations = 12;
        c.vocab_cap = 0;
        c.corpus_format = CorpusFormat::Counts;
        c.graph_path = "g.txt";
        RunConfig back = parse_config(serialize_config(c));
        CHECK(back.mode == c.mode);
        CHECK(back.d == c.d);
        CHECK(back.h == c.h);
        CHECK(back.n == c.n);
        CHECK(back.rho == c.rho);  // exact: shortest-round-trip formatting
        CHECK(back.iterations == c.iterations);
        CHECK(back.vocab_cap == c.vocab_cap);
        CHECK(back.corpus_format == c.corpus_format);
        CHECK(back.graph_path == c.graph_path);
    }
    SUBCASE("unknown key rejected") {
        CHECK_THROWS_AS(parse_config("no_such_key=1\n"), ConfigError);
    }
    SUBCASE("malformed value rejected") {
        CHECK_THROWS_AS(parse_config("rho=banana\n"), ConfigError);
    }
    SUBCASE("format_double round-trips exactly") {
        for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456.789}) {
            CHECK(std::stod(format_double(v)) == v);
        }
    }
}

TEST_CASE("tensor file round trip") {
    TempDir dir;
    std::vector<double> values = {0.5, -1.25, 3.0, 0.0, 2.5, -0.125};  // f32-exact
    std::string path = dir.sub("t.bin");
    write_tensor_file(path, "w", 3, 2, values);
    TensorFile back = read_tensor_file(path);
    CHECK(back.role == "w");
    CHECK(back.rows == 3);
    CHECK(back.dim == 2);
    CHECK(back.values == values);
    SUBCASE("truncated file rejected") {
        std::string raw = slurp(path);
        std::ofstream out(path, std::ios::binary);
        out << raw.substr(0, raw.size() - 2);
        out.close();
        CHECK_THROWS_AS(read_tensor_file(path), InputError);
    }
    SUBCASE("missing file rejected") {
        CHECK_THROWS_AS(read_tensor_file(dir.sub("absent.bin")), InputError);
    }
}

TEST_CASE("corpus loading") {
    TempDir dir;
    SUBCASE("text corpus with sliding window and vocab cap") {
        std::string path = dir.file("c.txt",
                                    "the cat sat\n"
                                    "the cat ran\n"
                                    "a dog sat\n");
        CorpusData data = load_corpus_text(path, 2, 0);
        // 6 distinct tokens + <unk>
        CHECK(data.vocab.size() == 7);
        CHECK(*data.vocab.lookup(kUnkToken) == 0);
        CHECK(data.ngrams.n == 2);
        CHECK(data.ngrams.ngrams.size() == 6);  // two bigrams per line

        // cap to the 3 tokens with count 2 ("cat", "sat", "the")
        CorpusData capped = load_corpus_text(path, 2, 3);
        CHECK(capped.vocab.size() == 4);  // <unk> + 3
        CHECK(capped.vocab.lookup("the"));
        CHECK(capped.vocab.lookup("cat"));
        CHECK(capped.vocab.lookup("sat"));
        CHECK(!capped.vocab.lookup("dog"));
        Index unk = *capped.vocab.lookup(kUnkToken);
        // "a dog sat" starts <unk> <unk>
        bool saw_unk_bigram = false;
        for (const Ngram& g : capped.ngrams.ngrams)
            if (g[0] == unk && g[1] == unk) saw_unk_bigram = true;
        CHECK(saw_unk_bigram);
    }
    SUBCASE("sentences shorter than n yield no n-grams") {
        std::string path = dir.file("short.txt", "one two\n");
        CorpusData data = load_corpus_text(path, 5, 0);
        CHECK(data.ngrams.ngrams.empty());
    }
    SUBCASE("counts corpus") {
        std::string path = dir.file("c.tsv",
                                    "the\tcat\t10\n"
                                    "a\tdog\t1\n");
        CorpusData data = load_corpus_counts(path, 2, 0);
        CHECK(data.ngrams.ngrams.size() == 2);
        REQUIRE(data.ngrams.counts.size() == 2);
        CHECK(data.ngrams.counts[0] == 10.0);
        // sampling is overwhelmingly the frequent n-gram
        Rng rng(3);
        int frequent = 0;
        for (int k = 0; k < 200; ++k)
            if (data.ngrams.sample(rng) == data.ngrams.ngrams[0]) ++frequent;
        CHECK(frequent > 150);
    }
    SUBCASE("counts corpus rejects wrong arity") {
        std::string path = dir.file("bad.tsv", "just\tone\t2\n");
        CHECK_THROWS_AS(load_corpus_counts(path, 3, 0), InputError);
    }
    SUBCASE("missing corpus file rejected") {
        CHECK_THROWS_AS(load_corpus_text(dir.sub("absent.txt"), 2, 0), InputError);
    }
}

TEST_CASE("graph loading") {
    TempDir dir;
    SUBCASE("synsets, edges, memberships, explicit depth") {
        std::string path = dir.file("g.txt",
                                    "S\ts0\n"
                                    "S\ts1\n"
                                    "S\ts2\n"
                                    "E\ts0\ts1\n"
                                    "E\ts1\ts2\n"
                                    "M\tcat\ts0\n"
                                    "M\tdog\ts2\n"
                                    "D\t4\n");
        Vocabulary vocab;
        WordGraph g = load_graph(path, vocab);
        CHECK(vocab.size() == 2);
        REQUIRE(vocab.lookup("cat"));
        REQUIRE(vocab.lookup("dog"));
        CHECK(g.depth() == 4);
        auto dist = shortest_path(g, 0, 2);
        REQUIRE(dist);
        CHECK(*dist == 2);
        // sim(cat, dog) = 1 - 2/(2*4)
        CHECK(word_sim(g, *vocab.lookup("cat"), *vocab.lookup("dog")) ==
              doctest::Approx(0.75));
    }
    SUBCASE("default depth is half the diameter") {
        std::string path = dir.file("g2.txt",
                                    "S\ta\nS\tb\nS\tc\n"
                                    "E\ta\tb\nE\tb\tc\n"
                                    "M\tx\ta\n");
        Vocabulary vocab;
        WordGraph g = load_graph(path, vocab);
        CHECK(g.depth() == 1);  // diameter 2 -> (2+1)/2 = 1
    }
    SUBCASE("edge naming an undeclared synset rejected") {
        std::string path = dir.file("bad.txt", "S\ta\nE\ta\tghost\n");
        Vocabulary vocab;
        CHECK_THROWS_AS(load_graph(path, vocab), InputError);
    }
}

TEST_CASE("triple loading") {
    TempDir dir;
    std::string path = dir.file("t.tsv",
                                "alice\tknows\tbob\t1\n"
                                "bob\tknows\tcarol\t0\n"
                                "alice\temploys\tcarol\t1\n");
    SUBCASE("growing loader registers words and relations") {
        Vocabulary vocab;
        RelationRegistry rels;
        auto triples = load_triples(path, vocab, rels);
        REQUIRE(triples.size() == 3);
        CHECK(vocab.size() == 3);
        CHECK(rels.size() == 2);
        CHECK(triples[0].label == TripleLabel::Positive);
        CHECK(triples[1].label == TripleLabel::Negative);
        CHECK(triples[0].relation == triples[1].relation);
        CHECK(triples[2].relation != triples[0].relation);
    }
    SUBCASE("strict loader reports missing tokens") {
        Vocabulary vocab;
        vocab.add("alice");
        vocab.add("bob");
        RelationRegistry rels;
        rels.add("knows");
        rels.add("employs");
        // both "knows carol" lines reference the missing token
        CHECK_THROWS_WITH_AS(load_triples_strict(path, vocab, rels),
                             doctest::Contains("2 triples reference tokens missing"), InputError);
    }
    SUBCASE("bad label rejected") {
        std::string bad = dir.file("bad.tsv", "a\tr\tb\t7\n");
        Vocabulary vocab;
        RelationRegistry rels;
        CHECK_THROWS_AS(load_triples(bad, vocab, rels), InputError);
    }
}

TEST_CASE("analogy loading") {
    TempDir dir;
    Vocabulary vocab;
    for (const char* t : {"man", "woman", "king", "queen", "boy", "girl", "apple"})
        vocab.add(t);
    SUBCASE("questions with gold tags") {
        std::string path = dir.file("a.txt",
                                    "P\tman\twoman\n"
                                    "P\tking\tqueen\n"
                                    "Q\n"
                                    "C\tboy\tgirl\tmost\n"
                                    "C\tking\tqueen\n"
                                    "C\tapple\tking\n"
                                    "C\tman\tapple\tleast\n");
        auto questions = load_analogy(path, vocab);
        REQUIRE(questions.size() == 1);
        const AnalogyQuestion& q = questions[0];
        CHECK(q.prototypes.size() == 2);
        CHECK(q.candidates.size() == 4);
        CHECK(q.gold_most == 0);
        CHECK(q.gold_least == 3);
        CHECK(q.prototypes[0].first == *vocab.lookup("man"));
        CHECK(q.prototypes[0].second == *vocab.lookup("woman"));
    }
    SUBCASE("candidate count outside 4..5 rejected") {
        std::string path = dir.file("few.txt",
                                    "P\tman\twoman\nQ\nC\tboy\tgirl\nC\tking\tqueen\n");
        CHECK_THROWS_AS(load_analogy(path, vocab), InputError);
    }
    SUBCASE("unknown token rejected") {
        std::string path = dir.file("unk.txt",
                                    "P\tman\tzebra\nQ\nC\tboy\tgirl\nC\tking\tqueen\n"
                                    "C\tman\tking\nC\twoman\tqueen\n");
        CHECK_THROWS_AS(load_analogy(path, vocab), InputError);
    }
}

TEST_CASE("metrics csv") {
    TempDir dir;
    std::vector<MetricsRow> rows = {{1, 0.5, 0.25, 0.0, 1.0}, {2, 0.4, 0.2, 0.125, 0.5}};
    std::string path = dir.sub("m.csv");
    write_metrics_csv(path, rows);
    std::string text = slurp(path);
    CHECK(text == "iter,loss_nlm,loss_rel,loss_penalty,mean_residual\n"
                  "1,0.5,0.25,0,1\n"
                  "2,0.4,0.2,0.125,0.5\n");
}

namespace {

// A tiny trained state shared by the checkpoint tests.
AdmmTrainer make_small_trainer(std::uint64_t seed) {
    Vocabulary cv, rv;
    for (int k = 0; k < 8; ++k) cv.add("w" + std::to_string(k));
    for (int k = 0; k < 8; k += 2) rv.add("w" + std::to_string(k));

    // function-local statics: stable addresses for the trainer's data pointers
    static const NgramCorpus corpus = [] {
        NgramCorpus c;
        c.n = 3;
        Rng data_rng(4);
        for (int k = 0; k < 30; ++k)
            c.ngrams.push_back({data_rng.uniform_index(8), data_rng.uniform_index(8),
                                data_rng.uniform_index(8)});
        return c;
    }();
    static const WordGraph graph = [] {
        WordGraph g;
        for (int s = 0; s < 4; ++s) g.add_synset("s" + std::to_string(s));
        for (int s = 0; s + 1 < 4; ++s) g.add_edge(s, s + 1);
        for (Index wd = 0; wd < 4; ++wd) g.add_membership(wd, wd % 4);
        return g;
    }();

    RunConfig config;
    config.mode = Mode::NlmGd;
    config.d = 3;
    config.h = 2;
    config.n = 3;
    config.iterations = 2;
    config.ngram_samples = 10;
    config.rel_samples = 4;
    config.gd_partners = 2;
    config.seed = seed;
    TrainingData data;
    data.corpus = &corpus;
    data.graph = &graph;
    return AdmmTrainer(config, cv, rv, RelationRegistry{}, data);
}

}  // namespace

TEST_CASE("checkpoint round trip") {
    TempDir dir;
    AdmmTrainer trainer = make_small_trainer(5);
    trainer.run();
    std::string ckpt = dir.sub("checkpoint");
    save_checkpoint(ckpt, trainer.state());
    AdmmState back = load_checkpoint(ckpt);

    CHECK(back.config.mode == Mode::NlmGd);
    CHECK(back.config.d == 3);
    CHECK(back.corpus_vocab.size() == trainer.state().corpus_vocab.size());
    CHECK(back.rel_vocab.size() == trainer.state().rel_vocab.size());
    CHECK(back.corpus_vocab.word(2) == trainer.state().corpus_vocab.word(2));
    REQUIRE(back.w);
    REQUIRE(back.v);
    REQUIRE(back.y);
    REQUIRE(back.nlm);
    // values pass through f32, so compare at f32 precision
    for (std::size_t k = 0; k < back.w->data().size(); ++k)
        CHECK(back.w->data()[k] ==
              doctest::Approx(trainer.state().w->data()[k]).epsilon(1e-6));
    CHECK(back.gd.a == doctest::Approx(trainer.state().gd.a).epsilon(1e-6));
    CHECK(back.nlm->A.size() == trainer.state().nlm->A.size());
}

TEST_CASE("identical seeds give byte-identical checkpoints") {
    TempDir dir;
    AdmmTrainer t1 = make_small_trainer(9);
    AdmmTrainer t2 = make_small_trainer(9);
    t1.run();
    t2.run();
    save_checkpoint(dir.sub("a"), t1.state());
    save_checkpoint(dir.sub("b"), t2.state());
    for (const char* name : {"w.bin", "v.bin", "y.bin", "manifest.txt", "vocab_corpus.txt"}) {
        CHECK(slurp(dir.sub("a") + "/" + name) == slurp(dir.sub("b") + "/" + name));
    }
}
