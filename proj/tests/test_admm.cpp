#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "admm_embed/admm.hpp"
#include "test_util.hpp"

using namespace admm_embed;
using namespace admm_embed::testing;

namespace {

struct PenaltyFixture {
    Vocabulary corpus_vocab, rel_vocab;
    JointVocabulary joint;
    EmbeddingTable w, v, y;

    PenaltyFixture(std::size_t words, std::size_t dim, std::uint64_t seed, double scale = 0.5) {
        for (std::size_t k = 0; k < words; ++k) {
            corpus_vocab.add("t" + std::to_string(k));
            rel_vocab.add("t" + std::to_string(k));
        }
        joint = build_joint_vocabulary(corpus_vocab, rel_vocab);
        Rng rng(seed);
        w = init_table(words, dim, TableRole::DistributionalW, rng, scale);
        v = init_table(words, dim, TableRole::RelationalV, rng, scale);
        y = EmbeddingTable(words, dim, TableRole::DualY);
    }

    PenaltyContext ctx(double rho) { return {&joint, &w, &v, &y, rho}; }
};

}  // namespace

TEST_CASE("penalty_loss hand cases") {
    SUBCASE("zero residual means zero penalty") {
        PenaltyFixture f(4, 3, 1);
        f.v = f.w;
        for (double& x : f.y.data()) x = 2.5;
        CHECK(penalty_loss(f.ctx(7.0)) == 0.0);
    }
    SUBCASE("direct substitution, one word, one dimension") {
        PenaltyFixture f(1, 1, 1);
        f.y.row(0)[0] = 1.0;
        f.w.row(0)[0] = 2.0;
        f.v.row(0)[0] = 1.0;
        CHECK(penalty_loss(f.ctx(2.0)) == doctest::Approx(2.0));  // 1*1 + (2/2)*1
    }
    SUBCASE("zero duals leave the non-negative quadratic") {
        PenaltyFixture f(5, 4, 2);
        PenaltyContext ctx = f.ctx(0.8);
        double lp = penalty_loss(ctx);
        CHECK(lp >= 0.0);
        double quad = 0.0;
        for (const auto& e : f.joint.shared)
            for (std::size_t k = 0; k < 4; ++k) {
                double r = f.w.row(e.corpus_id)[k] - f.v.row(e.relational_id)[k];
                quad += 0.5 * 0.8 * r * r;
            }
        CHECK(lp == doctest::Approx(quad).epsilon(1e-12));
    }
    SUBCASE("invariant under permutation of the shared-word order") {
        PenaltyFixture f(6, 3, 3);
        for (double& x : f.y.data()) x = 0.1;
        double before = penalty_loss(f.ctx(0.5));
        std::reverse(f.joint.shared.begin(), f.joint.shared.end());
        CHECK(penalty_loss(f.ctx(0.5)) == doctest::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("penalty_gradients") {
    SUBCASE("zero residual and zero duals give zero gradients") {
        PenaltyFixture f(4, 3, 4);
        f.v = f.w;
        PenaltyGradients g = penalty_gradients(f.ctx(1.5));
        for (double x : g.w_rows) CHECK(x == 0.0);
        for (double x : g.v_rows) CHECK(x == 0.0);
    }
    SUBCASE("w and v gradients are antisymmetric") {
        PenaltyFixture f(5, 2, 5);
        for (double& x : f.y.data()) x = 0.3;
        PenaltyGradients g = penalty_gradients(f.ctx(0.7));
        for (std::size_t k = 0; k < g.w_rows.size(); ++k) CHECK(g.w_rows[k] == -g.v_rows[k]);
    }
    SUBCASE("matches finite differences of penalty_loss") {
        PenaltyFixture f(4, 3, 6);
        Rng rng(8);
        for (double& x : f.y.data()) x = rng.uniform(-0.5, 0.5);
        PenaltyContext ctx = f.ctx(0.9);
        PenaltyGradients g = penalty_gradients(ctx);
        auto loss = [&]() { return penalty_loss(ctx); };
        for (std::size_t j = 0; j < f.joint.size(); ++j) {
            const auto& e = f.joint.shared[j];
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(grad_close(g.w_rows[j * 3 + k],
                                 central_difference(&f.w.row(e.corpus_id)[k], loss), 1e-6, 1e-9));
                CHECK(grad_close(g.v_rows[j * 3 + k],
                                 central_difference(&f.v.row(e.relational_id)[k], loss), 1e-6,
                                 1e-9));
            }
        }
    }
}

TEST_CASE("dual_update") {
    SUBCASE("direct substitution") {
        PenaltyFixture f(1, 2, 7);
        f.w.row(0)[0] = 2.0;
        f.w.row(0)[1] = -2.0;
        f.v.row(0)[0] = 0.0;
        f.v.row(0)[1] = 0.0;
        dual_update(f.ctx(0.5));
        CHECK(f.y.row(0)[0] == doctest::Approx(1.0));
        CHECK(f.y.row(0)[1] == doctest::Approx(-1.0));
    }
    SUBCASE("zero residual leaves duals unchanged") {
        PenaltyFixture f(3, 2, 8);
        f.v = f.w;
        for (double& x : f.y.data()) x = 0.4;
        dual_update(f.ctx(2.0));
        for (double x : f.y.data()) CHECK(x == 0.4);
    }
    SUBCASE("two updates with frozen tables advance by 2*rho*(w-v)") {
        PenaltyFixture f(3, 2, 9);
        dual_update(f.ctx(0.25));
        dual_update(f.ctx(0.25));
        for (const auto& e : f.joint.shared) {
            std::size_t j = f.joint.by_corpus.at(e.corpus_id);
            for (std::size_t k = 0; k < 2; ++k) {
                double expected = 2.0 * 0.25 * (f.w.row(e.corpus_id)[k] - f.v.row(e.relational_id)[k]);
                CHECK(f.y.row(static_cast<Index>(j))[k] ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
    SUBCASE("exactness: y' - y = rho (w - v) within 1e-12") {
        PenaltyFixture f(10, 5, 10);
        Rng rng(11);
        for (double& x : f.y.data()) x = rng.uniform(-1.0, 1.0);
        EmbeddingTable y_before = f.y;
        dual_update(f.ctx(0.05));
        for (const auto& e : f.joint.shared) {
            std::size_t j = f.joint.by_corpus.at(e.corpus_id);
            for (std::size_t k = 0; k < 5; ++k) {
                double delta = f.y.row(static_cast<Index>(j))[k] -
                               y_before.row(static_cast<Index>(j))[k];
                double expected =
                    0.05 * (f.w.row(e.corpus_id)[k] - f.v.row(e.relational_id)[k]);
                CHECK(std::fabs(delta - expected) < 1e-12);
            }
        }
    }
}

TEST_CASE("mean_residual") {
    SUBCASE("identical tables give zero") {
        PenaltyFixture f(4, 3, 12);
        f.v = f.w;
        CHECK(mean_residual(f.ctx(1.0)) == 0.0);
    }
    SUBCASE("hand case: w=[2,0], v=0") {
        PenaltyFixture f(1, 2, 13);
        f.w.row(0)[0] = 2.0;
        f.w.row(0)[1] = 0.0;
        f.v.row(0)[0] = 0.0;
        f.v.row(0)[1] = 0.0;
        CHECK(mean_residual(f.ctx(1.0)) == doctest::Approx(1.0));
    }
    SUBCASE("invariant under positive scaling of both tables") {
        PenaltyFixture f(6, 4, 14);
        double before = mean_residual(f.ctx(1.0));
        for (double& x : f.w.data()) x *= 3.9;
        for (double& x : f.v.data()) x *= 3.9;
        CHECK(mean_residual(f.ctx(1.0)) == doctest::Approx(before).epsilon(1e-12));
    }
    SUBCASE("empty joint vocabulary gives zero") {
        PenaltyFixture f(2, 2, 15);
        f.joint.shared.clear();
        CHECK(mean_residual(f.ctx(1.0)) == 0.0);
    }
}

namespace {

// Tiny in-memory training setup shared by the trainer tests.
struct TrainerFixture {
    Vocabulary corpus_vocab;
    NgramCorpus corpus;
    WordGraph graph;
    Vocabulary rel_vocab;

    explicit TrainerFixture(std::size_t vocab = 12, std::size_t ngrams = 60) {
        for (std::size_t k = 0; k < vocab; ++k) corpus_vocab.add("t" + std::to_string(k));
        Rng rng(200);
        corpus.n = 3;
        for (std::size_t k = 0; k < ngrams; ++k) {
            Index a = rng.uniform_index(static_cast<Index>(vocab));
            corpus.ngrams.push_back(
                {a, static_cast<Index>((a + 1) % vocab), static_cast<Index>((a + 2) % vocab)});
        }
        for (std::size_t s = 0; s < vocab; ++s) graph.add_synset("s" + std::to_string(s));
        for (std::size_t s = 1; s < vocab; ++s)
            graph.add_edge(static_cast<int>(s - 1), static_cast<int>(s));
        for (std::size_t k = 0; k < vocab; ++k)
            graph.add_membership(rel_vocab.add("t" + std::to_string(k)), static_cast<int>(k));
    }

    RunConfig config(Mode mode) const {
        RunConfig c;
        c.mode = mode;
        c.d = 4;
        c.h = 3;
        c.n = 3;
        c.iterations = 5;
        c.ngram_samples = 30;
        c.rel_samples = 10;
        c.gd_partners = 2;
        c.seed = 77;
        return c;
    }

    TrainingData data() const { return {&corpus, &graph, nullptr}; }
};

}  // namespace

TEST_CASE("admm iteration bookkeeping") {
    TrainerFixture f;
    AdmmTrainer trainer(f.config(Mode::NlmGd), f.corpus_vocab, f.rel_vocab, {}, f.data());
    CHECK(trainer.state().iteration == 0);
    trainer.iterate();
    CHECK(trainer.state().iteration == 1);
    trainer.iterate();
    CHECK(trainer.state().iteration == 2);
    REQUIRE(trainer.state().history.size() == 2);
    CHECK(trainer.state().history[0].iter == 1);
    CHECK(trainer.state().history[1].iter == 2);
}

TEST_CASE("initial shared residual is exactly zero") {
    TrainerFixture f;
    AdmmTrainer trainer(f.config(Mode::NlmGd), f.corpus_vocab, f.rel_vocab, {}, f.data());
    PenaltyContext ctx = trainer.state().penalty_context();
    CHECK(mean_residual(ctx) == 0.0);
}

TEST_CASE("rho=0 decouples the joint run from standalone training") {
    TrainerFixture f;
    RunConfig joint_cfg = f.config(Mode::NlmGd);
    joint_cfg.rho = 0.0;
    RunConfig solo_cfg = f.config(Mode::Nlm);
    AdmmTrainer joint(joint_cfg, f.corpus_vocab, f.rel_vocab, {}, f.data());
    AdmmTrainer solo(solo_cfg, f.corpus_vocab, {}, {}, {&f.corpus, nullptr, nullptr});
    for (int it = 0; it < 5; ++it) {
        joint.iterate();
        solo.iterate();
        const auto& wj = joint.state().w->data();
        const auto& ws = solo.state().w->data();
        REQUIRE(wj.size() == ws.size());
        for (std::size_t k = 0; k < wj.size(); ++k) CHECK(std::fabs(wj[k] - ws[k]) < 1e-12);
        // y stays identically zero
        for (double x : joint.state().y->data()) CHECK(x == 0.0);
    }
}

TEST_CASE("single-objective runs allocate only their own tables") {
    TrainerFixture f;
    AdmmTrainer solo(f.config(Mode::Nlm), f.corpus_vocab, {}, {}, {&f.corpus, nullptr, nullptr});
    CHECK(solo.state().w.has_value());
    CHECK(!solo.state().v.has_value());
    CHECK(!solo.state().y.has_value());
    AdmmTrainer gd(f.config(Mode::Gd), {}, f.rel_vocab, {}, {nullptr, &f.graph, nullptr});
    CHECK(!gd.state().w.has_value());
    CHECK(gd.state().v.has_value());
    CHECK(!gd.state().y.has_value());
}

TEST_CASE("run honors the iteration budget and early stop") {
    TrainerFixture f;
    RunConfig cfg = f.config(Mode::NlmGd);
    cfg.iterations = 8;
    cfg.early_stop_residual = 0.0;  // never triggers
    AdmmTrainer trainer(cfg, f.corpus_vocab, f.rel_vocab, {}, f.data());
    std::size_t calls = 0;
    trainer.run([&](const MetricsRow&) { ++calls; });
    CHECK(calls == 8);
    CHECK(trainer.state().history.size() == 8);

    RunConfig stop_cfg = f.config(Mode::NlmGd);
    stop_cfg.iterations = 50;
    stop_cfg.rho = 0.0;  // residual stays tiny only w.r.t. threshold below
    stop_cfg.early_stop_residual = 1e9;  // always under threshold
    stop_cfg.early_stop_patience = 3;
    AdmmTrainer stopper(stop_cfg, f.corpus_vocab, f.rel_vocab, {}, f.data());
    stopper.run();
    CHECK(stopper.state().iteration == 3);
}

TEST_CASE("a NaN in a table aborts with a diagnostic naming the step") {
    TrainerFixture f;
    AdmmTrainer trainer(f.config(Mode::NlmGd), f.corpus_vocab, f.rel_vocab, {}, f.data());
    trainer.state().w->row(0)[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(trainer.iterate(),
                         doctest::Contains("step (1) distributional SGD"), NumericError);
}
