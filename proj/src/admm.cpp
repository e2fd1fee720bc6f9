#include "admm_embed/admm.hpp"

#include <algorithm>
#include <sstream>

namespace admm_embed {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step; keeps per-purpose RNG streams independent.
    std::uint64_t z = seed + stream * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

PenaltyContext AdmmState::penalty_context() {
    PenaltyContext ctx;
    ctx.joint = &joint;
    ctx.w = &*w;
    ctx.v = &*v;
    ctx.y = &*y;
    ctx.rho = config.rho;
    return ctx;
}

AdmmTrainer::AdmmTrainer(const RunConfig& config, Vocabulary corpus_vocab, Vocabulary rel_vocab,
                         RelationRegistry relations, TrainingData data)
    : data_(data),
      dist_rng_(derive_seed(config.seed, 1)),
      rel_rng_(derive_seed(config.seed, 2)) {
    config.validate_hyperparameters();
    state_.config = config;
    state_.corpus_vocab = std::move(corpus_vocab);
    state_.rel_vocab = std::move(rel_vocab);
    state_.relations = std::move(relations);

    const bool dist = mode_has_distributional(config.mode);
    const bool rel = mode_has_relational(config.mode);
    if (dist) {
        if (data_.corpus == nullptr) throw ConfigError("mode requires an n-gram corpus");
        Rng init_rng(config.seed);
        state_.w = init_table(state_.corpus_vocab.size(), config.d, TableRole::DistributionalW,
                              init_rng, config.init_scale);
        Rng param_rng(derive_seed(config.seed, 3));
        state_.nlm = NlmParams::init(config.n, config.d, config.h, param_rng, config.init_scale);
    }
    if (rel) {
        Rng init_rng(config.seed);
        state_.v = init_table(state_.rel_vocab.size(), config.d, TableRole::RelationalV, init_rng,
                              config.init_scale);
        Rng param_rng(derive_seed(config.seed, 4));
        switch (mode_relational_kind(config.mode)) {
            case RelKind::GraphDistance:
                if (data_.graph == nullptr) throw ConfigError("mode requires a word graph");
                gd_words_ = data_.graph->words_with_synsets();
                if (gd_words_.empty()) throw ConfigError("word graph has no word memberships");
                break;
            case RelKind::TransE:
                if (data_.triples == nullptr) throw ConfigError("mode requires training triples");
                state_.transe = TransEParams::init(state_.relations.size(), config.d, param_rng,
                                                  config.init_scale);
                break;
            case RelKind::Ntn:
                if (data_.triples == nullptr) throw ConfigError("mode requires training triples");
                state_.ntn = NtnParams::init(state_.relations.size(), config.d, config.h,
                                             param_rng, config.init_scale);
                break;
        }
    }
    if (dist && rel) {
        state_.joint = build_joint_vocabulary(state_.corpus_vocab, state_.rel_vocab);
        state_.y = EmbeddingTable(state_.joint.size(), config.d, TableRole::DualY);
        // Shared words start with identical copies in both tables, so the
        // initial residual is exactly zero.
        for (const auto& entry : state_.joint.shared) {
            auto src = state_.w->row(entry.corpus_id);
            auto dst = state_.v->row(entry.relational_id);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }
}

std::vector<Ngram> AdmmTrainer::sample_ngram_batch() {
    std::vector<Ngram> batch;
    batch.reserve(state_.config.ngram_samples);
    for (std::size_t i = 0; i < state_.config.ngram_samples; ++i)
        batch.push_back(data_.corpus->sample(dist_rng_));
    return batch;
}

std::vector<GdPair> AdmmTrainer::sample_gd_batch() {
    std::vector<GdPair> batch;
    batch.reserve(state_.config.rel_samples * state_.config.gd_partners);
    const Index pool = static_cast<Index>(gd_words_.size());
    for (std::size_t i = 0; i < state_.config.rel_samples; ++i) {
        Index wi = gd_words_[static_cast<std::size_t>(rel_rng_.uniform_index(pool))];
        for (std::size_t p = 0; p < state_.config.gd_partners; ++p) {
            Index wj = gd_words_[static_cast<std::size_t>(rel_rng_.uniform_index(pool))];
            if (pool > 1 && wj == wi)
                wj = gd_words_[static_cast<std::size_t>(
                    rel_rng_.uniform_index(pool))];  // one redraw; self pairs are rare and legal
            batch.push_back({wi, wj, word_sim(*data_.graph, wi, wj)});
        }
    }
    return batch;
}

void AdmmTrainer::check_finite(const char* step) const {
    auto fail = [&](const char* what) {
        std::ostringstream msg;
        msg << "non-finite " << what << " after " << step << " at iteration "
            << state_.iteration + 1;
        throw NumericError(msg.str());
    };
    if (state_.w && !state_.w->all_finite()) fail("w table");
    if (state_.v && !state_.v->all_finite()) fail("v table");
    if (state_.y && !state_.y->all_finite()) fail("y table");
    if (state_.nlm && !state_.nlm->all_finite()) fail("nlm parameters");
    if (state_.transe && !state_.transe->all_finite()) fail("transe parameters");
    if (state_.ntn && !state_.ntn->all_finite()) fail("ntn parameters");
}

void AdmmTrainer::iterate() {
    const RunConfig& cfg = state_.config;
    const bool joint = mode_is_joint(cfg.mode);
    PenaltyContext ctx;
    if (joint) ctx = state_.penalty_context();

    MetricsRow row;
    row.iter = state_.iteration + 1;

    if (mode_has_distributional(cfg.mode)) {
        std::vector<Ngram> batch = sample_ngram_batch();
        row.loss_nlm = nlm_sgd_step(batch, *state_.w, *state_.nlm, cfg.lr_dist,
                                    joint ? &ctx : nullptr, dist_rng_);
        check_finite("step (1) distributional SGD");
    }
    if (mode_has_relational(cfg.mode)) {
        switch (mode_relational_kind(cfg.mode)) {
            case RelKind::GraphDistance: {
                std::vector<GdPair> batch = sample_gd_batch();
                row.loss_rel =
                    gd_sgd_step(batch, *state_.v, state_.gd, cfg.lr_rel, joint ? &ctx : nullptr);
                break;
            }
            case RelKind::TransE:
            case RelKind::Ntn: {
                // Whole training set, fresh random order every iteration.
                std::vector<RelationTriple> batch = *data_.triples;
                std::shuffle(batch.begin(), batch.end(), rel_rng_.engine());
                RelationalObjective obj = mode_relational_kind(cfg.mode) == RelKind::TransE
                                              ? RelationalObjective::TransE
                                              : RelationalObjective::Ntn;
                row.loss_rel = triple_sgd_step(batch, *state_.v,
                                               state_.transe ? &*state_.transe : nullptr,
                                               state_.ntn ? &*state_.ntn : nullptr, obj,
                                               cfg.lr_rel, joint ? &ctx : nullptr, rel_rng_);
                break;
            }
        }
        check_finite("step (2) relational SGD");
    }
    if (joint) {
        dual_update(ctx);
        check_finite("step (3) dual update");
        row.loss_penalty = penalty_loss(ctx);
        row.mean_residual = mean_residual(ctx);
    }
    ++state_.iteration;
    state_.history.push_back(row);
}

void AdmmTrainer::run(const std::function<void(const MetricsRow&)>& on_iteration) {
    std::size_t below_threshold = 0;
    for (std::size_t i = 0; i < state_.config.iterations; ++i) {
        iterate();
        const MetricsRow& row = state_.history.back();
        if (on_iteration) on_iteration(row);
        if (mode_is_joint(state_.config.mode)) {
            below_threshold =
                row.mean_residual < state_.config.early_stop_residual ? below_threshold + 1 : 0;
            if (below_threshold >= state_.config.early_stop_patience) break;
        }
    }
}

}  // namespace admm_embed
