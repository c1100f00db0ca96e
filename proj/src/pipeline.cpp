#include "granuscore/pipeline.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/parallel.hpp"

#include <ctime>

namespace granuscore {

std::vector<const GranolaEntry*> entries_in_split(const std::vector<GranolaEntry>& entries,
                                                  const SplitAssignment& assignment, Split split) {
    if (entries.size() != assignment.by_entry.size()) {
        throw DataError("entries_in_split: assignment does not match entry list");
    }
    std::vector<const GranolaEntry*> out;
    for (size_t i = 0; i < entries.size(); ++i) {
        if (assignment.by_entry[i] == split) out.push_back(&entries[i]);
    }
    return out;
}

RealizationFeatures build_realization_features(const std::vector<const GranolaEntry*>& entries,
                                               EmbeddingProvider& provider,
                                               const AnchorIndex& index,
                                               const AnchorStrategy& strategy, bool include_dist0,
                                               size_t jobs) {
    RealizationFeatures out;
    for (const auto* e : entries) {
        for (const auto& [text, level] : e->realizations) {
            out.texts.push_back(text);
            out.levels.push_back(level);
        }
    }
    if (out.texts.empty()) throw DataError("build_realization_features: no realizations");

    std::string order_id = feature_order_id(index, strategy, include_dist0);
    std::vector<EmbeddingVector> vecs = embed_batch(out.texts, provider);

    size_t width = 2 * strategy.k + (include_dist0 ? 1 : 0);
    out.x.rows = out.texts.size();
    out.x.cols = width;
    out.x.values.assign(out.x.rows * width, 0.0);

    // frozen strategies share one anchor list; per-query strategies pick
    // inside the loop (ordinal = row index keeps runs replayable)
    std::vector<size_t> frozen;
    bool per_query = strategy.kind == AnchorKind::nearest_neighbors ||
                     strategy.kind == AnchorKind::random_dynamic;
    if (!per_query) frozen = select_anchors(index, strategy);

    parallel_for(out.x.rows, jobs, [&](size_t row) {
        std::vector<size_t> anchors =
            per_query ? select_anchors(index, strategy, &vecs[row], row) : frozen;
        AnchorFeatureVector fv =
            extract_features(vecs[row], index, anchors, include_dist0, order_id);
        std::vector<double> flat = fv.flat();
        std::copy(flat.begin(), flat.end(), out.x.values.begin() + static_cast<long>(row * width));
    });
    return out;
}

GranularityModel train_granola_model(const std::vector<GranolaEntry>& entries,
                                     const SplitAssignment& assignment,
                                     EmbeddingProvider& provider, const AnchorIndex& index,
                                     const AnchorStrategy& strategy, bool include_dist0,
                                     const RegressorConfig& config, const std::string& dataset_id,
                                     size_t jobs) {
    auto train_entries = entries_in_split(entries, assignment, Split::train);
    auto dev_entries = entries_in_split(entries, assignment, Split::dev);
    if (train_entries.empty()) throw DataError("train split is empty");
    if (dev_entries.empty()) throw ConfigError("dev split is empty");

    RealizationFeatures train_f =
        build_realization_features(train_entries, provider, index, strategy, include_dist0, jobs);
    RealizationFeatures dev_f =
        build_realization_features(dev_entries, provider, index, strategy, include_dist0, jobs);

    TreeEnsemble ensemble = train_regressor(train_f.x, train_f.levels, dev_f.x, dev_f.levels,
                                            config);

    // fixed strategies embed just their k anchors; per-query strategies need
    // the whole reference index at prediction time
    bool per_query = strategy.kind == AnchorKind::nearest_neighbors ||
                     strategy.kind == AnchorKind::random_dynamic;
    std::string order_id = feature_order_id(index, strategy, include_dist0);
    AnchorIndex stored = per_query ? index : index.subset(select_anchors(index, strategy));

    char date[32] = "";
    std::time_t now = std::time(nullptr);
    std::strftime(date, sizeof(date), "%Y-%m-%d", std::gmtime(&now));

    return GranularityModel{std::move(ensemble),
                            config,
                            std::move(stored),
                            strategy,
                            include_dist0,
                            order_id,
                            provider.model_id(),
                            provider.space(),
                            std::nullopt,
                            TrainingMeta{dataset_id, assignment.seed, date}};
}

std::vector<ScoredEntry> score_entries(const std::vector<const GranolaEntry*>& entries,
                                       const TextScorer& scorer, size_t jobs) {
    std::vector<ScoredEntry> out(entries.size());
    parallel_for(entries.size(), jobs, [&](size_t i) {
        ScoredEntry se;
        se.realizations.reserve(entries[i]->realizations.size());
        for (const auto& [text, level] : entries[i]->realizations) {
            BaselineScore bs = scorer(text);
            se.realizations.push_back(ScoredRealization{level, bs.score, bs.covered});
        }
        out[i] = std::move(se);
    });
    return out;
}

TextScorer make_word_count_scorer() {
    return [](const std::string& text) { return baseline_score(text, BaselineMethod::word_count); };
}

TextScorer make_taxonomy_scorer(std::shared_ptr<const NounTaxonomy> taxonomy) {
    return [taxonomy](const std::string& text) {
        BaselineScore bs = baseline_score(text, BaselineMethod::taxonomy_depth, taxonomy.get());
        bs.score = -bs.score; // deeper nodes are finer; orient higher = coarser
        return bs;
    };
}

TextScorer make_dist0_scorer(std::shared_ptr<EmbeddingProvider> provider) {
    return [provider](const std::string& text) {
        EmbeddingVector v = embed_one(text, *provider);
        return BaselineScore{-dist0(v), true};
    };
}

TextScorer make_model_scorer(std::shared_ptr<UnitScorer> scorer) {
    return [scorer](const std::string& text) {
        return BaselineScore{scorer->raw_score(text), true};
    };
}

} // namespace granuscore
