#pragma once

#include "granuscore/datasets.hpp"
#include "granuscore/evalkit.hpp"
#include "granuscore/model.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace granuscore {

std::vector<const GranolaEntry*> entries_in_split(const std::vector<GranolaEntry>& entries,
                                                  const SplitAssignment& assignment, Split split);

struct RealizationFeatures {
    DataMatrix x;
    std::vector<double> levels;
    std::vector<std::string> texts;
};

// One feature row per realization of the given entries, in entry order.
RealizationFeatures build_realization_features(const std::vector<const GranolaEntry*>& entries,
                                               EmbeddingProvider& provider,
                                               const AnchorIndex& index,
                                               const AnchorStrategy& strategy, bool include_dist0,
                                               size_t jobs = 1);

// Full training pipeline on pre-split data: features, regressor with dev
// early stopping, model assembly (calibration is attached separately).
GranularityModel train_granola_model(const std::vector<GranolaEntry>& entries,
                                     const SplitAssignment& assignment,
                                     EmbeddingProvider& provider, const AnchorIndex& index,
                                     const AnchorStrategy& strategy, bool include_dist0,
                                     const RegressorConfig& config, const std::string& dataset_id,
                                     size_t jobs = 1);

// text -> (oriented score, covered); higher = coarser.
using TextScorer = std::function<BaselineScore(const std::string&)>;

std::vector<ScoredEntry> score_entries(const std::vector<const GranolaEntry*>& entries,
                                       const TextScorer& scorer, size_t jobs = 1);

// Ready-made scorers for the method table.
TextScorer make_word_count_scorer();
TextScorer make_taxonomy_scorer(std::shared_ptr<const NounTaxonomy> taxonomy);
// Training-free radial-depth method: score = -dist0 (deeper = finer).
TextScorer make_dist0_scorer(std::shared_ptr<EmbeddingProvider> provider);
TextScorer make_model_scorer(std::shared_ptr<UnitScorer> scorer);

} // namespace granuscore
