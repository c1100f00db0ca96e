#pragma once

#include "granuscore/anchors.hpp"
#include "granuscore/calibration.hpp"
#include "granuscore/embedding.hpp"
#include "granuscore/gbdt.hpp"

#include <atomic>
#include <memory>
#include <optional>
#include <string>

namespace granuscore {

struct TrainingMeta {
    std::string dataset_id;
    uint64_t split_seed = 0;
    std::string created;
};

// Self-contained scoring model: prediction needs nothing outside the archive
// except the embedding backend named by embedding_model_id. Immutable once
// loaded; safe for concurrent prediction.
struct GranularityModel {
    TreeEnsemble ensemble;
    RegressorConfig config;
    // For fixed strategies `anchors` holds exactly the k frozen anchors; for
    // nearest_neighbors / random_dynamic it holds the full reference index.
    AnchorIndex anchors;
    AnchorStrategy strategy;
    bool include_dist0 = true;
    std::string feature_order_id;
    std::string embedding_model_id;
    SpaceDescriptor space;
    std::optional<CalibrationTable> calibration;
    TrainingMeta meta;

    // Anchor entry order for one query under the model's strategy.
    std::vector<size_t> anchors_for(const EmbeddingVector& query, uint64_t call_ordinal) const;
};

// Deterministic ensemble output; throws ConfigError on feature-order mismatch.
double predict_raw(const GranularityModel& model, const AnchorFeatureVector& features);

void save_model(const GranularityModel& model, const std::string& path);
GranularityModel load_model(const std::string& path);

// Scoring session: embeds, extracts features, predicts, calibrates. Owns the
// call counter that keeps random_dynamic anchor draws replayable.
class UnitScorer {
public:
    UnitScorer(std::shared_ptr<const GranularityModel> model,
               std::shared_ptr<EmbeddingProvider> provider);

    double raw_score(const std::string& text);
    // Percentile score in [0, 100]; requires a calibrated model.
    double score(const std::string& text);

    const GranularityModel& model() const { return *model_; }
    EmbeddingProvider& provider() { return *provider_; }

private:
    std::shared_ptr<const GranularityModel> model_;
    std::shared_ptr<EmbeddingProvider> provider_;
    std::atomic<uint64_t> call_ordinal_{0};
};

} // namespace granuscore
