#pragma once

#include "granuscore/datasets.hpp"
#include "granuscore/embedding.hpp"
#include "granuscore/model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace granuscore::testsupport {

// Synthetic hierarchical world: a concept tree embedded in a Poincare ball
// with radius increasing in depth (finer = deeper = farther out), plus
// entries whose answer hierarchies walk leaf-to-root chains. Drives every
// end-to-end test that would otherwise need the real embedding backend.
struct SyntheticWorld {
    std::shared_ptr<TableProvider> table;
    std::shared_ptr<EmbeddingProvider> provider; // caching wrapper around the table
    std::vector<std::string> concept_names;      // index-building corpus
    std::vector<std::string> coarse_names;       // shallow concepts (depth <= 1)
    std::vector<std::string> fine_names;         // deepest concepts
    std::vector<GranolaEntry> entries;
    SpaceDescriptor space;
};

struct WorldConfig {
    size_t roots = 6;
    size_t branching = 3;
    size_t depth = 4;
    size_t n_entries = 400;
    size_t dimension = 12;
    uint64_t seed = 7;
    double curvature = 1.0;
    double radius_noise = 0.03;
    bool add_english_fixture = false; // extra table rows for the worked sentences
};

SyntheticWorld make_world(const WorldConfig& config);

// Trained-and-calibrated model over a shared small world; built once.
struct TrainedFixture {
    SyntheticWorld world;
    std::shared_ptr<GranularityModel> model;
    std::shared_ptr<UnitScorer> scorer;
    SplitAssignment assignment;
};

const TrainedFixture& trained_fixture();

} // namespace granuscore::testsupport
