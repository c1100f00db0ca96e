#pragma once

#include "granuscore/embedding.hpp"
#include "granuscore/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace granuscore {

// Fixed entity reference index. Immutable after construction; entry order is
// frozen because downstream feature alignment depends on it.
class AnchorIndex {
public:
    struct Entry {
        std::string label;
        std::vector<float> vec;
    };

    AnchorIndex(std::vector<Entry> entries, SpaceDescriptor space, std::string source_id,
                uint64_t seed);

    size_t size() const { return entries_.size(); }
    const Entry& entry(size_t i) const { return entries_[i]; }
    const std::vector<Entry>& entries() const { return entries_; }
    const SpaceDescriptor& space() const { return space_; }
    const std::string& source_id() const { return source_id_; }
    uint64_t seed() const { return seed_; }
    double entry_dist0(size_t i) const { return dist0s_[i]; }
    EmbeddingVector entry_vector(size_t i) const;

    // Content hash over labels, vectors, and space; anchors sets with equal
    // hashes produce interchangeable features.
    uint64_t content_hash() const { return content_hash_; }

    // Sub-index made of the given entries, in the given order.
    AnchorIndex subset(const std::vector<size_t>& indices) const;

    void save(const std::string& path) const;
    static AnchorIndex load(const std::string& path);

private:
    std::vector<Entry> entries_;
    SpaceDescriptor space_;
    std::string source_id_;
    uint64_t seed_;
    std::vector<double> dist0s_;
    uint64_t content_hash_;
};

enum class AnchorKind { nearest_neighbors, random_dynamic, random_fixed, radial_binned };

std::string anchor_kind_name(AnchorKind kind);
AnchorKind anchor_kind_from_name(const std::string& name);

struct AnchorStrategy {
    AnchorKind kind = AnchorKind::random_fixed;
    size_t k = 999;
    uint64_t seed = 0;
    size_t bins = 10;       // radial_binned only
    bool equal_width = false; // radial bins: equal-count (default) or equal-width
};

// Sample `sample_size` unique labels without replacement under `seed`,
// embed them, and freeze the order. Duplicate labels are skipped and the
// sample topped up from the remaining pool.
AnchorIndex build_index(const std::vector<std::string>& labels, EmbeddingProvider& provider,
                        size_t sample_size, uint64_t seed, const std::string& source_id = "");

// Ordered anchor entry indices for one query. `query` is required for
// nearest_neighbors (sorted by descending cosine); random_dynamic draws a
// fresh seeded sample per call_ordinal; random_fixed and radial_binned are
// pure functions of (index, strategy) and therefore frozen.
std::vector<size_t> select_anchors(const AnchorIndex& index, const AnchorStrategy& strategy,
                                   const EmbeddingVector* query = nullptr,
                                   uint64_t call_ordinal = 0);

// Exact top-k by cosine similarity, descending; ties broken by entry order.
std::vector<size_t> nearest_neighbors(const AnchorIndex& index, const EmbeddingVector& query,
                                      size_t k);

struct AnchorFeatureVector {
    std::optional<double> dist0;
    std::vector<double> sims;
    std::vector<double> dists;
    std::string feature_order_id;

    size_t width() const { return sims.size() + dists.size() + (dist0 ? 1 : 0); }
    // Flat layout: sims block, dists block, then dist0 when present.
    std::vector<double> flat() const;
    static std::vector<std::string> feature_names(size_t k, bool include_dist0);
};

// Identifies the exact feature layout a model was trained with. Fixed anchor
// sets hash their ordered labels; nearest-neighbor features are ordered by
// similarity rank, so the id covers the index content instead.
std::string feature_order_id(const AnchorIndex& index, const AnchorStrategy& strategy,
                             bool include_dist0);

AnchorFeatureVector extract_features(const EmbeddingVector& query, const AnchorIndex& index,
                                     const std::vector<size_t>& anchors, bool include_dist0,
                                     const std::string& order_id);

} // namespace granuscore
