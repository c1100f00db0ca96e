#pragma once

#include "granuscore/geometry.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace granuscore {

// Pluggable embedding backend. Implementations must be deterministic:
// the same text yields the same vector for a fixed model_id. Backends are
// either thread-safe for concurrent read-only inference or must say so.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string model_id() const = 0;
    virtual SpaceDescriptor space() const = 0;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

// Validating front door: one vector per input in order, all satisfying the
// space invariants. Throws DataError on empty/blank input, GeometryError
// naming the offending text, BackendError from the provider.
std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                         EmbeddingProvider& provider);

EmbeddingVector embed_one(const std::string& text, EmbeddingProvider& provider);

// Precomputed lookup table. File format: first line is a JSON header
// {"format","version","model_id","dimension","kind","curvature"}, then one
// JSON object {"text","vector"} per line. Vectors are float32 payloads;
// write/load round-trips losslessly.
class TableProvider : public EmbeddingProvider {
public:
    TableProvider(std::string model_id, SpaceDescriptor space);

    static TableProvider load(const std::string& path);
    void save(const std::string& path) const;

    void add(const std::string& text, std::vector<float> vec);
    bool contains(const std::string& text) const;
    size_t size() const { return entries_.size(); }

    std::string model_id() const override { return model_id_; }
    SpaceDescriptor space() const override { return space_; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    std::string model_id_;
    SpaceDescriptor space_;
    std::vector<std::pair<std::string, std::vector<float>>> entries_; // file order
    std::unordered_map<std::string, size_t> by_text_;                 // trimmed text -> entry
};

// Memoizing wrapper keyed by (model_id, trimmed text). Thread-safe.
class CachingProvider : public EmbeddingProvider {
public:
    explicit CachingProvider(std::shared_ptr<EmbeddingProvider> inner);

    std::string model_id() const override { return inner_->model_id(); }
    SpaceDescriptor space() const override { return inner_->space(); }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

    size_t cache_size() const;

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::vector<double>> cache_;
};

} // namespace granuscore
