#include "granuscore/embedding.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/text_util.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace granuscore {

using nlohmann::json;

std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                         EmbeddingProvider& provider) {
    if (texts.empty()) throw DataError("embed_batch: empty text batch");
    for (const auto& t : texts) {
        if (trim(t).empty()) throw DataError("embed_batch: blank text in batch");
    }
    std::vector<EmbeddingVector> out = provider.embed(texts);
    if (out.size() != texts.size()) {
        throw BackendError("provider returned " + std::to_string(out.size()) + " vectors for " +
                           std::to_string(texts.size()) + " texts");
    }
    for (size_t i = 0; i < out.size(); ++i) {
        validate_in_space(out[i], "text: \"" + texts[i] + "\"");
    }
    return out;
}

EmbeddingVector embed_one(const std::string& text, EmbeddingProvider& provider) {
    return embed_batch({text}, provider).front();
}

TableProvider::TableProvider(std::string model_id, SpaceDescriptor space)
    : model_id_(std::move(model_id)), space_(space) {
    validate_space(space_);
}

void TableProvider::add(const std::string& text, std::vector<float> vec) {
    if (vec.size() != space_.dimension) {
        throw DataError("table vector length " + std::to_string(vec.size()) +
                        " does not match dimension " + std::to_string(space_.dimension));
    }
    std::string key = trim(text);
    auto it = by_text_.find(key);
    if (it != by_text_.end()) {
        entries_[it->second].second = std::move(vec);
        return;
    }
    by_text_.emplace(key, entries_.size());
    entries_.emplace_back(key, std::move(vec));
}

bool TableProvider::contains(const std::string& text) const {
    return by_text_.count(trim(text)) > 0;
}

std::vector<EmbeddingVector> TableProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = by_text_.find(trim(t));
        if (it == by_text_.end()) {
            throw BackendError("embedding table \"" + model_id_ + "\" has no entry for text: \"" +
                               t + "\"");
        }
        const auto& f = entries_[it->second].second;
        EmbeddingVector v;
        v.components.assign(f.begin(), f.end());
        v.space = space_;
        v.model_id = model_id_;
        out.push_back(std::move(v));
    }
    return out;
}

void TableProvider::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ArchiveError("cannot open embedding table for writing: " + path);
    json header = {{"format", "granuscore-embedding-table"},
                   {"version", 1},
                   {"model_id", model_id_},
                   {"dimension", space_.dimension},
                   {"kind", space_kind_name(space_.kind)},
                   {"curvature", space_.curvature}};
    f << header.dump() << "\n";
    for (const auto& [text, vec] : entries_) {
        json row;
        row["text"] = text;
        json arr = json::array();
        for (float x : vec) arr.push_back(static_cast<double>(x)); // f32 -> f64 is exact
        row["vector"] = std::move(arr);
        f << row.dump() << "\n";
    }
    if (!f) throw ArchiveError("write failure on embedding table: " + path);
}

TableProvider TableProvider::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ArchiveError("cannot open embedding table: " + path);
    std::string line;
    if (!std::getline(f, line)) throw ArchiveError("embedding table empty: " + path);
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() ||
        header.value("format", "") != "granuscore-embedding-table") {
        throw ArchiveError("not a granuscore embedding table: " + path);
    }
    int version = header.value("version", 0);
    if (version != 1) {
        throw ArchiveError("unsupported embedding table version " + std::to_string(version) +
                           " (this build reads version 1): " + path);
    }
    SpaceDescriptor space;
    space.kind = space_kind_from_name(header.at("kind").get<std::string>());
    space.curvature = header.value("curvature", 1.0);
    space.dimension = header.at("dimension").get<size_t>();
    TableProvider table(header.at("model_id").get<std::string>(), space);
    size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.contains("text") || !row.contains("vector")) {
            throw ArchiveError("malformed table row at line " + std::to_string(lineno) + ": " +
                               path);
        }
        std::vector<float> vec;
        vec.reserve(row["vector"].size());
        for (const auto& x : row["vector"]) vec.push_back(x.get<float>());
        table.add(row["text"].get<std::string>(), std::move(vec));
    }
    return table;
}

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingProvider> inner)
    : inner_(std::move(inner)) {}

std::vector<EmbeddingVector> CachingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> missing;
    std::vector<size_t> missing_pos;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (size_t i = 0; i < texts.size(); ++i) {
            auto it = cache_.find(trim(texts[i]));
            if (it == cache_.end()) {
                missing.push_back(texts[i]);
                missing_pos.push_back(i);
            } else {
                out[i] = EmbeddingVector{it->second, inner_->space(), inner_->model_id()};
            }
        }
    }
    if (!missing.empty()) {
        std::vector<EmbeddingVector> fresh = inner_->embed(missing);
        if (fresh.size() != missing.size()) {
            throw BackendError("cached provider: inner backend returned wrong batch size");
        }
        std::lock_guard<std::mutex> lock(mutex_);
        for (size_t i = 0; i < missing.size(); ++i) {
            cache_[trim(missing[i])] = fresh[i].components;
            out[missing_pos[i]] = std::move(fresh[i]);
        }
    }
    return out;
}

size_t CachingProvider::cache_size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

} // namespace granuscore
