#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace granuscore {

// Noun hierarchy for the taxonomy-depth baseline. Input is TSV:
//   synset_id <TAB> comma-separated parent ids (empty for roots) <TAB>
//   pipe-separated lemmas
// Depth of a synset is its shortest distance to any root.
class NounTaxonomy {
public:
    static NounTaxonomy load(const std::string& path);

    size_t synset_count() const { return depth_.size(); }

    // All synset depths matching the phrase: whole-phrase lemma first, then
    // per-token lemmas with light plural stripping.
    std::vector<size_t> depths_for(const std::string& text) const;

    std::optional<size_t> depth_of_synset(const std::string& synset_id) const;

private:
    std::unordered_map<std::string, size_t> id_to_index_;
    std::vector<size_t> depth_;
    std::unordered_map<std::string, std::vector<size_t>> lemma_to_synsets_;
};

} // namespace granuscore
