#include "granuscore/taxonomy.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/text_util.hpp"

#include <deque>
#include <fstream>

namespace granuscore {

NounTaxonomy NounTaxonomy::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ResolutionError("cannot open noun taxonomy: " + path +
                              " (expected TSV: synset_id, parent ids, lemmas)");
    }
    NounTaxonomy tax;
    std::vector<std::vector<std::string>> parent_ids;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> cols = split(line, '\t');
        if (cols.size() != 3) {
            throw DataError("taxonomy line " + std::to_string(lineno) +
                            ": expected 3 tab-separated columns");
        }
        std::string id = trim(cols[0]);
        if (tax.id_to_index_.count(id) > 0) {
            throw DataError("taxonomy line " + std::to_string(lineno) + ": duplicate synset " + id);
        }
        size_t index = tax.depth_.size();
        tax.id_to_index_[id] = index;
        tax.depth_.push_back(0);
        std::vector<std::string> parents;
        for (const auto& p : split(trim(cols[1]), ',')) {
            if (!trim(p).empty()) parents.push_back(trim(p));
        }
        parent_ids.push_back(std::move(parents));
        for (const auto& lemma : split(cols[2], '|')) {
            std::string key = normalize_key(lemma);
            std::replace(key.begin(), key.end(), '_', ' ');
            if (!key.empty()) tax.lemma_to_synsets_[key].push_back(index);
        }
    }

    // children adjacency, then BFS from the roots
    size_t n = tax.depth_.size();
    std::vector<std::vector<size_t>> children(n);
    std::vector<size_t> parent_count(n, 0);
    for (size_t i = 0; i < n; ++i) {
        for (const auto& pid : parent_ids[i]) {
            auto it = tax.id_to_index_.find(pid);
            if (it == tax.id_to_index_.end()) {
                throw DataError("taxonomy: unknown parent synset " + pid);
            }
            children[it->second].push_back(i);
            parent_count[i] += 1;
        }
    }
    constexpr size_t kUnset = static_cast<size_t>(-1);
    std::fill(tax.depth_.begin(), tax.depth_.end(), kUnset);
    std::deque<size_t> queue;
    for (size_t i = 0; i < n; ++i) {
        if (parent_count[i] == 0) {
            tax.depth_[i] = 0;
            queue.push_back(i);
        }
    }
    if (queue.empty() && n > 0) throw DataError("taxonomy has no root (cycle?)");
    while (!queue.empty()) {
        size_t cur = queue.front();
        queue.pop_front();
        for (size_t child : children[cur]) {
            if (tax.depth_[child] == kUnset || tax.depth_[child] > tax.depth_[cur] + 1) {
                tax.depth_[child] = tax.depth_[cur] + 1;
                queue.push_back(child);
            }
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (tax.depth_[i] == kUnset) {
            throw DataError("taxonomy: synset unreachable from any root (cycle?)");
        }
    }
    return tax;
}

std::optional<size_t> NounTaxonomy::depth_of_synset(const std::string& synset_id) const {
    auto it = id_to_index_.find(synset_id);
    if (it == id_to_index_.end()) return std::nullopt;
    return depth_[it->second];
}

namespace {

// token, token without plural -s / -es
std::vector<std::string> lemma_candidates(const std::string& token) {
    std::vector<std::string> out{token};
    if (token.size() > 2 && token.back() == 's') {
        out.push_back(token.substr(0, token.size() - 1));
        if (token.size() > 3 && token[token.size() - 2] == 'e') {
            out.push_back(token.substr(0, token.size() - 2));
        }
    }
    return out;
}

} // namespace

std::vector<size_t> NounTaxonomy::depths_for(const std::string& text) const {
    std::vector<size_t> depths;
    std::string phrase = normalize_key(text);
    auto add_matches = [&](const std::string& key) {
        auto it = lemma_to_synsets_.find(key);
        if (it == lemma_to_synsets_.end()) return false;
        for (size_t idx : it->second) depths.push_back(depth_[idx]);
        return true;
    };
    for (const auto& cand : lemma_candidates(phrase)) {
        if (add_matches(cand)) return depths;
    }
    // fall back to per-token lookups
    for (const auto& token : split(phrase, ' ')) {
        if (token.empty()) continue;
        for (const auto& cand : lemma_candidates(token)) {
            if (add_matches(cand)) break;
        }
    }
    return depths;
}

} // namespace granuscore
