#include "granuscore/anchors.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"
#include "granuscore/text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_set>

namespace granuscore {

using nlohmann::json;

AnchorIndex::AnchorIndex(std::vector<Entry> entries, SpaceDescriptor space, std::string source_id,
                         uint64_t seed)
    : entries_(std::move(entries)), space_(space), source_id_(std::move(source_id)), seed_(seed) {
    validate_space(space_);
    std::unordered_set<std::string> seen;
    dist0s_.reserve(entries_.size());
    uint64_t h = fnv1a64(space_kind_name(space_.kind));
    h = fnv1a64(&space_.curvature, sizeof(space_.curvature), h);
    for (const auto& e : entries_) {
        if (!seen.insert(e.label).second) {
            throw ConfigError("duplicate anchor label: " + e.label);
        }
        if (e.vec.size() != space_.dimension) {
            throw ConfigError("anchor vector length mismatch for label: " + e.label);
        }
        EmbeddingVector v{{e.vec.begin(), e.vec.end()}, space_, source_id_};
        validate_in_space(v, "anchor \"" + e.label + "\"");
        dist0s_.push_back(dist0(v));
        h = fnv1a64(e.label, h);
        h = fnv1a64(e.vec.data(), e.vec.size() * sizeof(float), h);
    }
    content_hash_ = h;
}

EmbeddingVector AnchorIndex::entry_vector(size_t i) const {
    const Entry& e = entries_[i];
    return EmbeddingVector{{e.vec.begin(), e.vec.end()}, space_, source_id_};
}

AnchorIndex AnchorIndex::subset(const std::vector<size_t>& indices) const {
    std::vector<Entry> sub;
    sub.reserve(indices.size());
    for (size_t i : indices) sub.push_back(entries_[i]);
    return AnchorIndex(std::move(sub), space_, source_id_, seed_);
}

void AnchorIndex::save(const std::string& path) const {
    json doc;
    doc["format"] = "granuscore-anchor-index";
    doc["version"] = 1;
    doc["source_id"] = source_id_;
    doc["seed"] = seed_;
    doc["space"] = {{"kind", space_kind_name(space_.kind)},
                    {"curvature", space_.curvature},
                    {"dimension", space_.dimension}};
    json labels = json::array();
    json vectors = json::array();
    for (const auto& e : entries_) {
        labels.push_back(e.label);
        for (float x : e.vec) vectors.push_back(static_cast<double>(x));
    }
    doc["labels"] = std::move(labels);
    doc["vectors"] = std::move(vectors);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ArchiveError("cannot open index archive for writing: " + path);
    std::vector<uint8_t> bytes = json::to_cbor(doc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw ArchiveError("write failure on index archive: " + path);
}

AnchorIndex AnchorIndex::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ArchiveError("cannot open index archive: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    json doc = json::from_cbor(bytes, true, false);
    if (doc.is_discarded() || doc.value("format", "") != "granuscore-anchor-index") {
        throw ArchiveError("not a granuscore anchor index: " + path);
    }
    int version = doc.value("version", 0);
    if (version != 1) {
        throw ArchiveError("unsupported index archive version " + std::to_string(version) +
                           " (this build reads version 1): " + path);
    }
    for (const char* key : {"space", "labels", "vectors", "seed", "source_id"}) {
        if (!doc.contains(key)) {
            throw ArchiveError(std::string("index archive missing section \"") + key + "\": " + path);
        }
    }
    SpaceDescriptor space;
    space.kind = space_kind_from_name(doc["space"].at("kind").get<std::string>());
    space.curvature = doc["space"].at("curvature").get<double>();
    space.dimension = doc["space"].at("dimension").get<size_t>();
    const auto& labels = doc["labels"];
    const auto& vectors = doc["vectors"];
    if (vectors.size() != labels.size() * space.dimension) {
        throw ArchiveError("index archive truncated: vector payload has " +
                           std::to_string(vectors.size()) + " values, expected " +
                           std::to_string(labels.size() * space.dimension) + ": " + path);
    }
    std::vector<AnchorIndex::Entry> entries;
    entries.reserve(labels.size());
    size_t pos = 0;
    for (const auto& label : labels) {
        AnchorIndex::Entry e;
        e.label = label.get<std::string>();
        e.vec.reserve(space.dimension);
        for (size_t d = 0; d < space.dimension; ++d) {
            e.vec.push_back(vectors[pos++].get<float>());
        }
        entries.push_back(std::move(e));
    }
    return AnchorIndex(std::move(entries), space, doc["source_id"].get<std::string>(),
                       doc["seed"].get<uint64_t>());
}

std::string anchor_kind_name(AnchorKind kind) {
    switch (kind) {
        case AnchorKind::nearest_neighbors: return "nearest_neighbors";
        case AnchorKind::random_dynamic: return "random_dynamic";
        case AnchorKind::random_fixed: return "random_fixed";
        case AnchorKind::radial_binned: return "radial_binned";
    }
    return "unknown";
}

AnchorKind anchor_kind_from_name(const std::string& name) {
    if (name == "nearest_neighbors" || name == "nn") return AnchorKind::nearest_neighbors;
    if (name == "random_dynamic" || name == "random") return AnchorKind::random_dynamic;
    if (name == "random_fixed" || name == "random_anchors") return AnchorKind::random_fixed;
    if (name == "radial_binned" || name == "radial_anchors") return AnchorKind::radial_binned;
    throw ConfigError("unknown anchor strategy: " + name);
}

AnchorIndex build_index(const std::vector<std::string>& labels, EmbeddingProvider& provider,
                        size_t sample_size, uint64_t seed, const std::string& source_id) {
    if (labels.empty()) throw ConfigError("build_index: empty label list");
    if (sample_size > labels.size()) {
        throw ConfigError("build_index: sample_size " + std::to_string(sample_size) +
                          " exceeds label count " + std::to_string(labels.size()));
    }
    StreamRng rng(seed, /*stream=*/0x616e63686f7273ULL);
    std::vector<size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<std::string> chosen;
    std::unordered_set<std::string> seen;
    chosen.reserve(sample_size);
    for (size_t pos : order) {
        std::string label = trim(labels[pos]);
        if (label.empty()) continue;
        if (!seen.insert(label).second) continue; // dedup, top up from the rest
        chosen.push_back(std::move(label));
        if (chosen.size() == sample_size) break;
    }
    if (chosen.size() < sample_size) {
        throw ConfigError("build_index: only " + std::to_string(chosen.size()) +
                          " unique labels available, need " + std::to_string(sample_size));
    }

    std::vector<AnchorIndex::Entry> entries;
    entries.reserve(sample_size);
    const size_t batch = 512;
    for (size_t i = 0; i < chosen.size(); i += batch) {
        size_t end = std::min(i + batch, chosen.size());
        std::vector<std::string> texts(chosen.begin() + static_cast<long>(i),
                                       chosen.begin() + static_cast<long>(end));
        std::vector<EmbeddingVector> vecs = embed_batch(texts, provider);
        for (size_t j = 0; j < vecs.size(); ++j) {
            AnchorIndex::Entry e;
            e.label = texts[j];
            e.vec.assign(vecs[j].components.begin(), vecs[j].components.end());
            entries.push_back(std::move(e));
        }
    }
    std::string sid = source_id.empty() ? provider.model_id() : source_id;
    return AnchorIndex(std::move(entries), provider.space(), sid, seed);
}

std::vector<size_t> nearest_neighbors(const AnchorIndex& index, const EmbeddingVector& query,
                                      size_t k) {
    if (k > index.size()) {
        throw ConfigError("nearest_neighbors: k " + std::to_string(k) + " exceeds index size " +
                          std::to_string(index.size()));
    }
    double qq = dot(query.components, query.components);
    double qn = std::sqrt(qq);
    if (qn == 0.0) throw GeometryError("nearest_neighbors: zero query vector");
    std::vector<std::pair<double, size_t>> scored(index.size());
    for (size_t i = 0; i < index.size(); ++i) {
        const auto& a = index.entry(i).vec;
        double uv = 0.0, aa = 0.0;
        for (size_t d = 0; d < a.size(); ++d) {
            double av = static_cast<double>(a[d]);
            uv += query.components[d] * av;
            aa += av * av;
        }
        double an = std::sqrt(aa);
        double sim = an == 0.0 ? -1.0 : uv / (qn * an);
        scored[i] = {sim, i};
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(k), scored.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
    std::vector<size_t> out(k);
    for (size_t i = 0; i < k; ++i) out[i] = scored[i].second;
    return out;
}

static std::vector<size_t> radial_binned_anchors(const AnchorIndex& index,
                                                 const AnchorStrategy& strategy) {
    size_t n = index.size();
    size_t bins = std::max<size_t>(1, strategy.bins);
    // entries sorted by dist0 ascending; ties broken by entry order
    std::vector<size_t> by_depth(n);
    std::iota(by_depth.begin(), by_depth.end(), 0);
    std::stable_sort(by_depth.begin(), by_depth.end(), [&](size_t a, size_t b) {
        return index.entry_dist0(a) < index.entry_dist0(b);
    });

    std::vector<std::vector<size_t>> bin_members(bins);
    if (strategy.equal_width) {
        double lo = index.entry_dist0(by_depth.front());
        double hi = index.entry_dist0(by_depth.back());
        double width = (hi - lo) / static_cast<double>(bins);
        for (size_t i : by_depth) {
            size_t b = width <= 0.0 ? 0
                                    : std::min(bins - 1, static_cast<size_t>(
                                                             (index.entry_dist0(i) - lo) / width));
            bin_members[b].push_back(i);
        }
    } else {
        for (size_t b = 0; b < bins; ++b) {
            size_t begin = b * n / bins;
            size_t end = (b + 1) * n / bins;
            bin_members[b].assign(by_depth.begin() + static_cast<long>(begin),
                                  by_depth.begin() + static_cast<long>(end));
        }
    }

    // floor(k/bins) per bin; the remainder goes to the deepest bins
    std::vector<size_t> quota(bins, strategy.k / bins);
    size_t remainder = strategy.k % bins;
    for (size_t r = 0; r < remainder; ++r) quota[bins - 1 - r] += 1;

    std::vector<size_t> out;
    out.reserve(strategy.k);
    std::vector<size_t> deficit_pool; // bins too small for their quota spill here
    for (size_t b = 0; b < bins; ++b) {
        StreamRng rng(strategy.seed, 0x7261646c62ULL + b);
        size_t take = std::min(quota[b], bin_members[b].size());
        std::vector<size_t> picks = rng.sample_without_replacement(bin_members[b].size(), take);
        std::vector<bool> used(bin_members[b].size(), false);
        for (size_t p : picks) {
            out.push_back(bin_members[b][p]);
            used[p] = true;
        }
        for (size_t i = 0; i < bin_members[b].size(); ++i) {
            if (!used[i]) deficit_pool.push_back(bin_members[b][i]);
        }
    }
    if (out.size() < strategy.k) {
        StreamRng rng(strategy.seed, 0x7370696c6cULL);
        std::vector<size_t> picks =
            rng.sample_without_replacement(deficit_pool.size(), strategy.k - out.size());
        for (size_t p : picks) out.push_back(deficit_pool[p]);
    }
    return out;
}

std::vector<size_t> select_anchors(const AnchorIndex& index, const AnchorStrategy& strategy,
                                   const EmbeddingVector* query, uint64_t call_ordinal) {
    if (strategy.k > index.size()) {
        throw ConfigError("anchor strategy k " + std::to_string(strategy.k) +
                          " exceeds index size " + std::to_string(index.size()));
    }
    if (strategy.k == 0) throw ConfigError("anchor strategy requires k >= 1");
    switch (strategy.kind) {
        case AnchorKind::nearest_neighbors: {
            if (query == nullptr) {
                throw ConfigError("nearest_neighbors strategy requires a query vector");
            }
            return nearest_neighbors(index, *query, strategy.k);
        }
        case AnchorKind::random_dynamic: {
            // per-call seed derived from (base seed, call ordinal)
            StreamRng rng(strategy.seed, 0x64796e0000ULL + call_ordinal);
            return rng.sample_without_replacement(index.size(), strategy.k);
        }
        case AnchorKind::random_fixed: {
            StreamRng rng(strategy.seed, 0x6669786564ULL);
            return rng.sample_without_replacement(index.size(), strategy.k);
        }
        case AnchorKind::radial_binned:
            return radial_binned_anchors(index, strategy);
    }
    throw ConfigError("unhandled anchor strategy");
}

std::vector<double> AnchorFeatureVector::flat() const {
    std::vector<double> out;
    out.reserve(width());
    out.insert(out.end(), sims.begin(), sims.end());
    out.insert(out.end(), dists.begin(), dists.end());
    if (dist0) out.push_back(*dist0);
    return out;
}

std::vector<std::string> AnchorFeatureVector::feature_names(size_t k, bool include_dist0) {
    std::vector<std::string> names;
    names.reserve(2 * k + (include_dist0 ? 1 : 0));
    char buf[32];
    for (size_t i = 0; i < k; ++i) {
        std::snprintf(buf, sizeof(buf), "sim_%04zu", i);
        names.emplace_back(buf);
    }
    for (size_t i = 0; i < k; ++i) {
        std::snprintf(buf, sizeof(buf), "dist_%04zu", i);
        names.emplace_back(buf);
    }
    if (include_dist0) names.emplace_back("dist0");
    return names;
}

std::string feature_order_id(const AnchorIndex& index, const AnchorStrategy& strategy,
                             bool include_dist0) {
    uint64_t h = fnv1a64(anchor_kind_name(strategy.kind));
    h = fnv1a64(&strategy.k, sizeof(strategy.k), h);
    char flag = include_dist0 ? '1' : '0';
    h = fnv1a64(&flag, 1, h);
    if (strategy.kind == AnchorKind::random_fixed || strategy.kind == AnchorKind::radial_binned) {
        // hash the frozen ordered anchor labels
        std::vector<size_t> anchors = select_anchors(index, strategy);
        for (size_t i : anchors) h = fnv1a64(index.entry(i).label, h);
    } else {
        // anchors vary per query/call; the layout is rank-ordered over this index
        uint64_t ch = index.content_hash();
        h = fnv1a64(&ch, sizeof(ch), h);
        if (strategy.kind == AnchorKind::random_dynamic) {
            h = fnv1a64(&strategy.seed, sizeof(strategy.seed), h);
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s:k=%zu:dist0=%c:h=%016llx",
                  anchor_kind_name(strategy.kind).c_str(), strategy.k, flag,
                  static_cast<unsigned long long>(h));
    return buf;
}

AnchorFeatureVector extract_features(const EmbeddingVector& query, const AnchorIndex& index,
                                     const std::vector<size_t>& anchors, bool include_dist0,
                                     const std::string& order_id) {
    if (query.space != index.space()) {
        throw SpaceMismatchError("extract_features: query space does not match anchor space");
    }
    AnchorFeatureVector fv;
    fv.feature_order_id = order_id;
    fv.sims.reserve(anchors.size());
    fv.dists.reserve(anchors.size());
    const bool hyperbolic = query.space.kind == SpaceKind::hyperbolic_ball;
    const double c = query.space.curvature;
    double qq = dot(query.components, query.components);
    double qn = std::sqrt(qq);
    if (qn == 0.0) throw GeometryError("extract_features: zero query vector");
    for (size_t idx : anchors) {
        const auto& a = index.entry(idx).vec;
        double uv = 0.0, aa = 0.0, diff2 = 0.0;
        for (size_t d = 0; d < a.size(); ++d) {
            double av = static_cast<double>(a[d]);
            uv += query.components[d] * av;
            aa += av * av;
            double diff = query.components[d] - av;
            diff2 += diff * diff;
        }
        double an = std::sqrt(aa);
        if (an == 0.0) {
            throw GeometryError("extract_features: zero anchor vector \"" + index.entry(idx).label +
                                "\"");
        }
        double sim = uv / (qn * an);
        if (sim > 1.0) sim = 1.0;
        if (sim < -1.0) sim = -1.0;
        fv.sims.push_back(sim);
        fv.dists.push_back(hyperbolic ? poincare_distance_gram(qq, aa, uv, c) : std::sqrt(diff2));
    }
    if (include_dist0) fv.dist0 = dist0(query);
    return fv;
}

} // namespace granuscore
