#include "granuscore/anchors.hpp"
#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"

#include "../support/oracles.hpp"
#include "../support/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>

using namespace granuscore;
using granuscore::testsupport::WorldConfig;
using granuscore::testsupport::make_world;

namespace {

const testsupport::SyntheticWorld& world() {
    static const testsupport::SyntheticWorld w = [] {
        WorldConfig cfg;
        cfg.roots = 4;
        cfg.branching = 3;
        cfg.depth = 3;
        cfg.n_entries = 10;
        cfg.dimension = 8;
        cfg.seed = 21;
        return make_world(cfg);
    }();
    return w;
}

} // namespace

TEST_CASE("build_index samples exactly, deterministically, without duplicates") {
    const auto& w = world();
    AnchorIndex a = build_index(w.concept_names, *w.provider, 50, 5);
    AnchorIndex b = build_index(w.concept_names, *w.provider, 50, 5);
    REQUIRE(a.size() == 50);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.entry(i).label == b.entry(i).label);
        CHECK(a.entry(i).vec == b.entry(i).vec);
    }
    AnchorIndex c = build_index(w.concept_names, *w.provider, 50, 6);
    bool same_order = true;
    for (size_t i = 0; i < c.size(); ++i) {
        if (c.entry(i).label != a.entry(i).label) same_order = false;
    }
    CHECK_FALSE(same_order); // different seed, different sample

    // exhaustive sample keeps every label
    std::vector<std::string> ten(w.concept_names.begin(), w.concept_names.begin() + 10);
    AnchorIndex full = build_index(ten, *w.provider, 10, 1);
    CHECK(full.size() == 10);

    // duplicates are deduplicated and topped up
    std::vector<std::string> dup = ten;
    dup.insert(dup.end(), ten.begin(), ten.end());
    AnchorIndex dedup = build_index(dup, *w.provider, 10, 1);
    CHECK(dedup.size() == 10);
    CHECK_THROWS_AS(build_index(dup, *w.provider, 11, 1), ConfigError);
    CHECK_THROWS_AS(build_index(ten, *w.provider, 11, 1), ConfigError);
}

TEST_CASE("index archive round-trips bitwise") {
    const auto& w = world();
    AnchorIndex a = build_index(w.concept_names, *w.provider, 40, 9);
    std::string path =
        (std::filesystem::temp_directory_path() / "granuscore_index_roundtrip.grix").string();
    a.save(path);
    AnchorIndex b = AnchorIndex::load(path);
    REQUIRE(b.size() == a.size());
    CHECK(b.content_hash() == a.content_hash());
    CHECK(b.seed() == a.seed());
    CHECK(b.source_id() == a.source_id());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.entry(i).label == b.entry(i).label);
        CHECK(a.entry(i).vec == b.entry(i).vec); // bitwise
    }
    std::remove(path.c_str());
}

TEST_CASE("random_fixed anchors are frozen for the index lifetime") {
    const auto& w = world();
    AnchorIndex index = build_index(w.concept_names, *w.provider, 60, 2);
    AnchorStrategy s;
    s.kind = AnchorKind::random_fixed;
    s.k = 16;
    s.seed = 40;
    auto first = select_anchors(index, s);
    auto second = select_anchors(index, s);
    CHECK(first == second);
    REQUIRE(first.size() == 16);
    // and the feature vectors are bitwise identical across calls
    EmbeddingVector q = embed_one(w.concept_names[3], *w.provider);
    std::string id = feature_order_id(index, s, true);
    auto f1 = extract_features(q, index, first, true, id);
    auto f2 = extract_features(q, index, second, true, id);
    CHECK(f1.sims == f2.sims);
    CHECK(f1.dists == f2.dists);
    CHECK(f1.dist0 == f2.dist0);
}

TEST_CASE("random_dynamic draws per call ordinal, replayably") {
    const auto& w = world();
    AnchorIndex index = build_index(w.concept_names, *w.provider, 60, 2);
    AnchorStrategy s;
    s.kind = AnchorKind::random_dynamic;
    s.k = 8;
    s.seed = 4;
    auto a0 = select_anchors(index, s, nullptr, 0);
    auto a1 = select_anchors(index, s, nullptr, 1);
    CHECK(a0 != a1);
    CHECK(a0 == select_anchors(index, s, nullptr, 0)); // same ordinal, same draw
}

TEST_CASE("nearest neighbors: self retrieval first, similarities non-increasing") {
    const auto& w = world();
    AnchorIndex index = build_index(w.concept_names, *w.provider, 80, 3);
    AnchorStrategy s;
    s.kind = AnchorKind::nearest_neighbors;
    s.k = 12;
    EmbeddingVector q = index.entry_vector(7);
    auto anchors = select_anchors(index, s, &q);
    REQUIRE(anchors.size() == 12);
    CHECK(anchors[0] == 7); // the query itself is in the index
    std::string id = feature_order_id(index, s, false);
    auto fv = extract_features(q, index, anchors, false, id);
    CHECK(fv.sims[0] == doctest::Approx(1.0));
    CHECK(fv.dists[0] == doctest::Approx(0.0));
    for (size_t i = 0; i + 1 < fv.sims.size(); ++i) CHECK(fv.sims[i] >= fv.sims[i + 1]);
    CHECK_THROWS_AS(select_anchors(index, s, nullptr), ConfigError); // query required
}

TEST_CASE("radial_binned draws one anchor per equal-count bin") {
    const auto& w = world();
    // index of 100 entries, k=10, bins=10 -> one per dist0 decile
    AnchorIndex index = build_index(w.concept_names, *w.provider, 100, 12);
    AnchorStrategy s;
    s.kind = AnchorKind::radial_binned;
    s.k = 10;
    s.bins = 10;
    s.seed = 3;
    auto anchors = select_anchors(index, s);
    REQUIRE(anchors.size() == 10);
    CHECK(anchors == select_anchors(index, s)); // frozen

    // brute-force bin membership oracle: sort all entries by dist0, slice
    // into ten equal slices, check exactly one anchor per slice
    std::vector<size_t> by_depth(index.size());
    std::iota(by_depth.begin(), by_depth.end(), 0);
    std::stable_sort(by_depth.begin(), by_depth.end(), [&](size_t a, size_t b) {
        return index.entry_dist0(a) < index.entry_dist0(b);
    });
    std::vector<size_t> slice_of(index.size());
    for (size_t pos = 0; pos < by_depth.size(); ++pos) slice_of[by_depth[pos]] = pos / 10;
    std::vector<int> per_slice(10, 0);
    for (size_t a : anchors) per_slice[slice_of[a]] += 1;
    for (int count : per_slice) CHECK(count == 1);
}

TEST_CASE("radial_binned spreads the remainder over the deepest bins") {
    const auto& w = world();
    AnchorIndex index = build_index(w.concept_names, *w.provider, 100, 12);
    AnchorStrategy s;
    s.kind = AnchorKind::radial_binned;
    s.k = 13; // 10 bins -> 3 extra anchors in the 3 deepest bins
    s.bins = 10;
    s.seed = 3;
    auto anchors = select_anchors(index, s);
    REQUIRE(anchors.size() == 13);
    std::vector<size_t> by_depth(index.size());
    std::iota(by_depth.begin(), by_depth.end(), 0);
    std::stable_sort(by_depth.begin(), by_depth.end(), [&](size_t a, size_t b) {
        return index.entry_dist0(a) < index.entry_dist0(b);
    });
    std::vector<size_t> slice_of(index.size());
    for (size_t pos = 0; pos < by_depth.size(); ++pos) slice_of[by_depth[pos]] = pos / 10;
    std::vector<int> per_slice(10, 0);
    for (size_t a : anchors) per_slice[slice_of[a]] += 1;
    for (size_t b = 0; b < 7; ++b) CHECK(per_slice[b] == 1);
    for (size_t b = 7; b < 10; ++b) CHECK(per_slice[b] == 2);
}

TEST_CASE("extract_features layout and hand-checked values") {
    SpaceDescriptor space{SpaceKind::hyperbolic_ball, 1.0, 2};
    std::vector<AnchorIndex::Entry> entries;
    entries.push_back({"a0", {0.3f, 0.0f}});
    entries.push_back({"a1", {0.0f, 0.3f}});
    AnchorIndex index(std::move(entries), space, "hand", 0);
    EmbeddingVector q{{0.3, 0.0}, space, "hand"};
    // float32 0.3 is not exactly 0.3; compare against the anchor's own value
    q.components[0] = static_cast<double>(index.entry(0).vec[0]);
    auto fv = extract_features(q, index, {0, 1}, true, "hand-order");
    REQUIRE(fv.sims.size() == 2);
    REQUIRE(fv.dists.size() == 2);
    CHECK(fv.width() == 5);
    CHECK(fv.sims[0] == doctest::Approx(1.0));  // self comparison
    CHECK(fv.dists[0] == doctest::Approx(0.0));
    // hand computation: orthogonal unit directions, cosine 0
    CHECK(fv.sims[1] == doctest::Approx(0.0).epsilon(1e-6));
    // independent per-pair evaluation of the distance
    double d = testsupport::oracle_poincare_distance(
        q.components, {static_cast<double>(index.entry(1).vec[0]),
                       static_cast<double>(index.entry(1).vec[1])},
        1.0);
    CHECK(fv.dists[1] == doctest::Approx(d).epsilon(1e-9));
    // flat layout: sims block, dists block, then dist0
    auto flat = fv.flat();
    REQUIRE(flat.size() == 5);
    CHECK(flat[0] == fv.sims[0]);
    CHECK(flat[2] == fv.dists[0]);
    CHECK(flat[4] == *fv.dist0);
    // without dist0: exactly 2k features
    auto fv2 = extract_features(q, index, {0, 1}, false, "hand-order");
    CHECK(fv2.width() == 4);
    CHECK_FALSE(fv2.dist0.has_value());
}

TEST_CASE("feature order id distinguishes configurations") {
    const auto& w = world();
    AnchorIndex index = build_index(w.concept_names, *w.provider, 50, 2);
    AnchorStrategy fixed;
    fixed.kind = AnchorKind::random_fixed;
    fixed.k = 8;
    fixed.seed = 1;
    std::string a = feature_order_id(index, fixed, true);
    std::string b = feature_order_id(index, fixed, false);
    CHECK(a != b);
    AnchorStrategy other = fixed;
    other.seed = 2;
    CHECK(feature_order_id(index, other, true) != a);
    AnchorStrategy nn;
    nn.kind = AnchorKind::nearest_neighbors;
    nn.k = 8;
    CHECK(feature_order_id(index, nn, true) != a);
    // stable across calls
    CHECK(feature_order_id(index, fixed, true) == a);
}

TEST_CASE("strategy guards") {
    const auto& w = world();
    AnchorIndex index = build_index(w.concept_names, *w.provider, 20, 2);
    AnchorStrategy s;
    s.kind = AnchorKind::random_fixed;
    s.k = 21;
    CHECK_THROWS_AS(select_anchors(index, s), ConfigError);
    SpaceDescriptor flat{SpaceKind::flat, 1.0, index.space().dimension};
    EmbeddingVector q{std::vector<double>(index.space().dimension, 0.1), flat, "x"};
    s.k = 4;
    CHECK_THROWS_AS(extract_features(q, index, {0, 1, 2, 3}, true, "id"), SpaceMismatchError);
}
