#include "granuscore/model.hpp"

#include "granuscore/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace granuscore {

using nlohmann::json;

namespace {
constexpr const char* kFormat = "granuscore-model";
constexpr int kVersion = 1;
} // namespace

std::vector<size_t> GranularityModel::anchors_for(const EmbeddingVector& query,
                                                  uint64_t call_ordinal) const {
    switch (strategy.kind) {
        case AnchorKind::random_fixed:
        case AnchorKind::radial_binned: {
            // the archive stores exactly the frozen k anchors, in order
            std::vector<size_t> all(anchors.size());
            for (size_t i = 0; i < all.size(); ++i) all[i] = i;
            return all;
        }
        case AnchorKind::nearest_neighbors:
            return nearest_neighbors(anchors, query, strategy.k);
        case AnchorKind::random_dynamic:
            return select_anchors(anchors, strategy, &query, call_ordinal);
    }
    throw ConfigError("unhandled anchor strategy");
}

double predict_raw(const GranularityModel& model, const AnchorFeatureVector& features) {
    if (features.feature_order_id != model.feature_order_id) {
        throw ConfigError("feature order mismatch: features carry \"" + features.feature_order_id +
                          "\" but the model was trained with \"" + model.feature_order_id + "\"");
    }
    return model.ensemble.predict(features.flat());
}

namespace {

json space_to_json(const SpaceDescriptor& s) {
    return {{"kind", space_kind_name(s.kind)}, {"curvature", s.curvature}, {"dimension", s.dimension}};
}

SpaceDescriptor space_from_json(const json& j) {
    SpaceDescriptor s;
    s.kind = space_kind_from_name(j.at("kind").get<std::string>());
    s.curvature = j.at("curvature").get<double>();
    s.dimension = j.at("dimension").get<size_t>();
    return s;
}

json config_to_json(const RegressorConfig& c) {
    return {{"max_iterations", c.max_iterations},
            {"early_stopping_rounds", c.early_stopping_rounds},
            {"learning_rate", c.learning_rate},
            {"num_leaves", c.num_leaves},
            {"max_depth", c.max_depth},
            {"min_data_in_leaf", c.min_data_in_leaf},
            {"feature_fraction", c.feature_fraction},
            {"bagging_fraction", c.bagging_fraction},
            {"bagging_freq", c.bagging_freq},
            {"max_bins", c.max_bins},
            {"dart_rate", c.dart_rate},
            {"seed", c.seed}};
}

RegressorConfig config_from_json(const json& j) {
    RegressorConfig c;
    c.max_iterations = j.at("max_iterations").get<size_t>();
    c.early_stopping_rounds = j.at("early_stopping_rounds").get<size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.num_leaves = j.at("num_leaves").get<size_t>();
    c.max_depth = j.at("max_depth").get<int>();
    c.min_data_in_leaf = j.at("min_data_in_leaf").get<size_t>();
    c.feature_fraction = j.at("feature_fraction").get<double>();
    c.bagging_fraction = j.at("bagging_fraction").get<double>();
    c.bagging_freq = j.at("bagging_freq").get<size_t>();
    c.max_bins = j.at("max_bins").get<size_t>();
    c.dart_rate = j.at("dart_rate").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}

json ensemble_to_json(const TreeEnsemble& e) {
    json trees = json::array();
    for (const auto& t : e.trees) {
        json feat = json::array(), thr = json::array(), left = json::array(),
             right = json::array(), leaf = json::array();
        for (const auto& n : t.nodes) {
            feat.push_back(n.feature);
            thr.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            leaf.push_back(n.leaf_value);
        }
        trees.push_back({{"feature", std::move(feat)},
                         {"threshold", std::move(thr)},
                         {"left", std::move(left)},
                         {"right", std::move(right)},
                         {"leaf_value", std::move(leaf)}});
    }
    return {{"base_score", e.base_score},
            {"num_features", e.num_features},
            {"best_iteration", e.best_iteration},
            {"best_dev_rmse", e.best_dev_rmse},
            {"trees", std::move(trees)}};
}

TreeEnsemble ensemble_from_json(const json& j) {
    TreeEnsemble e;
    e.base_score = j.at("base_score").get<double>();
    e.num_features = j.at("num_features").get<size_t>();
    e.best_iteration = j.at("best_iteration").get<size_t>();
    e.best_dev_rmse = j.at("best_dev_rmse").get<double>();
    for (const auto& tj : j.at("trees")) {
        RegressionTree t;
        const auto& feat = tj.at("feature");
        const auto& thr = tj.at("threshold");
        const auto& left = tj.at("left");
        const auto& right = tj.at("right");
        const auto& leaf = tj.at("leaf_value");
        size_t n = feat.size();
        if (thr.size() != n || left.size() != n || right.size() != n || leaf.size() != n) {
            throw ArchiveError("model archive: ragged tree arrays");
        }
        t.nodes.resize(n);
        for (size_t i = 0; i < n; ++i) {
            t.nodes[i].feature = feat[i].get<int>();
            t.nodes[i].threshold = thr[i].get<double>();
            t.nodes[i].left = left[i].get<int>();
            t.nodes[i].right = right[i].get<int>();
            t.nodes[i].leaf_value = leaf[i].get<double>();
        }
        e.trees.push_back(std::move(t));
    }
    return e;
}

json anchors_to_json(const AnchorIndex& idx) {
    json labels = json::array();
    json vectors = json::array();
    for (const auto& e : idx.entries()) {
        labels.push_back(e.label);
        for (float x : e.vec) vectors.push_back(static_cast<double>(x));
    }
    return {{"source_id", idx.source_id()},
            {"seed", idx.seed()},
            {"space", space_to_json(idx.space())},
            {"labels", std::move(labels)},
            {"vectors", std::move(vectors)}};
}

AnchorIndex anchors_from_json(const json& j) {
    SpaceDescriptor space = space_from_json(j.at("space"));
    const auto& labels = j.at("labels");
    const auto& vectors = j.at("vectors");
    if (vectors.size() != labels.size() * space.dimension) {
        throw ArchiveError("model archive: anchor payload truncated");
    }
    std::vector<AnchorIndex::Entry> entries;
    entries.reserve(labels.size());
    size_t pos = 0;
    for (const auto& label : labels) {
        AnchorIndex::Entry e;
        e.label = label.get<std::string>();
        for (size_t d = 0; d < space.dimension; ++d) e.vec.push_back(vectors[pos++].get<float>());
        entries.push_back(std::move(e));
    }
    return AnchorIndex(std::move(entries), space, j.at("source_id").get<std::string>(),
                       j.at("seed").get<uint64_t>());
}

} // namespace

void save_model(const GranularityModel& model, const std::string& path) {
    json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["embedding"] = {{"model_id", model.embedding_model_id},
                        {"space", space_to_json(model.space)}};
    doc["strategy"] = {{"kind", anchor_kind_name(model.strategy.kind)},
                       {"k", model.strategy.k},
                       {"seed", model.strategy.seed},
                       {"bins", model.strategy.bins},
                       {"equal_width", model.strategy.equal_width}};
    doc["include_dist0"] = model.include_dist0;
    doc["feature_order_id"] = model.feature_order_id;
    doc["config"] = config_to_json(model.config);
    doc["ensemble"] = ensemble_to_json(model.ensemble);
    doc["anchors"] = anchors_to_json(model.anchors);
    if (model.calibration) {
        doc["calibration"] = {{"corpus_id", model.calibration->corpus_id},
                              {"raw_scores", model.calibration->raw_scores}};
    } else {
        doc["calibration"] = nullptr;
    }
    doc["training"] = {{"dataset_id", model.meta.dataset_id},
                       {"split_seed", model.meta.split_seed},
                       {"created", model.meta.created}};
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ArchiveError("cannot open model archive for writing: " + path);
    std::vector<uint8_t> bytes = json::to_cbor(doc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw ArchiveError("write failure on model archive: " + path);
}

GranularityModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ArchiveError("cannot open model archive: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    json doc = json::from_cbor(bytes, true, false);
    if (doc.is_discarded() || doc.value("format", "") != kFormat) {
        throw ArchiveError("not a granuscore model archive (or truncated): " + path);
    }
    int version = doc.value("version", 0);
    if (version != kVersion) {
        throw ArchiveError("model archive version " + std::to_string(version) +
                           " is not supported by this build (reads version " +
                           std::to_string(kVersion) + "): " + path);
    }
    for (const char* key :
         {"embedding", "strategy", "include_dist0", "feature_order_id", "config", "ensemble",
          "anchors", "calibration", "training"}) {
        if (!doc.contains(key)) {
            throw ArchiveError(std::string("model archive missing section \"") + key + "\": " + path);
        }
    }
    AnchorStrategy strategy;
    strategy.kind = anchor_kind_from_name(doc["strategy"].at("kind").get<std::string>());
    strategy.k = doc["strategy"].at("k").get<size_t>();
    strategy.seed = doc["strategy"].at("seed").get<uint64_t>();
    strategy.bins = doc["strategy"].at("bins").get<size_t>();
    strategy.equal_width = doc["strategy"].at("equal_width").get<bool>();

    GranularityModel model{ensemble_from_json(doc["ensemble"]),
                           config_from_json(doc["config"]),
                           anchors_from_json(doc["anchors"]),
                           strategy,
                           doc["include_dist0"].get<bool>(),
                           doc["feature_order_id"].get<std::string>(),
                           doc["embedding"].at("model_id").get<std::string>(),
                           space_from_json(doc["embedding"].at("space")),
                           std::nullopt,
                           TrainingMeta{}};
    if (!doc["calibration"].is_null()) {
        CalibrationTable table;
        table.corpus_id = doc["calibration"].at("corpus_id").get<std::string>();
        table.raw_scores = doc["calibration"].at("raw_scores").get<std::vector<double>>();
        table.validate();
        model.calibration = std::move(table);
    }
    model.meta.dataset_id = doc["training"].at("dataset_id").get<std::string>();
    model.meta.split_seed = doc["training"].at("split_seed").get<uint64_t>();
    model.meta.created = doc["training"].at("created").get<std::string>();
    return model;
}

UnitScorer::UnitScorer(std::shared_ptr<const GranularityModel> model,
                       std::shared_ptr<EmbeddingProvider> provider)
    : model_(std::move(model)), provider_(std::move(provider)) {
    if (provider_->model_id() != model_->embedding_model_id) {
        throw ConfigError("model was trained with embedding backend \"" +
                          model_->embedding_model_id + "\" but provider is \"" +
                          provider_->model_id() + "\"");
    }
    if (provider_->space() != model_->space) {
        throw ConfigError("provider space does not match the model's recorded space");
    }
}

double UnitScorer::raw_score(const std::string& text) {
    EmbeddingVector q = embed_one(text, *provider_);
    std::vector<size_t> anchor_ids = model_->anchors_for(q, call_ordinal_.fetch_add(1));
    AnchorFeatureVector fv = extract_features(q, model_->anchors, anchor_ids,
                                              model_->include_dist0, model_->feature_order_id);
    return predict_raw(*model_, fv);
}

double UnitScorer::score(const std::string& text) {
    if (!model_->calibration) {
        throw ConfigError("model has no calibration table; run calibrate first");
    }
    return to_percentile(raw_score(text), *model_->calibration);
}

} // namespace granuscore
