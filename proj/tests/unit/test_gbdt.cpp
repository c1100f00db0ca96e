#include "granuscore/errors.hpp"
#include "granuscore/gbdt.hpp"
#include "granuscore/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace granuscore;

namespace {

RegressorConfig small_config() {
    RegressorConfig cfg;
    cfg.max_iterations = 300;
    cfg.early_stopping_rounds = 30;
    cfg.learning_rate = 0.1;
    cfg.num_leaves = 7;
    cfg.min_data_in_leaf = 5;
    cfg.feature_fraction = 1.0;
    cfg.bagging_fraction = 1.0;
    cfg.bagging_freq = 0;
    cfg.max_bins = 64;
    cfg.seed = 3;
    return cfg;
}

} // namespace

TEST_CASE("constant targets fit exactly") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    StreamRng rng(1);
    for (int i = 0; i < 200; ++i) {
        rows.push_back({rng.next_double(), rng.next_double()});
        y.push_back(2.5);
    }
    DataMatrix x = DataMatrix::from_rows(rows);
    TreeEnsemble model = train_regressor(x, y, x, y, small_config());
    CHECK(model.best_dev_rmse <= 1e-6);
    for (int i = 0; i < 10; ++i) {
        CHECK(model.predict(rows[static_cast<size_t>(i)]) == doctest::Approx(2.5).epsilon(1e-9));
    }
}

TEST_CASE("monotone synthetic: predictions non-decreasing over the training range") {
    // y = monotone function of the single feature; check predictions against
    // a brute-force sorted sweep
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    StreamRng rng(2);
    for (int i = 0; i < 600; ++i) {
        double v = 10.0 * rng.next_double();
        rows.push_back({v});
        y.push_back(1.0 + 3.0 / (1.0 + std::exp(-(v - 5.0)))); // increasing in v
    }
    DataMatrix x = DataMatrix::from_rows(rows);
    TreeEnsemble model = train_regressor(x, y, x, y, small_config());

    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(10.0 * i / 200.0);
    std::vector<double> preds;
    for (double g : grid) preds.push_back(model.predict({g}));
    for (size_t i = 0; i + 1 < preds.size(); ++i) {
        CHECK(preds[i] <= preds[i + 1] + 1e-9);
    }
    // and it actually learned the shape
    CHECK(model.predict({0.5}) < model.predict({9.5}) - 1.0);
}

TEST_CASE("early stopping returns the best dev iteration") {
    // train on noise-free data, dev from a shifted distribution so dev RMSE
    // bottoms out and the ensemble is truncated
    std::vector<std::vector<double>> train_rows, dev_rows;
    std::vector<double> train_y, dev_y;
    StreamRng rng(5);
    for (int i = 0; i < 400; ++i) {
        double v = rng.next_double();
        train_rows.push_back({v});
        train_y.push_back(v + 0.05 * rng.next_gaussian());
        double w = rng.next_double();
        dev_rows.push_back({w});
        dev_y.push_back(w + 0.3 * rng.next_gaussian()); // noisier dev
    }
    RegressorConfig cfg = small_config();
    cfg.max_iterations = 500;
    cfg.early_stopping_rounds = 10;
    TreeEnsemble model = train_regressor(DataMatrix::from_rows(train_rows), train_y,
                                         DataMatrix::from_rows(dev_rows), dev_y, cfg);
    CHECK(model.trees.size() == model.best_iteration);
    CHECK(model.trees.size() < 500);
    CHECK(std::isfinite(model.best_dev_rmse));
}

TEST_CASE("training is deterministic under fixed seeds") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    StreamRng rng(7);
    for (int i = 0; i < 300; ++i) {
        rows.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
        y.push_back(rows.back()[0] + 0.5 * rows.back()[1] + 0.1 * rng.next_gaussian());
    }
    RegressorConfig cfg = small_config();
    cfg.feature_fraction = 0.7;
    cfg.bagging_fraction = 0.6;
    cfg.bagging_freq = 3;
    DataMatrix x = DataMatrix::from_rows(rows);
    TreeEnsemble a = train_regressor(x, y, x, y, cfg);
    TreeEnsemble b = train_regressor(x, y, x, y, cfg);
    REQUIRE(a.trees.size() == b.trees.size());
    CHECK(a.best_dev_rmse == b.best_dev_rmse);
    for (int probe = 0; probe < 20; ++probe) {
        std::vector<double> p{rng.next_double(), rng.next_double(), rng.next_double()};
        CHECK(a.predict(p) == b.predict(p)); // bitwise
    }
}

TEST_CASE("single split tree is hand traceable") {
    // two clusters; one split separates them. Walk the tree by hand.
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        rows.push_back({static_cast<double>(i < 10 ? 0 : 1)});
        y.push_back(i < 10 ? 1.0 : 3.0);
    }
    RegressorConfig cfg = small_config();
    cfg.num_leaves = 2;
    cfg.max_iterations = 1;
    cfg.early_stopping_rounds = 1;
    cfg.learning_rate = 1.0;
    cfg.min_data_in_leaf = 1;
    DataMatrix x = DataMatrix::from_rows(rows);
    TreeEnsemble model = train_regressor(x, y, x, y, cfg);
    REQUIRE(model.trees.size() == 1);
    const RegressionTree& tree = model.trees[0];
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == doctest::Approx(0.5));
    // base = 2.0; leaves move each side to its mean
    CHECK(model.predict({0.0}) == doctest::Approx(1.0));
    CHECK(model.predict({1.0}) == doctest::Approx(3.0));
    // hand trace both sides of the threshold
    CHECK(model.predict({0.49}) == doctest::Approx(1.0));
    CHECK(model.predict({0.51}) == doctest::Approx(3.0));
}

TEST_CASE("non-finite data is rejected naming the row") {
    std::vector<std::vector<double>> rows{{1.0}, {std::nan("")}, {2.0}, {3.0}, {4.0},
                                          {5.0}, {6.0},          {7.0}, {8.0}, {9.0}};
    std::vector<double> y{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    DataMatrix x = DataMatrix::from_rows(rows);
    try {
        train_regressor(x, y, x, y, small_config());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("empty dev set is a configuration error") {
    std::vector<std::vector<double>> rows{{1.0}, {2.0}};
    std::vector<double> y{1, 2};
    DataMatrix x = DataMatrix::from_rows(rows);
    DataMatrix empty;
    empty.cols = 1;
    CHECK_THROWS_AS(train_regressor(x, y, empty, {}, small_config()), ConfigError);
}

TEST_CASE("dart variant trains and predicts") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    StreamRng rng(9);
    for (int i = 0; i < 300; ++i) {
        double v = rng.next_double();
        rows.push_back({v});
        y.push_back(2.0 * v + 1.0);
    }
    RegressorConfig cfg = small_config();
    cfg.dart_rate = 0.1;
    cfg.max_iterations = 120;
    DataMatrix x = DataMatrix::from_rows(rows);
    TreeEnsemble model = train_regressor(x, y, x, y, cfg);
    CHECK(model.trees.size() > 1);
    // still close to the target function
    CHECK(model.predict({0.1}) == doctest::Approx(1.2).epsilon(0.2));
    CHECK(model.predict({0.9}) == doctest::Approx(2.8).epsilon(0.2));
}

TEST_CASE("feature table round-trips through CSV") {
    FeatureTable table;
    table.names = {"sim_0000", "dist_0000", "dist0"};
    table.x = DataMatrix::from_rows({{0.25, 1.5, 2.0}, {-0.5, 0.75, 3.25}});
    table.targets = {1.0, 4.0};
    std::string path =
        (std::filesystem::temp_directory_path() / "granuscore_features.csv").string();
    save_feature_table(table, path);
    FeatureTable loaded = load_feature_table(path);
    CHECK(loaded.names == table.names);
    CHECK(loaded.x.values == table.x.values);
    CHECK(loaded.targets == table.targets);
    std::remove(path.c_str());
}
