#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace granuscore {

// Squared-error gradient-boosted trees with RMSE early stopping. Defaults
// are the tuned scorer configuration.
struct RegressorConfig {
    size_t max_iterations = 10000;
    size_t early_stopping_rounds = 200;
    double learning_rate = 0.0257596;
    size_t num_leaves = 138;
    int max_depth = -1; // -1 = unlimited
    size_t min_data_in_leaf = 57;
    double feature_fraction = 0.751449;
    double bagging_fraction = 0.638041;
    size_t bagging_freq = 7;
    size_t max_bins = 255;
    double dart_rate = 0.0; // 0 = plain gradient boosting; >0 enables dropout boosting
    uint64_t seed = 0;

    void validate() const; // throws ConfigError on out-of-range values
};

// Row-major numeric dataset.
struct DataMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> values; // rows * cols

    double at(size_t r, size_t c) const { return values[r * cols + c]; }
    const double* row(size_t r) const { return values.data() + r * cols; }

    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // node 0 is the root
    double predict(const double* features) const;
    size_t leaf_count() const;
};

// Additive model: base_score + sum of learning-rate-scaled tree outputs.
struct TreeEnsemble {
    double base_score = 0.0;
    size_t num_features = 0;
    std::vector<RegressionTree> trees;
    size_t best_iteration = 0; // trees kept after early stopping
    double best_dev_rmse = 0.0;

    double predict(const double* features, size_t n) const;
    double predict(const std::vector<double>& features) const;
};

// Fits the ensemble on (train, dev) with dev-RMSE early stopping and
// returns the best-dev-iteration model. Throws DataError naming the first
// row with a non-finite value, ConfigError when dev is empty.
TreeEnsemble train_regressor(const DataMatrix& train_x, const std::vector<double>& train_y,
                             const DataMatrix& dev_x, const std::vector<double>& dev_y,
                             const RegressorConfig& config);

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

// Columnar feature-matrix interchange: CSV with a header of feature names
// (plus a trailing "target" column when targets are present).
struct FeatureTable {
    std::vector<std::string> names;
    DataMatrix x;
    std::vector<double> targets; // empty when absent
};

void save_feature_table(const FeatureTable& table, const std::string& path);
FeatureTable load_feature_table(const std::string& path);

} // namespace granuscore
