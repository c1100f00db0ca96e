#include "granuscore/gbdt.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"
#include "granuscore/text_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace granuscore {

void RegressorConfig::validate() const {
    if (max_iterations < 1) throw ConfigError("regressor: max_iterations must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("regressor: learning_rate must be > 0");
    if (num_leaves < 2) throw ConfigError("regressor: num_leaves must be >= 2");
    if (min_data_in_leaf < 1) throw ConfigError("regressor: min_data_in_leaf must be >= 1");
    if (!(feature_fraction > 0.0 && feature_fraction <= 1.0)) {
        throw ConfigError("regressor: feature_fraction must be in (0, 1]");
    }
    if (!(bagging_fraction > 0.0 && bagging_fraction <= 1.0)) {
        throw ConfigError("regressor: bagging_fraction must be in (0, 1]");
    }
    if (max_bins < 2) throw ConfigError("regressor: max_bins must be >= 2");
    if (dart_rate < 0.0 || dart_rate >= 1.0) {
        throw ConfigError("regressor: dart_rate must be in [0, 1)");
    }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    DataMatrix m;
    m.rows = rows.size();
    m.cols = rows.empty() ? 0 : rows.front().size();
    m.values.reserve(m.rows * m.cols);
    for (const auto& r : rows) {
        if (r.size() != m.cols) throw DataError("ragged feature rows");
        m.values.insert(m.values.end(), r.begin(), r.end());
    }
    return m;
}

double RegressionTree::predict(const double* features) const {
    int node = 0;
    while (!nodes[static_cast<size_t>(node)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<size_t>(node)];
        node = features[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(node)].leaf_value;
}

size_t RegressionTree::leaf_count() const {
    size_t n = 0;
    for (const auto& node : nodes) {
        if (node.is_leaf()) ++n;
    }
    return n;
}

double TreeEnsemble::predict(const double* features, size_t n) const {
    if (n != num_features) {
        throw DataError("ensemble expects " + std::to_string(num_features) + " features, got " +
                        std::to_string(n));
    }
    double out = base_score;
    for (const auto& t : trees) out += t.predict(features);
    return out;
}

double TreeEnsemble::predict(const std::vector<double>& features) const {
    return predict(features.data(), features.size());
}

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

namespace {

// Histogram binning: per-feature upper-bound thresholds; bin b holds values
// <= threshold[b] (last bin unbounded).
struct FeatureBins {
    std::vector<std::vector<double>> thresholds; // per feature, size = bins-1
    std::vector<uint16_t> binned;                // rows * cols
    size_t rows = 0, cols = 0;

    uint16_t bin_of(size_t r, size_t c) const { return binned[r * cols + c]; }
};

FeatureBins build_bins(const DataMatrix& x, size_t max_bins) {
    FeatureBins fb;
    fb.rows = x.rows;
    fb.cols = x.cols;
    fb.thresholds.resize(x.cols);
    fb.binned.resize(x.rows * x.cols);
    std::vector<double> col(x.rows);
    for (size_t c = 0; c < x.cols; ++c) {
        for (size_t r = 0; r < x.rows; ++r) col[r] = x.at(r, c);
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        auto& thr = fb.thresholds[c];
        if (sorted.size() <= max_bins) {
            thr.reserve(sorted.size() > 0 ? sorted.size() - 1 : 0);
            for (size_t i = 0; i + 1 < sorted.size(); ++i) {
                thr.push_back(sorted[i] + (sorted[i + 1] - sorted[i]) / 2.0);
            }
        } else {
            thr.reserve(max_bins - 1);
            for (size_t b = 1; b < max_bins; ++b) {
                size_t pos = b * sorted.size() / max_bins;
                double t = sorted[pos - 1] + (sorted[pos] - sorted[pos - 1]) / 2.0;
                if (thr.empty() || t > thr.back()) thr.push_back(t);
            }
        }
        for (size_t r = 0; r < x.rows; ++r) {
            size_t b = static_cast<size_t>(
                std::upper_bound(thr.begin(), thr.end(), col[r]) - thr.begin());
            fb.binned[r * x.cols + c] = static_cast<uint16_t>(b);
        }
    }
    return fb;
}

struct SplitResult {
    double gain = -1.0;
    size_t feature = 0;
    uint16_t bin = 0; // rightmost bin that goes left
    double sum_left = 0.0;
    size_t count_left = 0;
};

struct LeafState {
    int node = -1;
    std::vector<size_t> rows;
    double sum_grad = 0.0;
    int depth = 0;
    SplitResult best;
};

constexpr double kMinGain = 1e-12;

// Best variance-reducing split for one leaf over the sampled features.
SplitResult find_best_split(const FeatureBins& fb, const std::vector<size_t>& rows,
                            const std::vector<double>& grad, double sum_grad,
                            const std::vector<size_t>& features, size_t min_leaf) {
    SplitResult best;
    size_t n = rows.size();
    if (n < 2 * min_leaf) return best;
    double parent_score = sum_grad * sum_grad / static_cast<double>(n);
    std::vector<double> bin_sum;
    std::vector<size_t> bin_cnt;
    for (size_t f : features) {
        size_t nbins = fb.thresholds[f].size() + 1;
        if (nbins < 2) continue;
        bin_sum.assign(nbins, 0.0);
        bin_cnt.assign(nbins, 0);
        for (size_t r : rows) {
            uint16_t b = fb.bin_of(r, f);
            bin_sum[b] += grad[r];
            bin_cnt[b] += 1;
        }
        double left_sum = 0.0;
        size_t left_cnt = 0;
        for (size_t b = 0; b + 1 < nbins; ++b) {
            left_sum += bin_sum[b];
            left_cnt += bin_cnt[b];
            if (left_cnt < min_leaf) continue;
            size_t right_cnt = n - left_cnt;
            if (right_cnt < min_leaf) break;
            double right_sum = sum_grad - left_sum;
            double gain = left_sum * left_sum / static_cast<double>(left_cnt) +
                          right_sum * right_sum / static_cast<double>(right_cnt) - parent_score;
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = f;
                best.bin = static_cast<uint16_t>(b);
                best.sum_left = left_sum;
                best.count_left = left_cnt;
            }
        }
    }
    return best;
}

RegressionTree build_tree(const FeatureBins& fb, const std::vector<size_t>& bag,
                          const std::vector<double>& grad, const std::vector<size_t>& features,
                          const RegressorConfig& cfg, double scale) {
    RegressionTree tree;
    LeafState root;
    root.node = 0;
    root.rows = bag;
    root.sum_grad = 0.0;
    for (size_t r : bag) root.sum_grad += grad[r];
    tree.nodes.push_back(TreeNode{});
    tree.nodes[0].leaf_value =
        -scale * root.sum_grad / static_cast<double>(std::max<size_t>(1, bag.size()));

    std::vector<LeafState> leaves;
    root.best = find_best_split(fb, root.rows, grad, root.sum_grad, features, cfg.min_data_in_leaf);
    leaves.push_back(std::move(root));

    size_t leaf_count = 1;
    while (leaf_count < cfg.num_leaves) {
        // expand the leaf with the largest gain
        size_t best_i = leaves.size();
        double best_gain = kMinGain;
        for (size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].best.gain > best_gain) {
                best_gain = leaves[i].best.gain;
                best_i = i;
            }
        }
        if (best_i == leaves.size()) break;

        LeafState leaf = std::move(leaves[best_i]);
        leaves.erase(leaves.begin() + static_cast<long>(best_i));
        const SplitResult& sp = leaf.best;

        LeafState left, right;
        left.depth = right.depth = leaf.depth + 1;
        left.rows.reserve(sp.count_left);
        right.rows.reserve(leaf.rows.size() - sp.count_left);
        for (size_t r : leaf.rows) {
            if (fb.bin_of(r, sp.feature) <= sp.bin) {
                left.rows.push_back(r);
            } else {
                right.rows.push_back(r);
            }
        }
        left.sum_grad = sp.sum_left;
        right.sum_grad = leaf.sum_grad - sp.sum_left;

        TreeNode& parent = tree.nodes[static_cast<size_t>(leaf.node)];
        parent.feature = static_cast<int>(sp.feature);
        parent.threshold = fb.thresholds[sp.feature][sp.bin];
        parent.left = static_cast<int>(tree.nodes.size());
        parent.right = static_cast<int>(tree.nodes.size() + 1);
        left.node = parent.left;
        right.node = parent.right;

        TreeNode lnode, rnode;
        lnode.leaf_value = -scale * left.sum_grad / static_cast<double>(left.rows.size());
        rnode.leaf_value = -scale * right.sum_grad / static_cast<double>(right.rows.size());
        tree.nodes.push_back(lnode);
        tree.nodes.push_back(rnode);
        ++leaf_count;

        bool depth_ok = cfg.max_depth < 0 || left.depth < cfg.max_depth;
        if (depth_ok) {
            left.best =
                find_best_split(fb, left.rows, grad, left.sum_grad, features, cfg.min_data_in_leaf);
            right.best = find_best_split(fb, right.rows, grad, right.sum_grad, features,
                                         cfg.min_data_in_leaf);
        }
        leaves.push_back(std::move(left));
        leaves.push_back(std::move(right));
    }
    return tree;
}

void check_finite(const DataMatrix& x, const std::vector<double>& y, const char* which) {
    for (size_t r = 0; r < x.rows; ++r) {
        for (size_t c = 0; c < x.cols; ++c) {
            if (!std::isfinite(x.at(r, c))) {
                throw DataError(std::string(which) + " row " + std::to_string(r) +
                                ": non-finite feature at column " + std::to_string(c));
            }
        }
        if (!std::isfinite(y[r])) {
            throw DataError(std::string(which) + " row " + std::to_string(r) +
                            ": non-finite target");
        }
    }
}

} // namespace

TreeEnsemble train_regressor(const DataMatrix& train_x, const std::vector<double>& train_y,
                             const DataMatrix& dev_x, const std::vector<double>& dev_y,
                             const RegressorConfig& cfg) {
    cfg.validate();
    if (train_x.rows == 0) throw DataError("train_regressor: empty training set");
    if (dev_x.rows == 0) throw ConfigError("train_regressor: empty dev set");
    if (train_x.rows != train_y.size() || dev_x.rows != dev_y.size()) {
        throw DataError("train_regressor: feature/target row count mismatch");
    }
    if (train_x.cols != dev_x.cols) {
        throw ConfigError("train_regressor: train and dev feature widths differ");
    }
    check_finite(train_x, train_y, "train");
    check_finite(dev_x, dev_y, "dev");

    TreeEnsemble model;
    model.num_features = train_x.cols;
    model.base_score =
        std::accumulate(train_y.begin(), train_y.end(), 0.0) / static_cast<double>(train_y.size());

    FeatureBins bins = build_bins(train_x, cfg.max_bins);

    const size_t n = train_x.rows;
    std::vector<double> train_pred(n, model.base_score);
    std::vector<double> dev_pred(dev_x.rows, model.base_score);
    std::vector<double> grad(n, 0.0);

    std::vector<size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    std::vector<size_t> all_features(train_x.cols);
    std::iota(all_features.begin(), all_features.end(), 0);

    const size_t feat_count = std::max<size_t>(
        1, static_cast<size_t>(std::ceil(cfg.feature_fraction * static_cast<double>(train_x.cols))));
    const size_t bag_count = std::max<size_t>(
        1, static_cast<size_t>(std::ceil(cfg.bagging_fraction * static_cast<double>(n))));

    std::vector<size_t> bag = all_rows;
    std::vector<double> tree_scale; // DART rescaling factors, 1.0 for plain boosting

    double best_rmse = std::numeric_limits<double>::infinity();
    size_t best_iter = 0;

    const bool use_dart = cfg.dart_rate > 0.0;

    for (size_t iter = 0; iter < cfg.max_iterations; ++iter) {
        // bagging: redraw the row subset every bagging_freq iterations
        if (cfg.bagging_fraction < 1.0 && cfg.bagging_freq > 0 && iter % cfg.bagging_freq == 0) {
            StreamRng rng(cfg.seed, 0xba60000000ULL + iter);
            std::vector<size_t> picks = rng.sample_without_replacement(n, bag_count);
            std::sort(picks.begin(), picks.end());
            bag = std::move(picks);
        }

        std::vector<size_t> dropped;
        if (use_dart && !model.trees.empty()) {
            StreamRng rng(cfg.seed, 0xda57000000ULL + iter);
            for (size_t t = 0; t < model.trees.size(); ++t) {
                if (rng.next_double() < cfg.dart_rate) dropped.push_back(t);
            }
            if (dropped.empty()) {
                dropped.push_back(static_cast<size_t>(rng.next_below(model.trees.size())));
            }
        }

        // gradients of squared error: residual of the (possibly dropped) ensemble
        if (dropped.empty()) {
            for (size_t r = 0; r < n; ++r) grad[r] = train_pred[r] - train_y[r];
        } else {
            for (size_t r = 0; r < n; ++r) {
                double p = train_pred[r];
                for (size_t t : dropped) {
                    p -= tree_scale[t] * model.trees[t].predict(train_x.row(r));
                }
                grad[r] = p - train_y[r];
            }
        }

        std::vector<size_t> features = all_features;
        if (feat_count < train_x.cols) {
            StreamRng rng(cfg.seed, 0xfea0000000ULL + iter);
            std::vector<size_t> picks = rng.sample_without_replacement(train_x.cols, feat_count);
            std::sort(picks.begin(), picks.end());
            features = std::move(picks);
        }

        RegressionTree tree = build_tree(bins, bag, grad, features, cfg, cfg.learning_rate);
        bool has_split = tree.nodes.size() > 1;
        if (!has_split && iter > 0) {
            break; // nothing left to split on; early stopping bookkeeping below is final
        }

        double new_scale = 1.0;
        if (use_dart && !dropped.empty()) {
            double k = static_cast<double>(dropped.size());
            new_scale = 1.0 / (k + 1.0);
            double shrink = k / (k + 1.0);
            // fold the rescale of dropped trees into the cached predictions
            for (size_t r = 0; r < n; ++r) {
                double delta = 0.0;
                for (size_t t : dropped) {
                    delta += (shrink - 1.0) * tree_scale[t] * model.trees[t].predict(train_x.row(r));
                }
                train_pred[r] += delta;
            }
            for (size_t r = 0; r < dev_x.rows; ++r) {
                double delta = 0.0;
                for (size_t t : dropped) {
                    delta += (shrink - 1.0) * tree_scale[t] * model.trees[t].predict(dev_x.row(r));
                }
                dev_pred[r] += delta;
            }
            for (size_t t : dropped) tree_scale[t] *= shrink;
        }

        model.trees.push_back(std::move(tree));
        tree_scale.push_back(new_scale);
        const RegressionTree& added = model.trees.back();
        for (size_t r = 0; r < n; ++r) train_pred[r] += new_scale * added.predict(train_x.row(r));
        for (size_t r = 0; r < dev_x.rows; ++r) {
            dev_pred[r] += new_scale * added.predict(dev_x.row(r));
        }

        double dev_rmse = rmse(dev_pred, dev_y);
        if (dev_rmse < best_rmse) {
            best_rmse = dev_rmse;
            best_iter = model.trees.size();
        }
        if (model.trees.size() - best_iter >= cfg.early_stopping_rounds) break;
    }

    // keep the best-dev-iteration prefix (plain boosting); DART rescales
    // earlier trees, so the prefix is only truncated when scales stay 1
    if (!use_dart) {
        model.trees.resize(best_iter);
    } else {
        for (size_t t = 0; t < model.trees.size(); ++t) {
            if (tree_scale[t] != 1.0) {
                for (auto& node : model.trees[t].nodes) node.leaf_value *= tree_scale[t];
            }
        }
    }
    model.best_iteration = model.trees.size();
    model.best_dev_rmse = best_rmse;
    if (model.trees.empty() && best_rmse == std::numeric_limits<double>::infinity()) {
        model.best_dev_rmse = rmse(std::vector<double>(dev_x.rows, model.base_score), dev_y);
    }
    return model;
}

void save_feature_table(const FeatureTable& table, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open feature table for writing: " + path);
    bool with_target = !table.targets.empty();
    for (size_t c = 0; c < table.names.size(); ++c) {
        if (c) f << ",";
        f << table.names[c];
    }
    if (with_target) f << ",target";
    f << "\n";
    f.precision(17);
    for (size_t r = 0; r < table.x.rows; ++r) {
        for (size_t c = 0; c < table.x.cols; ++c) {
            if (c) f << ",";
            f << table.x.at(r, c);
        }
        if (with_target) f << "," << table.targets[r];
        f << "\n";
    }
    if (!f) throw ArchiveError("write failure on feature table: " + path);
}

FeatureTable load_feature_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ArchiveError("cannot open feature table: " + path);
    FeatureTable table;
    std::string line;
    if (!std::getline(f, line)) throw ArchiveError("feature table empty: " + path);
    std::vector<std::string> header = split(trim(line), ',');
    bool with_target = !header.empty() && header.back() == "target";
    if (with_target) header.pop_back();
    table.names = header;
    table.x.cols = header.size();
    size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split(trim(line), ',');
        size_t expect = table.x.cols + (with_target ? 1 : 0);
        if (cells.size() != expect) {
            throw DataError("feature table line " + std::to_string(lineno) + ": expected " +
                            std::to_string(expect) + " cells, got " + std::to_string(cells.size()));
        }
        for (size_t c = 0; c < table.x.cols; ++c) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
            if (ec != std::errc{}) {
                throw DataError("feature table line " + std::to_string(lineno) +
                                ": bad number in column " + std::to_string(c));
            }
            table.x.values.push_back(v);
        }
        if (with_target) {
            double v = 0.0;
            const std::string& cell = cells.back();
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{}) {
                throw DataError("feature table line " + std::to_string(lineno) + ": bad target");
            }
            table.targets.push_back(v);
        }
        table.x.rows += 1;
    }
    return table;
}

} // namespace granuscore
