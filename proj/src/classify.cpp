#include "landmatch/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "landmatch/error.hpp"
#include "landmatch/rng.hpp"

namespace landmatch {

namespace {

double gini(int pos, int n) {
    if (n == 0) return 0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);
}

struct SplitChoice {
    bool valid = false;
    int feature = -1;
    double threshold = 0;
    double gain = 0;       // n*g_parent - nL*gL - nR*gR, raw-count weighted
};

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    const std::vector<int>& y;
    TreeOptions opts;
    Xoshiro256* rng = nullptr;       // null when mtry covers all features
    Eigen::VectorXd* importance = nullptr;
    Tree tree;

    // Scratch reused across nodes.
    std::vector<std::pair<double, int>> sorted;

    int build(std::vector<int>& rows, int depth) {
        const int n = static_cast<int>(rows.size());
        int pos = 0;
        for (int r : rows) pos += y[static_cast<std::size_t>(r)];

        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_index].n = n;
        tree.nodes[node_index].depth = depth;
        tree.nodes[node_index].match_fraction = n > 0 ? static_cast<double>(pos) / n : 0.0;

        if (pos == 0 || pos == n || depth >= opts.max_depth || n < 2 * opts.min_leaf)
            return node_index;

        const SplitChoice split = best_split(rows, pos);
        if (!split.valid) return node_index;

        if (importance) (*importance)[split.feature] += split.gain;

        std::vector<int> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (int r : rows) {
            if (x(r, split.feature) <= split.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[node_index].feature = split.feature;
        tree.nodes[node_index].threshold = split.threshold;
        const int left = build(left_rows, depth + 1);
        tree.nodes[node_index].left = left;
        const int right = build(right_rows, depth + 1);
        tree.nodes[node_index].right = right;
        return node_index;
    }

    SplitChoice best_split(const std::vector<int>& rows, int pos_total) {
        const int n = static_cast<int>(rows.size());
        const int n_features = static_cast<int>(x.cols());
        const double parent = static_cast<double>(n) * gini(pos_total, n);

        // Feature subset: all, or mtry sampled without replacement. Sampled
        // indices are evaluated in ascending order so ties stay deterministic.
        std::vector<int> features;
        if (rng && opts.mtry > 0 && opts.mtry < n_features) {
            while (static_cast<int>(features.size()) < opts.mtry) {
                const int f = static_cast<int>(rng->below(static_cast<std::uint64_t>(n_features)));
                if (std::find(features.begin(), features.end(), f) == features.end())
                    features.push_back(f);
            }
            std::sort(features.begin(), features.end());
        } else {
            features.resize(static_cast<std::size_t>(n_features));
            std::iota(features.begin(), features.end(), 0);
        }

        SplitChoice best;
        for (int f : features) {
            sorted.clear();
            for (int r : rows) sorted.emplace_back(x(r, f), y[static_cast<std::size_t>(r)]);
            std::sort(sorted.begin(), sorted.end());

            int left_n = 0, left_pos = 0;
            for (int i = 0; i + 1 < n; ++i) {
                left_n += 1;
                left_pos += sorted[static_cast<std::size_t>(i)].second;
                if (sorted[static_cast<std::size_t>(i)].first ==
                    sorted[static_cast<std::size_t>(i + 1)].first)
                    continue;  // not a boundary between distinct values
                const int right_n = n - left_n;
                if (left_n < opts.min_leaf || right_n < opts.min_leaf) continue;
                const double gain = parent - left_n * gini(left_pos, left_n) -
                                    right_n * gini(pos_total - left_pos, right_n);
                if (gain > best.gain + 1e-12 ||
                    (!best.valid && gain > 1e-12)) {
                    best.valid = true;
                    best.feature = f;
                    best.threshold = 0.5 * (sorted[static_cast<std::size_t>(i)].first +
                                            sorted[static_cast<std::size_t>(i + 1)].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }
};

int leaf_for(const Tree& tree, const Eigen::RowVectorXd& row) {
    if (tree.empty()) fail("schema-mismatch", "empty tree");
    int i = 0;
    while (tree.nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
        if (node.feature >= row.size())
            fail("schema-mismatch", "tree expects more features than the row provides");
        i = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return i;
}

}  // namespace

Tree fit_tree(const Eigen::MatrixXd& x, const std::vector<int>& y, const TreeOptions& opts) {
    if (x.rows() == 0 || x.cols() == 0) fail("empty-data", "no rows to fit");
    if (static_cast<Eigen::Index>(y.size()) != x.rows())
        fail("empty-data", "labels do not match rows");

    Xoshiro256 rng(opts.seed);
    TreeBuilder builder{x, y, opts, opts.mtry > 0 ? &rng : nullptr, nullptr, {}, {}};
    std::vector<int> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    builder.build(rows, 0);
    return std::move(builder.tree);
}

double predict(const Tree& tree, const Eigen::RowVectorXd& row) {
    return tree.nodes[static_cast<std::size_t>(leaf_for(tree, row))].match_fraction;
}

Forest fit_forest(const Eigen::MatrixXd& x, const std::vector<int>& y,
                  std::vector<std::string> feature_names, const ForestOptions& opts) {
    const auto n = static_cast<int>(x.rows());
    const auto n_features = static_cast<int>(x.cols());
    if (n == 0 || n_features == 0) fail("empty-data", "no rows to fit");
    if (static_cast<int>(y.size()) != n) fail("empty-data", "labels do not match rows");
    if (static_cast<int>(feature_names.size()) != n_features)
        fail("schema-mismatch", "feature names do not match columns");

    Forest forest;
    forest.feature_names = std::move(feature_names);
    forest.opts = opts;
    forest.trees.resize(static_cast<std::size_t>(opts.n_trees));
    forest.importance = Eigen::VectorXd::Zero(n_features);

    std::vector<Eigen::VectorXd> tree_importance(static_cast<std::size_t>(opts.n_trees));
    std::vector<std::vector<char>> in_bag(static_cast<std::size_t>(opts.n_trees));

    auto fit_one = [&](int t) {
        Xoshiro256 rng = Xoshiro256::stream(opts.seed, static_cast<std::uint64_t>(t));
        std::vector<int> rows(static_cast<std::size_t>(n));
        std::vector<char> bag(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            rows[static_cast<std::size_t>(i)] = r;
            bag[static_cast<std::size_t>(r)] = 1;
        }
        TreeOptions topts;
        topts.min_leaf = opts.min_leaf;
        topts.max_depth = opts.max_depth;
        topts.mtry = opts.mtry;
        tree_importance[static_cast<std::size_t>(t)] = Eigen::VectorXd::Zero(n_features);
        TreeBuilder builder{x,  y, topts, opts.mtry > 0 ? &rng : nullptr,
                            &tree_importance[static_cast<std::size_t>(t)], {}, {}};
        builder.build(rows, 0);
        forest.trees[static_cast<std::size_t>(t)] = std::move(builder.tree);
        in_bag[static_cast<std::size_t>(t)] = std::move(bag);
    };

    const int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        for (int t = 0; t < opts.n_trees; ++t) fit_one(t);
    } else {
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (;;) {
                    const int t = next.fetch_add(1);
                    if (t >= opts.n_trees) return;
                    fit_one(t);
                }
            });
        for (auto& th : workers) th.join();
    }

    for (const auto& imp : tree_importance) forest.importance += imp;
    forest.importance /= static_cast<double>(opts.n_trees);

    // Out-of-bag error: majority class vote per row over the trees that did
    // not see it; rows every tree saw are excluded.
    int wrong = 0, fp = 0, fn = 0, n_pos = 0, n_neg = 0;
    for (int r = 0; r < n; ++r) {
        int votes1 = 0, votes0 = 0;
        const Eigen::RowVectorXd row = x.row(r);
        for (int t = 0; t < opts.n_trees; ++t) {
            if (in_bag[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)]) continue;
            const double p = predict(forest.trees[static_cast<std::size_t>(t)], row);
            (p >= 0.5 ? votes1 : votes0) += 1;
        }
        if (votes1 + votes0 == 0) {
            forest.oob.n_excluded += 1;
            continue;
        }
        forest.oob.n_scored += 1;
        const int pred = votes1 > votes0 ? 1 : 0;
        const int truth = y[static_cast<std::size_t>(r)];
        (truth == 1 ? n_pos : n_neg) += 1;
        if (pred != truth) {
            wrong += 1;
            (truth == 1 ? fn : fp) += 1;
        }
    }
    if (forest.oob.n_scored > 0)
        forest.oob.weighted = static_cast<double>(wrong) / forest.oob.n_scored;
    if (n_neg > 0) forest.oob.false_positive = static_cast<double>(fp) / n_neg;
    if (n_pos > 0) forest.oob.false_negative = static_cast<double>(fn) / n_pos;
    return forest;
}

double predict(const Forest& forest, const Eigen::RowVectorXd& row) {
    if (forest.trees.empty()) fail("schema-mismatch", "forest has no trees");
    if (row.size() != static_cast<Eigen::Index>(forest.feature_names.size()))
        fail("schema-mismatch", "row length does not match the model's feature schema");
    double sum = 0;
    for (const Tree& tree : forest.trees) sum += predict(tree, row);
    return sum / static_cast<double>(forest.trees.size());
}

std::vector<std::pair<std::string, double>> importance_table(const Forest& forest) {
    std::vector<std::pair<std::string, double>> table;
    for (std::size_t f = 0; f < forest.feature_names.size(); ++f)
        table.emplace_back(forest.feature_names[f], forest.importance[static_cast<Eigen::Index>(f)]);
    std::stable_sort(table.begin(), table.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return table;
}

std::string forest_to_json(const Forest& forest) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "random_forest";
    doc["feature_names"] = forest.feature_names;
    doc["n_trees"] = forest.opts.n_trees;
    doc["mtry"] = forest.opts.mtry;
    doc["min_leaf"] = forest.opts.min_leaf;
    doc["max_depth"] = forest.opts.max_depth;
    doc["seed"] = forest.opts.seed;
    doc["oob"] = {{"weighted", forest.oob.weighted},
                  {"false_positive", forest.oob.false_positive},
                  {"false_negative", forest.oob.false_negative},
                  {"n_scored", forest.oob.n_scored},
                  {"n_excluded", forest.oob.n_excluded}};
    doc["importance"] = std::vector<double>(forest.importance.data(),
                                            forest.importance.data() + forest.importance.size());
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& tree : forest.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& node : tree.nodes) {
            if (node.feature < 0)
                nodes.push_back({node.match_fraction, node.n, node.depth});
            else
                nodes.push_back({node.feature, node.threshold, node.left, node.right});
        }
        trees.push_back(std::move(nodes));
    }
    doc["trees"] = std::move(trees);
    return doc.dump(2) + "\n";
}

Forest forest_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("model-schema-mismatch", std::string("model is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("schema_version").get<int>() != 1)
            fail("model-schema-mismatch", "unsupported model schema version");
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind != "random_forest" && kind != "tree")
            fail("model-schema-mismatch", "unsupported model kind '" + kind + "'");

        Forest forest;
        forest.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        forest.opts.n_trees = doc.at("n_trees").get<int>();
        forest.opts.mtry = doc.at("mtry").get<int>();
        forest.opts.min_leaf = doc.at("min_leaf").get<int>();
        forest.opts.max_depth = doc.at("max_depth").get<int>();
        forest.opts.seed = doc.at("seed").get<std::uint64_t>();
        const auto& oob = doc.at("oob");
        forest.oob.weighted = oob.at("weighted").get<double>();
        forest.oob.false_positive = oob.at("false_positive").get<double>();
        forest.oob.false_negative = oob.at("false_negative").get<double>();
        forest.oob.n_scored = oob.at("n_scored").get<int>();
        forest.oob.n_excluded = oob.at("n_excluded").get<int>();
        const auto importance = doc.at("importance").get<std::vector<double>>();
        forest.importance = Eigen::Map<const Eigen::VectorXd>(
            importance.data(), static_cast<Eigen::Index>(importance.size()));

        for (const auto& tree_doc : doc.at("trees")) {
            Tree tree;
            for (const auto& node_doc : tree_doc) {
                TreeNode node;
                if (node_doc.size() == 3) {
                    node.match_fraction = node_doc[0].get<double>();
                    node.n = node_doc[1].get<int>();
                    node.depth = node_doc[2].get<int>();
                } else if (node_doc.size() == 4) {
                    node.feature = node_doc[0].get<int>();
                    node.threshold = node_doc[1].get<double>();
                    node.left = node_doc[2].get<int>();
                    node.right = node_doc[3].get<int>();
                } else {
                    fail("model-schema-mismatch", "node arrays must have 3 or 4 entries");
                }
                tree.nodes.push_back(node);
            }
            if (tree.empty()) fail("model-schema-mismatch", "empty tree in model");
            forest.trees.push_back(std::move(tree));
        }
        if (forest.trees.empty()) fail("model-schema-mismatch", "model has no trees");
        return forest;
    } catch (const nlohmann::json::exception& e) {
        fail("model-schema-mismatch", std::string("model JSON malformed: ") + e.what());
    }
}

}  // namespace landmatch
