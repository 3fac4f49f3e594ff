#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace landmatch {

/// One node of a binary classification tree, stored flat. feature == -1
/// marks a leaf. Rows with x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0;
    int left = -1;
    int right = -1;
    double match_fraction = 0;
    int n = 0;
    int depth = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    bool empty() const { return nodes.empty(); }
};

struct TreeOptions {
    int min_leaf = 7;
    int max_depth = 30;
    int mtry = 0;              // features considered per split; 0 = all
    std::uint64_t seed = 0;    // only used when mtry > 0
};

/// Greedy Gini-impurity CART fit. Split candidates are midpoints between
/// consecutive distinct sorted feature values; both children must keep at
/// least min_leaf rows; ties prefer the lowest feature index, then the
/// smallest threshold.
Tree fit_tree(const Eigen::MatrixXd& x, const std::vector<int>& y, const TreeOptions& opts = {});

double predict(const Tree& tree, const Eigen::RowVectorXd& row);

struct ForestOptions {
    int n_trees = 300;
    int mtry = 2;
    int min_leaf = 7;
    int max_depth = 30;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct OobError {
    double weighted = 0;        // misclassified / scored rows
    double false_positive = 0;  // nonmatch rows predicted match
    double false_negative = 0;  // match rows predicted nonmatch
    int n_scored = 0;
    int n_excluded = 0;         // rows with no out-of-bag tree
};

struct Forest {
    std::vector<Tree> trees;
    std::vector<std::string> feature_names;
    ForestOptions opts;
    OobError oob;
    Eigen::VectorXd importance;  // mean decrease in Gini per feature
};

/// Bootstrapped trees with per-split feature sampling. Per-tree generators
/// are split off the seed by tree index, so any training parallelism yields
/// bit-identical forests.
Forest fit_forest(const Eigen::MatrixXd& x, const std::vector<int>& y,
                  std::vector<std::string> feature_names, const ForestOptions& opts = {});

double predict(const Forest& forest, const Eigen::RowVectorXd& row);

/// (name, importance) sorted by importance descending; ties keep the
/// feature-vector order.
std::vector<std::pair<std::string, double>> importance_table(const Forest& forest);

std::string forest_to_json(const Forest& forest);
Forest forest_from_json(const std::string& text);

}  // namespace landmatch
