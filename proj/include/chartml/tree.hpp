#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "chartml/matrix.hpp"

namespace chartml::learn {

/// One decision tree stored as a flat node array (nodes[0] is the root).
/// Leaves carry a class-probability vector (classification) or a single
/// weight (gradient trees). Internal nodes keep the raw split quality and
/// their sample count so importances can be derived later.
struct Tree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double gain = 0.0;
        long long n_samples = 0;
        std::vector<double> leaf;

        bool is_leaf() const noexcept { return feature < 0; }
    };
    std::vector<Node> nodes;

    /// Descend to the leaf for one feature row. Split rule: x[feature] <=
    /// threshold goes left.
    const Node& leaf_for(const double* x) const;
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Exhaustive best split under Gini impurity decrease:
///   decrease = gini(parent) - (nL * gini(L) + nR * gini(R)) / n
/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values. Ties break toward the lower feature index, then the lower
/// threshold. Returns nullopt when the node is too small, pure, or no split
/// has positive decrease.
std::optional<SplitCandidate> best_split_gini(const Matrix& X, std::span<const int> y,
                                              int n_classes,
                                              std::span<const std::size_t> node_rows,
                                              std::span<const int> candidate_features,
                                              int min_samples_split);

/// Best split under the second-order objective:
///   gain = 0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) - gamma
/// Same threshold and tie rules as the Gini search. Returns nullopt when no
/// split has gain > 0.
std::optional<SplitCandidate> best_split_grad(const Matrix& X, std::span<const double> grad,
                                              std::span<const double> hess,
                                              std::span<const std::size_t> node_rows,
                                              std::span<const int> candidate_features,
                                              double reg_lambda, double gamma);

struct CartOptions {
    std::optional<int> max_depth;            // nullopt = unlimited
    int min_samples_split = 2;
    std::optional<int> features_per_split;   // nullopt = consider every feature
};

/// Grow a CART classification tree. Leaves hold the class distribution of
/// their training rows. `rng` only draws per-node feature subsets (unused
/// when every feature is considered).
Tree grow_cart_tree(const Matrix& X, std::span<const int> y, int n_classes,
                    std::span<const std::size_t> rows, const CartOptions& options,
                    std::mt19937_64& rng);

struct GradTreeOptions {
    int max_depth = 6;  // 0 grows a lone leaf
    double reg_lambda = 1.0;
    double gamma = 0.0;
};

/// Grow a regression tree on gradient/hessian targets; each leaf weight is
/// -G/(H+lambda) over its rows.
Tree grow_grad_tree(const Matrix& X, std::span<const double> grad, std::span<const double> hess,
                    std::span<const std::size_t> rows, const GradTreeOptions& options);

}  // namespace chartml::learn
