#include "chartml/tree.hpp"

#include <algorithm>
#include <numeric>

namespace chartml::learn {

const Tree::Node& Tree::leaf_for(const double* x) const {
    const Node* node = &nodes.front();
    while (!node->is_leaf()) {
        node = &nodes[static_cast<std::size_t>(
            x[node->feature] <= node->threshold ? node->left : node->right)];
    }
    return *node;
}

namespace {

// Midpoint between consecutive distinct values. For adjacent doubles the
// midpoint can round up onto the higher value; fall back to the lower one so
// the `<=` split rule keeps both sides non-empty.
double split_threshold(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid < hi)) return lo;
    return mid;
}

struct FeatureOrder {
    std::vector<double> values;
    std::vector<std::size_t> order;  // positions into node_rows, sorted by value

    void load(const Matrix& X, std::span<const std::size_t> node_rows, int feature) {
        std::size_t n = node_rows.size();
        values.resize(n);
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = X(node_rows[i], static_cast<std::size_t>(feature));
            order[i] = i;
        }
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    }
};

}  // namespace

namespace {

// Exact comparison state for one Gini candidate. With SL/SR the sums of
// squared class counts on each side, the impurity decrease orders the same
// way as the rational SL/nl + SR/nr, so candidates compare exactly in
// integers and float rounding can never flip a tie.
struct GiniKey {
    long long sumsq_left = 0;
    long long n_left = 0;
    long long sumsq_right = 0;
    long long n_right = 0;

    bool better_than(const GiniKey& other) const {
        using Wide = __int128;
        Wide lhs = (Wide(sumsq_left) * n_right + Wide(sumsq_right) * n_left) *
                   (Wide(other.n_left) * other.n_right);
        Wide rhs = (Wide(other.sumsq_left) * other.n_right + Wide(other.sumsq_right) * other.n_left) *
                   (Wide(n_left) * n_right);
        return lhs > rhs;
    }
    // decrease > 0  <=>  n * (SL*nr + SR*nl) > ST * nl * nr
    bool positive_decrease(long long sumsq_total, long long n) const {
        using Wide = __int128;
        return Wide(n) * (Wide(sumsq_left) * n_right + Wide(sumsq_right) * n_left) >
               Wide(sumsq_total) * n_left * n_right;
    }
    double decrease(long long sumsq_total, long long n) const {
        double dn = static_cast<double>(n);
        auto impurity = [](long long sumsq, long long count) {
            double c = static_cast<double>(count);
            return 1.0 - static_cast<double>(sumsq) / (c * c);
        };
        return impurity(sumsq_total, n) -
               (static_cast<double>(n_left) * impurity(sumsq_left, n_left) +
                static_cast<double>(n_right) * impurity(sumsq_right, n_right)) /
                   dn;
    }
};

}  // namespace

std::optional<SplitCandidate> best_split_gini(const Matrix& X, std::span<const int> y,
                                              int n_classes,
                                              std::span<const std::size_t> node_rows,
                                              std::span<const int> candidate_features,
                                              int min_samples_split) {
    std::size_t n = node_rows.size();
    if (n < 2 || n < static_cast<std::size_t>(min_samples_split)) return std::nullopt;

    std::vector<long long> total(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t r : node_rows) ++total[static_cast<std::size_t>(y[r])];
    long long nonzero = std::count_if(total.begin(), total.end(), [](long long c) { return c > 0; });
    if (nonzero <= 1) return std::nullopt;  // pure node

    long long sumsq_total = 0;
    for (long long c : total) sumsq_total += c * c;

    std::optional<SplitCandidate> best;
    GiniKey best_key;
    FeatureOrder sorted;
    std::vector<long long> left(static_cast<std::size_t>(n_classes));
    for (int f : candidate_features) {
        sorted.load(X, node_rows, f);
        std::fill(left.begin(), left.end(), 0);
        GiniKey key;
        key.sumsq_right = sumsq_total;
        key.n_right = static_cast<long long>(n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            auto cls = static_cast<std::size_t>(y[node_rows[sorted.order[i]]]);
            // incremental sum of squared counts: (c+1)^2 - c^2 = 2c + 1
            key.sumsq_left += 2 * left[cls] + 1;
            key.sumsq_right -= 2 * (total[cls] - left[cls]) - 1;
            ++left[cls];
            ++key.n_left;
            --key.n_right;
            double lo = sorted.values[sorted.order[i]];
            double hi = sorted.values[sorted.order[i + 1]];
            if (!(lo < hi)) continue;
            if (!best || key.better_than(best_key)) {
                best = SplitCandidate{f, split_threshold(lo, hi), 0.0};
                best_key = key;
            }
        }
    }
    if (!best || !best_key.positive_decrease(sumsq_total, static_cast<long long>(n))) {
        return std::nullopt;
    }
    best->gain = best_key.decrease(sumsq_total, static_cast<long long>(n));
    return best;
}

std::optional<SplitCandidate> best_split_grad(const Matrix& X, std::span<const double> grad,
                                              std::span<const double> hess,
                                              std::span<const std::size_t> node_rows,
                                              std::span<const int> candidate_features,
                                              double reg_lambda, double gamma) {
    std::size_t n = node_rows.size();
    if (n < 2) return std::nullopt;

    double g_total = 0.0;
    double h_total = 0.0;
    for (std::size_t r : node_rows) {
        g_total += grad[r];
        h_total += hess[r];
    }
    double parent_score = g_total * g_total / (h_total + reg_lambda);

    std::optional<SplitCandidate> best;
    FeatureOrder sorted;
    for (int f : candidate_features) {
        sorted.load(X, node_rows, f);
        double gl = 0.0;
        double hl = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            std::size_t r = node_rows[sorted.order[i]];
            gl += grad[r];
            hl += hess[r];
            double lo = sorted.values[sorted.order[i]];
            double hi = sorted.values[sorted.order[i + 1]];
            if (!(lo < hi)) continue;
            double gr = g_total - gl;
            double hr = h_total - hl;
            double gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) -
                                 parent_score) -
                          gamma;
            if (!best || gain > best->gain) {
                best = SplitCandidate{f, split_threshold(lo, hi), gain};
            }
        }
    }
    if (best && best->gain <= 0.0) return std::nullopt;
    return best;
}

namespace {

std::vector<int> pick_features(std::size_t n_features, std::optional<int> per_split,
                               std::mt19937_64& rng) {
    std::vector<int> all(n_features);
    std::iota(all.begin(), all.end(), 0);
    if (!per_split || static_cast<std::size_t>(*per_split) >= n_features) return all;
    // partial Fisher-Yates, then ascending so tie-breaking stays by index
    auto m = static_cast<std::size_t>(*per_split);
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n_features - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
}

template <typename MakeLeaf, typename FindSplit>
int build_node(Tree& tree, const Matrix& X, std::vector<std::size_t>& rows, int depth,
               std::optional<int> max_depth, const MakeLeaf& make_leaf,
               const FindSplit& find_split) {
    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(id)].n_samples = static_cast<long long>(rows.size());

    std::optional<SplitCandidate> split;
    if (!max_depth || depth < *max_depth) split = find_split(rows);
    if (!split) {
        tree.nodes[static_cast<std::size_t>(id)].leaf = make_leaf(rows);
        return id;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::size_t r : rows) {
        (X(r, static_cast<std::size_t>(split->feature)) <= split->threshold ? left_rows
                                                                            : right_rows)
            .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    int left = build_node(tree, X, left_rows, depth + 1, max_depth, make_leaf, find_split);
    int right = build_node(tree, X, right_rows, depth + 1, max_depth, make_leaf, find_split);
    Tree::Node& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.gain = split->gain;
    node.left = left;
    node.right = right;
    return id;
}

}  // namespace

Tree grow_cart_tree(const Matrix& X, std::span<const int> y, int n_classes,
                    std::span<const std::size_t> rows, const CartOptions& options,
                    std::mt19937_64& rng) {
    Tree tree;
    auto make_leaf = [&](const std::vector<std::size_t>& node_rows) {
        std::vector<double> dist(static_cast<std::size_t>(n_classes), 0.0);
        for (std::size_t r : node_rows) dist[static_cast<std::size_t>(y[r])] += 1.0;
        for (double& d : dist) d /= static_cast<double>(node_rows.size());
        return dist;
    };
    auto find_split = [&](const std::vector<std::size_t>& node_rows) {
        auto features = pick_features(X.cols(), options.features_per_split, rng);
        return best_split_gini(X, y, n_classes, node_rows, features, options.min_samples_split);
    };
    std::vector<std::size_t> root_rows(rows.begin(), rows.end());
    build_node(tree, X, root_rows, 0, options.max_depth, make_leaf, find_split);
    return tree;
}

Tree grow_grad_tree(const Matrix& X, std::span<const double> grad, std::span<const double> hess,
                    std::span<const std::size_t> rows, const GradTreeOptions& options) {
    Tree tree;
    auto make_leaf = [&](const std::vector<std::size_t>& node_rows) {
        double g = 0.0;
        double h = 0.0;
        for (std::size_t r : node_rows) {
            g += grad[r];
            h += hess[r];
        }
        return std::vector<double>{-g / (h + options.reg_lambda)};
    };
    std::vector<int> all_features(X.cols());
    std::iota(all_features.begin(), all_features.end(), 0);
    auto find_split = [&](const std::vector<std::size_t>& node_rows) {
        return best_split_grad(X, grad, hess, node_rows, all_features, options.reg_lambda,
                               options.gamma);
    };
    std::vector<std::size_t> root_rows(rows.begin(), rows.end());
    build_node(tree, X, root_rows, 0, options.max_depth, make_leaf, find_split);
    return tree;
}

}  // namespace chartml::learn
