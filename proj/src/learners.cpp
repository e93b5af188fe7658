#include "chartml/learners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "chartml/error.hpp"
#include "chartml/kernels.hpp"

namespace chartml::learn {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view variant_name(const LearnerSpec& spec) {
    switch (spec.index()) {
        case 0: return "logreg";
        case 1: return "knn";
        case 2: return "rf";
        default: return "gbt";
    }
}

LearnerSpec default_spec(std::string_view name) {
    if (name == "logreg") return LogRegParams{};
    if (name == "knn") return KnnParams{};
    if (name == "rf") return ForestParams{};
    if (name == "gbt") return GbtParams{};
    throw ValueError(fmt::format("unknown model '{}'", name));
}

namespace {

void check_training_input(const Matrix& X, std::span<const int> y, int n_classes) {
    if (X.rows() == 0) throw ValueError("empty training set");
    if (X.rows() != y.size()) {
        throw ValueError(
            fmt::format("X has {} rows but y has {} labels", X.rows(), y.size()));
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= n_classes) {
            throw ValueError(fmt::format("label {} at row {} outside [0, {})", y[i], i, n_classes));
        }
    }
    for (double v : X.data()) {
        if (is_missing(v)) throw ValueError("training matrix contains missing cells");
    }
}

void check_predict_columns(const TrainedModel& model, const Matrix& X) {
    if (X.cols() != model.column_names.size()) {
        throw ValueError(fmt::format("model was trained on {} columns, input has {}",
                                     model.column_names.size(), X.cols()));
    }
}

int argmax_lowest(const double* v, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (v[i] > v[best]) best = i;
    }
    return static_cast<int>(best);
}

// in-place softmax with max-shift stabilization
void softmax_row(double* scores, std::size_t k) {
    double hi = scores[0];
    for (std::size_t i = 1; i < k; ++i) hi = std::max(hi, scores[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        scores[i] = std::exp(scores[i] - hi);
        total += scores[i];
    }
    for (std::size_t i = 0; i < k; ++i) scores[i] /= total;
}

// --------------------------------------------------------------- logistic

Matrix logreg_scores(const Matrix& weights, std::span<const double> bias, const Matrix& X) {
    std::size_t k = weights.rows();
    Matrix scores(X.rows(), k);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const double* xi = X.row(i);
        double* si = scores.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            si[c] = kernels::dot(xi, weights.row(c), X.cols()) + bias[c];
        }
    }
    return scores;
}

LogRegModel train_logreg(const LogRegParams& params, const Matrix& X, std::span<const int> y,
                         int n_classes) {
    auto k = static_cast<std::size_t>(n_classes);
    LogRegModel model;
    model.params = params;
    model.weights = Matrix(k, X.cols(), 0.0);
    model.bias.assign(k, 0.0);

    Matrix grad_w(k, X.cols());
    std::vector<double> grad_b(k);
    for (int iter = 0; iter < params.max_iters; ++iter) {
        logreg_gradient(model.weights, model.bias, X, y, params.l2_lambda, grad_w, grad_b);
        double norm_sq = kernels::dot(grad_w.data().data(), grad_w.data().data(),
                                      grad_w.data().size()) +
                         kernels::dot(grad_b.data(), grad_b.data(), grad_b.size());
        if (std::sqrt(norm_sq) < params.tol) break;
        kernels::axpy(-params.learning_rate, grad_w.data().data(), model.weights.data().data(),
                      grad_w.data().size());
        kernels::axpy(-params.learning_rate, grad_b.data(), model.bias.data(), grad_b.size());
        model.iterations_run = iter + 1;
    }
    return model;
}

Matrix predict_proba_logreg(const LogRegModel& model, const Matrix& X) {
    Matrix proba = logreg_scores(model.weights, model.bias, X);
    for (std::size_t i = 0; i < proba.rows(); ++i) softmax_row(proba.row(i), proba.cols());
    return proba;
}

// --------------------------------------------------------------------- knn

KnnModel train_knn(const KnnParams& params, const Matrix& X, std::span<const int> y) {
    if (params.k < 1) throw ValueError(fmt::format("knn k must be >= 1, got {}", params.k));
    if (static_cast<std::size_t>(params.k) > X.rows()) {
        throw ValueError(
            fmt::format("knn k = {} exceeds the {} training rows", params.k, X.rows()));
    }
    return KnnModel{params, X, std::vector<int>(y.begin(), y.end())};
}

Matrix predict_proba_knn(const KnnModel& model, const Matrix& X, int n_classes) {
    std::size_t n_train = model.train_x.rows();
    auto k = static_cast<std::size_t>(model.params.k);
    Matrix proba(X.rows(), static_cast<std::size_t>(n_classes), 0.0);
    std::vector<double> dist(n_train);
    std::vector<std::size_t> idx(n_train);
    for (std::size_t q = 0; q < X.rows(); ++q) {
        const double* xq = X.row(q);
        for (std::size_t i = 0; i < n_train; ++i) {
            dist[i] = kernels::l2sq(xq, model.train_x.row(i), X.cols());
        }
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        // distance ties break toward the lower training-row index
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                          });
        double* row = proba.row(q);
        for (std::size_t j = 0; j < k; ++j) {
            row[static_cast<std::size_t>(model.train_y[idx[j]])] += 1.0 / static_cast<double>(k);
        }
    }
    return proba;
}

// ------------------------------------------------------------------ forest

std::mt19937_64 tree_rng(std::uint64_t ensemble_seed, std::size_t tree_index) {
    // fixed mix so every tree gets an independent deterministic stream
    return std::mt19937_64(ensemble_seed + 0x9E3779B97F4A7C15ULL * (tree_index + 1));
}

ForestModel train_forest(const ForestParams& params, const Matrix& X, std::span<const int> y,
                         int n_classes) {
    if (params.n_estimators < 1) {
        throw ValueError(fmt::format("n_estimators must be >= 1, got {}", params.n_estimators));
    }
    CartOptions options;
    options.max_depth = params.max_depth;
    options.min_samples_split = params.min_samples_split;
    options.features_per_split = params.features_per_split
                                     ? params.features_per_split
                                     : std::optional<int>(static_cast<int>(
                                           std::ceil(std::sqrt(static_cast<double>(X.cols())))));

    ForestModel model;
    model.params = params;
    model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
    std::vector<std::size_t> rows(X.rows());
    for (std::size_t t = 0; t < static_cast<std::size_t>(params.n_estimators); ++t) {
        auto rng = tree_rng(params.seed, t);
        if (params.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, X.rows() - 1);
            for (std::size_t& r : rows) r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        model.trees.push_back(grow_cart_tree(X, y, n_classes, rows, options, rng));
    }
    return model;
}

Matrix predict_proba_forest(const ForestModel& model, const Matrix& X, int n_classes) {
    Matrix proba(X.rows(), static_cast<std::size_t>(n_classes), 0.0);
    double inv_trees = 1.0 / static_cast<double>(model.trees.size());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double* row = proba.row(i);
        for (const Tree& tree : model.trees) {
            const Tree::Node& leaf = tree.leaf_for(X.row(i));
            for (std::size_t c = 0; c < leaf.leaf.size(); ++c) row[c] += leaf.leaf[c] * inv_trees;
        }
    }
    return proba;
}

// --------------------------------------------------------------------- gbt

double softmax_data_loss(const Matrix& raw_scores, std::span<const int> y) {
    double total = 0.0;
    std::vector<double> buf(raw_scores.cols());
    for (std::size_t i = 0; i < raw_scores.rows(); ++i) {
        std::copy_n(raw_scores.row(i), raw_scores.cols(), buf.begin());
        softmax_row(buf.data(), buf.size());
        total -= std::log(std::max(buf[static_cast<std::size_t>(y[i])], 1e-300));
    }
    return total / static_cast<double>(raw_scores.rows());
}

}  // namespace

double logreg_loss(const Matrix& weights, std::span<const double> bias, const Matrix& X,
                   std::span<const int> y, double l2_lambda) {
    Matrix scores = logreg_scores(weights, bias, X);
    double loss = softmax_data_loss(scores, y);
    double reg = kernels::dot(weights.data().data(), weights.data().data(), weights.data().size());
    return loss + 0.5 * l2_lambda * reg;
}

void logreg_gradient(const Matrix& weights, std::span<const double> bias, const Matrix& X,
                     std::span<const int> y, double l2_lambda, Matrix& grad_w,
                     std::vector<double>& grad_b) {
    std::size_t k = weights.rows();
    std::size_t p = weights.cols();
    grad_w = Matrix(k, p, 0.0);
    grad_b.assign(k, 0.0);

    Matrix proba = logreg_scores(weights, bias, X);
    for (std::size_t i = 0; i < proba.rows(); ++i) softmax_row(proba.row(i), k);

    double inv_n = 1.0 / static_cast<double>(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const double* xi = X.row(i);
        const double* pi = proba.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            double residual = pi[c] - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0);
            kernels::axpy(residual * inv_n, xi, grad_w.row(c), p);
            grad_b[c] += residual * inv_n;
        }
    }
    kernels::axpy(l2_lambda, weights.data().data(), grad_w.data().data(), grad_w.data().size());
}

GbtModel train_gbt(const GbtParams& params, const Matrix& X, std::span<const int> y,
                   int n_classes, std::vector<double>* loss_trace) {
    if (params.n_rounds < 0) throw ValueError("n_rounds must be >= 0");
    auto k = static_cast<std::size_t>(n_classes);
    std::size_t n = X.rows();

    GbtModel model;
    model.params = params;
    model.base_score.resize(k);
    std::vector<std::size_t> class_counts(k, 0);
    for (int label : y) ++class_counts[static_cast<std::size_t>(label)];
    bool all_present = std::all_of(class_counts.begin(), class_counts.end(),
                                   [](std::size_t c) { return c > 0; });
    for (std::size_t c = 0; c < k; ++c) {
        // log prior; smoothed only when some class never occurs in training
        double prior = all_present
                           ? static_cast<double>(class_counts[c]) / static_cast<double>(n)
                           : (static_cast<double>(class_counts[c]) + 1.0) /
                                 (static_cast<double>(n) + static_cast<double>(k));
        model.base_score[c] = std::log(prior);
    }

    Matrix raw(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(model.base_score.begin(), model.base_score.end(), raw.row(i));
    }
    if (loss_trace) {
        loss_trace->clear();
        loss_trace->push_back(softmax_data_loss(raw, y));
    }

    GradTreeOptions tree_options{params.max_depth, params.reg_lambda, params.gamma};
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    Matrix proba(n, k);

    model.trees.reserve(static_cast<std::size_t>(params.n_rounds) * k);
    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            std::copy_n(raw.row(i), k, proba.row(i));
            softmax_row(proba.row(i), k);
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                double p = proba(i, c);
                grad[i] = p - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0);
                hess[i] = p * (1.0 - p);
            }
            Tree tree = grow_grad_tree(X, grad, hess, all_rows, tree_options);
            for (std::size_t i = 0; i < n; ++i) {
                raw(i, c) += params.learning_rate_eta * tree.leaf_for(X.row(i)).leaf[0];
            }
            model.trees.push_back(std::move(tree));
        }
        if (loss_trace) loss_trace->push_back(softmax_data_loss(raw, y));
    }
    return model;
}

namespace {

Matrix predict_proba_gbt(const GbtModel& model, const Matrix& X, int n_classes) {
    auto k = static_cast<std::size_t>(n_classes);
    Matrix raw(X.rows(), k);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        std::copy(model.base_score.begin(), model.base_score.end(), raw.row(i));
    }
    std::size_t n_rounds = model.trees.size() / k;
    for (std::size_t r = 0; r < n_rounds; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            const Tree& tree = model.trees[r * k + c];
            for (std::size_t i = 0; i < X.rows(); ++i) {
                raw(i, c) += model.params.learning_rate_eta * tree.leaf_for(X.row(i)).leaf[0];
            }
        }
    }
    for (std::size_t i = 0; i < raw.rows(); ++i) softmax_row(raw.row(i), k);
    return raw;
}

}  // namespace

TrainedModel train(const LearnerSpec& spec, const Matrix& X, std::span<const int> y,
                   int n_classes, std::span<const std::string> column_names) {
    check_training_input(X, y, n_classes);
    if (column_names.size() != X.cols()) {
        throw ValueError(fmt::format("{} column names for {} columns", column_names.size(),
                                     X.cols()));
    }
    TrainedModel model;
    model.n_classes = n_classes;
    model.column_names.assign(column_names.begin(), column_names.end());
    std::visit(
        [&](const auto& params) {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, LogRegParams>) {
                model.model = train_logreg(params, X, y, n_classes);
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                model.model = train_knn(params, X, y);
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                model.model = train_forest(params, X, y, n_classes);
            } else {
                model.model = train_gbt(params, X, y, n_classes);
            }
        },
        spec);
    return model;
}

Matrix predict_proba(const TrainedModel& model, const Matrix& X) {
    check_predict_columns(model, X);
    return std::visit(
        [&](const auto& m) -> Matrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LogRegModel>) {
                return predict_proba_logreg(m, X);
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                return predict_proba_knn(m, X, model.n_classes);
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                return predict_proba_forest(m, X, model.n_classes);
            } else {
                return predict_proba_gbt(m, X, model.n_classes);
            }
        },
        model.model);
}

std::vector<int> predict(const TrainedModel& model, const Matrix& X) {
    Matrix proba = predict_proba(model, X);
    std::vector<int> labels(proba.rows());
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        labels[i] = argmax_lowest(proba.row(i), proba.cols());
    }
    return labels;
}

std::vector<std::pair<std::string, double>> feature_importance(const TrainedModel& model) {
    std::vector<double> raw(model.column_names.size(), 0.0);
    if (const auto* forest = std::get_if<ForestModel>(&model.model)) {
        for (const Tree& tree : forest->trees) {
            double root_n = static_cast<double>(tree.nodes.front().n_samples);
            for (const Tree::Node& node : tree.nodes) {
                if (node.is_leaf()) continue;
                raw[static_cast<std::size_t>(node.feature)] +=
                    node.gain * static_cast<double>(node.n_samples) / root_n;
            }
        }
    } else if (const auto* gbt = std::get_if<GbtModel>(&model.model)) {
        for (const Tree& tree : gbt->trees) {
            for (const Tree::Node& node : tree.nodes) {
                if (!node.is_leaf()) raw[static_cast<std::size_t>(node.feature)] += node.gain;
            }
        }
    } else {
        const char* name = std::holds_alternative<LogRegModel>(model.model) ? "logreg" : "knn";
        throw ValueError(fmt::format("{} models do not expose feature importances", name));
    }
    double total = kernels::sum(raw.data(), raw.size());
    if (total > 0.0) {
        for (double& v : raw) v /= total;
    }
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) ranked.emplace_back(model.column_names[j], raw[j]);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranked;
}

// ------------------------------------------------------------ serialization

namespace {

ordered_json matrix_to_json(const Matrix& m) {
    return ordered_json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& doc) {
    Matrix m(doc.at("rows").get<std::size_t>(), doc.at("cols").get<std::size_t>());
    m.data() = doc.at("data").get<std::vector<double>>();
    if (m.data().size() != m.rows() * m.cols()) throw ParseError("matrix data size mismatch");
    return m;
}

ordered_json trees_to_json(const std::vector<Tree>& trees) {
    ordered_json out = ordered_json::array();
    for (const Tree& tree : trees) {
        std::vector<int> feature;
        std::vector<double> threshold;
        std::vector<int> left;
        std::vector<int> right;
        std::vector<double> gain;
        std::vector<long long> n_samples;
        ordered_json leaf = ordered_json::array();
        for (const Tree::Node& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            gain.push_back(node.gain);
            n_samples.push_back(node.n_samples);
            leaf.push_back(node.leaf);
        }
        ordered_json t;
        t["feature"] = std::move(feature);
        t["threshold"] = std::move(threshold);
        t["left"] = std::move(left);
        t["right"] = std::move(right);
        t["gain"] = std::move(gain);
        t["n_samples"] = std::move(n_samples);
        t["leaf"] = std::move(leaf);
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Tree> trees_from_json(const json& doc) {
    std::vector<Tree> trees;
    trees.reserve(doc.size());
    for (const json& t : doc) {
        Tree tree;
        std::size_t n = t.at("feature").size();
        tree.nodes.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Tree::Node& node = tree.nodes[i];
            node.feature = t.at("feature")[i].get<int>();
            node.threshold = t.at("threshold")[i].get<double>();
            node.left = t.at("left")[i].get<int>();
            node.right = t.at("right")[i].get<int>();
            node.gain = t.at("gain")[i].get<double>();
            node.n_samples = t.at("n_samples")[i].get<long long>();
            node.leaf = t.at("leaf")[i].get<std::vector<double>>();
        }
        trees.push_back(std::move(tree));
    }
    return trees;
}

}  // namespace

ordered_json model_to_json(const TrainedModel& model) {
    ordered_json doc;
    doc["n_classes"] = model.n_classes;
    doc["columns"] = model.column_names;
    if (const auto* lr = std::get_if<LogRegModel>(&model.model)) {
        doc["variant"] = "logreg";
        doc["params"] = {{"l2_lambda", lr->params.l2_lambda},
                         {"learning_rate", lr->params.learning_rate},
                         {"max_iters", lr->params.max_iters},
                         {"tol", lr->params.tol}};
        doc["weights"] = matrix_to_json(lr->weights);
        doc["bias"] = lr->bias;
        doc["iterations_run"] = lr->iterations_run;
    } else if (const auto* knn = std::get_if<KnnModel>(&model.model)) {
        doc["variant"] = "knn";
        doc["params"] = {{"k", knn->params.k}};
        doc["train_x"] = matrix_to_json(knn->train_x);
        doc["train_y"] = knn->train_y;
    } else if (const auto* forest = std::get_if<ForestModel>(&model.model)) {
        doc["variant"] = "rf";
        doc["params"] = {{"n_estimators", forest->params.n_estimators},
                         {"max_depth", forest->params.max_depth
                                           ? json(*forest->params.max_depth)
                                           : json(nullptr)},
                         {"min_samples_split", forest->params.min_samples_split},
                         {"features_per_split", forest->params.features_per_split
                                                    ? json(*forest->params.features_per_split)
                                                    : json(nullptr)},
                         {"seed", forest->params.seed},
                         {"bootstrap", forest->params.bootstrap}};
        doc["trees"] = trees_to_json(forest->trees);
    } else {
        const auto& gbt = std::get<GbtModel>(model.model);
        doc["variant"] = "gbt";
        doc["params"] = {{"n_rounds", gbt.params.n_rounds},
                         {"learning_rate_eta", gbt.params.learning_rate_eta},
                         {"reg_lambda", gbt.params.reg_lambda},
                         {"gamma", gbt.params.gamma},
                         {"max_depth", gbt.params.max_depth},
                         {"seed", gbt.params.seed}};
        doc["base_score"] = gbt.base_score;
        doc["trees"] = trees_to_json(gbt.trees);
    }
    return doc;
}

TrainedModel model_from_json(const json& doc) {
    TrainedModel model;
    model.n_classes = doc.at("n_classes").get<int>();
    model.column_names = doc.at("columns").get<std::vector<std::string>>();
    std::string variant = doc.at("variant").get<std::string>();
    const json& params = doc.at("params");
    if (variant == "logreg") {
        LogRegModel lr;
        lr.params = LogRegParams{params.at("l2_lambda").get<double>(),
                                 params.at("learning_rate").get<double>(),
                                 params.at("max_iters").get<int>(), params.at("tol").get<double>()};
        lr.weights = matrix_from_json(doc.at("weights"));
        lr.bias = doc.at("bias").get<std::vector<double>>();
        lr.iterations_run = doc.value("iterations_run", 0);
        model.model = std::move(lr);
    } else if (variant == "knn") {
        KnnModel knn;
        knn.params.k = params.at("k").get<int>();
        knn.train_x = matrix_from_json(doc.at("train_x"));
        knn.train_y = doc.at("train_y").get<std::vector<int>>();
        model.model = std::move(knn);
    } else if (variant == "rf") {
        ForestModel forest;
        forest.params.n_estimators = params.at("n_estimators").get<int>();
        if (!params.at("max_depth").is_null()) {
            forest.params.max_depth = params.at("max_depth").get<int>();
        }
        forest.params.min_samples_split = params.at("min_samples_split").get<int>();
        if (!params.at("features_per_split").is_null()) {
            forest.params.features_per_split = params.at("features_per_split").get<int>();
        }
        forest.params.seed = params.at("seed").get<std::uint64_t>();
        forest.params.bootstrap = params.at("bootstrap").get<bool>();
        forest.trees = trees_from_json(doc.at("trees"));
        model.model = std::move(forest);
    } else if (variant == "gbt") {
        GbtModel gbt;
        gbt.params.n_rounds = params.at("n_rounds").get<int>();
        gbt.params.learning_rate_eta = params.at("learning_rate_eta").get<double>();
        gbt.params.reg_lambda = params.at("reg_lambda").get<double>();
        gbt.params.gamma = params.at("gamma").get<double>();
        gbt.params.max_depth = params.at("max_depth").get<int>();
        gbt.params.seed = params.at("seed").get<std::uint64_t>();
        gbt.base_score = doc.at("base_score").get<std::vector<double>>();
        gbt.trees = trees_from_json(doc.at("trees"));
        model.model = std::move(gbt);
    } else {
        throw ParseError(fmt::format("unknown model variant '{}'", variant));
    }
    return model;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << model_to_json(model).dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open {}", path.string()));
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("invalid model JSON", path.string());
    return model_from_json(doc);
}

}  // namespace chartml::learn
