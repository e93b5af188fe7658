#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "chartml/matrix.hpp"
#include "chartml/tree.hpp"

namespace chartml::learn {

// ---------------------------------------------------------------------------
// Hyperparameters

struct LogRegParams {
    double l2_lambda = 1e-4;
    double learning_rate = 0.1;
    int max_iters = 2000;
    double tol = 1e-6;  // stop when the gradient norm falls below this
};

struct KnnParams {
    int k = 5;
};

struct ForestParams {
    int n_estimators = 150;
    std::optional<int> max_depth;            // nullopt = unlimited
    int min_samples_split = 2;
    std::optional<int> features_per_split;   // nullopt = ceil(sqrt(p))
    std::uint64_t seed = 42;
    bool bootstrap = true;  // off trains every tree on the full sample
};

struct GbtParams {
    int n_rounds = 200;
    double learning_rate_eta = 0.1;
    double reg_lambda = 1.0;
    double gamma = 0.0;
    int max_depth = 6;
    std::uint64_t seed = 42;
};

using LearnerSpec = std::variant<LogRegParams, KnnParams, ForestParams, GbtParams>;

/// Short tag used in CLI flags, report.json and serialized models:
/// logreg / knn / rf / gbt.
std::string_view variant_name(const LearnerSpec& spec);
LearnerSpec default_spec(std::string_view name);

// ---------------------------------------------------------------------------
// Trained models

struct LogRegModel {
    LogRegParams params;
    Matrix weights;               // n_classes x p, row k scores class k
    std::vector<double> bias;     // n_classes
    int iterations_run = 0;
};

struct KnnModel {
    KnnParams params;
    Matrix train_x;
    std::vector<int> train_y;
};

struct ForestModel {
    ForestParams params;
    std::vector<Tree> trees;
};

struct GbtModel {
    GbtParams params;
    std::vector<double> base_score;  // per-class initial raw score (log priors)
    std::vector<Tree> trees;         // round-major: trees[round * n_classes + k]
};

struct TrainedModel {
    int n_classes = 0;
    std::vector<std::string> column_names;
    std::variant<LogRegModel, KnnModel, ForestModel, GbtModel> model;
};

// ---------------------------------------------------------------------------
// Training / prediction

/// Train one model. Deterministic given the spec (including its seed).
/// Throws ValueError on empty input, labels outside [0, n_classes), missing
/// cells, or k > rows for KNN.
TrainedModel train(const LearnerSpec& spec, const Matrix& X, std::span<const int> y,
                   int n_classes, std::span<const std::string> column_names);

/// Row-normalized class probabilities. Throws ValueError when the column
/// count does not match training.
Matrix predict_proba(const TrainedModel& model, const Matrix& X);

/// Argmax of predict_proba; ties break toward the lowest class ordinal.
std::vector<int> predict(const TrainedModel& model, const Matrix& X);

/// Normalized importances for the tree ensembles, descending (ties keep
/// column order). Random forest attributes sample-weighted impurity
/// decrease; boosting attributes split gain. Throws ValueError for the
/// other variants.
std::vector<std::pair<std::string, double>> feature_importance(const TrainedModel& model);

// ---------------------------------------------------------------------------
// Pieces exposed for direct testing

/// Mean softmax cross-entropy plus (l2_lambda/2)*||W||^2; the bias is not
/// regularized.
double logreg_loss(const Matrix& weights, std::span<const double> bias, const Matrix& X,
                   std::span<const int> y, double l2_lambda);

/// Analytic gradient of logreg_loss with respect to W and b.
void logreg_gradient(const Matrix& weights, std::span<const double> bias, const Matrix& X,
                     std::span<const int> y, double l2_lambda, Matrix& grad_w,
                     std::vector<double>& grad_b);

/// GBT trainer with an optional per-round trace of the training softmax loss
/// (length n_rounds + 1, starting at the base-score loss).
GbtModel train_gbt(const GbtParams& params, const Matrix& X, std::span<const int> y,
                   int n_classes, std::vector<double>* loss_trace = nullptr);

// ---------------------------------------------------------------------------
// Serialization: one JSON document per model; loading reproduces identical
// predictions.

nlohmann::ordered_json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace chartml::learn
