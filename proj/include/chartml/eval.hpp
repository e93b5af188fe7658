#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chartml/dataset.hpp"
#include "chartml/learners.hpp"

namespace chartml::eval {

/// K x K counts; rows index the true class, columns the predicted class.
struct ConfusionMatrix {
    std::size_t n_classes = 0;
    std::vector<long long> counts;  // row-major

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t k) : n_classes(k), counts(k * k, 0) {}

    long long& at(std::size_t truth, std::size_t predicted) {
        return counts[truth * n_classes + predicted];
    }
    long long at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * n_classes + predicted];
    }
    long long total() const;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    double macro_f1 = 0.0;
    ConfusionMatrix confusion;
};

/// precision = TP/(TP+FP), recall = TP/(TP+FN), f1 = harmonic mean; every
/// zero-denominator case scores 0. macro_f1 averages the per-class f1
/// without weighting. Throws ValueError on an empty matrix.
EvalReport metrics(const ConfusionMatrix& cm);

struct CvResult {
    std::vector<double> fold_scores;  // macro-F1 per fold
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1) standard deviation
    std::vector<EvalReport> fold_reports;
};

/// Stratified k-fold cross-validation. Preprocessing is refit on the k-1
/// training folds each time so no held-out statistics leak in. Deterministic
/// given seed.
CvResult cross_validate(const learn::LearnerSpec& spec, const data::Dataset& dataset, int k,
                        std::uint64_t seed);

/// Single stratified holdout evaluation (preprocessing fit on the training
/// side). Optionally returns the trained model.
EvalReport holdout_evaluate(const learn::LearnerSpec& spec, const data::Dataset& dataset,
                            double train_fraction, std::uint64_t seed,
                            learn::TrainedModel* trained = nullptr);

/// null in a grid value list means "unlimited" (e.g. max_depth).
using GridValue = std::optional<double>;
/// Parameter names with their candidate values, in declared order.
using ParamGrid = std::vector<std::pair<std::string, std::vector<GridValue>>>;

/// Copy of `spec` with one named parameter replaced. Throws ValueError for a
/// name the variant does not have.
learn::LearnerSpec apply_param(const learn::LearnerSpec& spec, const std::string& name,
                               GridValue value);

struct GridResult {
    struct Cell {
        std::vector<std::pair<std::string, GridValue>> params;
        double mean_score = 0.0;
        double stddev = 0.0;
    };
    std::vector<Cell> cells;     // full Cartesian product, enumeration order
    std::size_t best_index = 0;  // highest mean; ties keep the earliest cell
};

/// Cross-validate every cell of the Cartesian product (first parameter
/// varies slowest). Throws ValueError on an empty grid.
GridResult grid_search(const learn::LearnerSpec& base_spec, const ParamGrid& grid,
                       const data::Dataset& dataset, int k, std::uint64_t seed);

}  // namespace chartml::eval
