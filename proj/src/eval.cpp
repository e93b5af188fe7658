#include "chartml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "chartml/error.hpp"

namespace chartml::eval {

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
    if (y_true.size() != y_pred.size()) {
        throw ValueError(fmt::format("y_true has {} labels, y_pred has {}", y_true.size(),
                                     y_pred.size()));
    }
    ConfusionMatrix cm(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes) {
            throw ValueError(fmt::format("label out of range at position {}: true={} pred={}", i,
                                         y_true[i], y_pred[i]));
        }
        ++cm.at(static_cast<std::size_t>(y_true[i]), static_cast<std::size_t>(y_pred[i]));
    }
    return cm;
}

EvalReport metrics(const ConfusionMatrix& cm) {
    if (cm.n_classes == 0 || cm.total() == 0) throw ValueError("empty confusion matrix");
    EvalReport report;
    report.confusion = cm;
    report.per_class.resize(cm.n_classes);

    long long trace = 0;
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < cm.n_classes; ++c) {
        long long tp = cm.at(c, c);
        trace += tp;
        long long fp = 0;
        long long fn = 0;
        for (std::size_t o = 0; o < cm.n_classes; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        ClassMetrics& m = report.per_class[c];
        m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        f1_sum += m.f1;
    }
    report.accuracy = static_cast<double>(trace) / static_cast<double>(cm.total());
    report.macro_f1 = f1_sum / static_cast<double>(cm.n_classes);
    return report;
}

namespace {

EvalReport evaluate_split(const learn::LearnerSpec& spec, const data::Dataset& dataset,
                          std::span<const std::size_t> train_rows,
                          std::span<const std::size_t> test_rows,
                          learn::TrainedModel* trained_out) {
    auto state = data::fit_preprocess(dataset.X, train_rows, dataset.column_names);
    Matrix train_x = data::apply_preprocess(state, dataset.X, train_rows);
    Matrix test_x = data::apply_preprocess(state, dataset.X, test_rows);

    std::vector<int> train_y;
    train_y.reserve(train_rows.size());
    for (std::size_t r : train_rows) train_y.push_back(dataset.y[r]);
    std::vector<int> test_y;
    test_y.reserve(test_rows.size());
    for (std::size_t r : test_rows) test_y.push_back(dataset.y[r]);

    auto model = learn::train(spec, train_x, train_y, chart::kNumClasses, dataset.column_names);
    auto predicted = learn::predict(model, test_x);
    EvalReport report = metrics(confusion(test_y, predicted, chart::kNumClasses));
    if (trained_out) *trained_out = std::move(model);
    return report;
}

}  // namespace

CvResult cross_validate(const learn::LearnerSpec& spec, const data::Dataset& dataset, int k,
                        std::uint64_t seed) {
    auto folds = data::stratified_kfold(dataset, k, seed);
    CvResult result;
    result.fold_scores.reserve(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(dataset.X.rows() - folds[f].size());
        for (std::size_t o = 0; o < folds.size(); ++o) {
            if (o == f) continue;
            train_rows.insert(train_rows.end(), folds[o].begin(), folds[o].end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        try {
            EvalReport report = evaluate_split(spec, dataset, train_rows, folds[f], nullptr);
            result.fold_scores.push_back(report.macro_f1);
            result.fold_reports.push_back(std::move(report));
        } catch (const Error& e) {
            throw ValueError(fmt::format("fold {}: {}", f, e.what()));
        }
    }
    double n = static_cast<double>(result.fold_scores.size());
    bool all_equal = std::all_of(result.fold_scores.begin(), result.fold_scores.end(),
                                 [&](double s) { return s == result.fold_scores.front(); });
    if (all_equal) {
        // identical folds: mean is the score itself and the spread is exactly 0
        result.mean = result.fold_scores.front();
        result.stddev = 0.0;
        return result;
    }
    result.mean = std::accumulate(result.fold_scores.begin(), result.fold_scores.end(), 0.0) / n;
    double ss = 0.0;
    for (double s : result.fold_scores) ss += (s - result.mean) * (s - result.mean);
    result.stddev = result.fold_scores.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return result;
}

EvalReport holdout_evaluate(const learn::LearnerSpec& spec, const data::Dataset& dataset,
                            double train_fraction, std::uint64_t seed,
                            learn::TrainedModel* trained) {
    auto split = data::stratified_holdout(dataset, train_fraction, seed);
    return evaluate_split(spec, dataset, split.train_rows, split.test_rows, trained);
}

learn::LearnerSpec apply_param(const learn::LearnerSpec& spec, const std::string& name,
                               GridValue value) {
    auto as_double = [&] {
        if (!value) throw ValueError(fmt::format("parameter '{}' cannot be null", name));
        return *value;
    };
    auto as_int = [&] { return static_cast<int>(std::llround(as_double())); };
    // null only makes sense for the depth/feature-count "unlimited" knobs
    auto as_opt_int = [&] {
        return value ? std::optional<int>(as_int()) : std::nullopt;
    };

    learn::LearnerSpec out = spec;
    bool handled = std::visit(
        [&](auto& params) {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, learn::LogRegParams>) {
                if (name == "l2_lambda") params.l2_lambda = as_double();
                else if (name == "learning_rate") params.learning_rate = as_double();
                else if (name == "max_iters") params.max_iters = as_int();
                else if (name == "tol") params.tol = as_double();
                else return false;
            } else if constexpr (std::is_same_v<T, learn::KnnParams>) {
                if (name == "k") params.k = as_int();
                else return false;
            } else if constexpr (std::is_same_v<T, learn::ForestParams>) {
                if (name == "n_estimators") params.n_estimators = as_int();
                else if (name == "max_depth") params.max_depth = as_opt_int();
                else if (name == "min_samples_split") params.min_samples_split = as_int();
                else if (name == "features_per_split") params.features_per_split = as_opt_int();
                else if (name == "seed") params.seed = static_cast<std::uint64_t>(as_int());
                else return false;
            } else if constexpr (std::is_same_v<T, learn::GbtParams>) {
                if (name == "n_rounds") params.n_rounds = as_int();
                else if (name == "learning_rate_eta") params.learning_rate_eta = as_double();
                else if (name == "reg_lambda") params.reg_lambda = as_double();
                else if (name == "gamma") params.gamma = as_double();
                else if (name == "max_depth") params.max_depth = as_int();
                else if (name == "seed") params.seed = static_cast<std::uint64_t>(as_int());
                else return false;
            }
            return true;
        },
        out);
    if (!handled) {
        throw ValueError(fmt::format("model '{}' has no parameter '{}'",
                                     learn::variant_name(spec), name));
    }
    return out;
}

GridResult grid_search(const learn::LearnerSpec& base_spec, const ParamGrid& grid,
                       const data::Dataset& dataset, int k, std::uint64_t seed) {
    if (grid.empty()) throw ValueError("empty parameter grid");
    for (const auto& [name, values] : grid) {
        if (values.empty()) {
            throw ValueError(fmt::format("parameter '{}' has an empty value list", name));
        }
    }

    GridResult result;
    std::vector<std::size_t> cursor(grid.size(), 0);
    for (;;) {
        learn::LearnerSpec spec = base_spec;
        GridResult::Cell cell;
        for (std::size_t d = 0; d < grid.size(); ++d) {
            const auto& [name, values] = grid[d];
            spec = apply_param(spec, name, values[cursor[d]]);
            cell.params.emplace_back(name, values[cursor[d]]);
        }
        CvResult cv = cross_validate(spec, dataset, k, seed);
        cell.mean_score = cv.mean;
        cell.stddev = cv.stddev;
        result.cells.push_back(std::move(cell));

        // odometer: last declared parameter varies fastest
        std::size_t d = grid.size();
        while (d > 0) {
            --d;
            if (++cursor[d] < grid[d].second.size()) break;
            cursor[d] = 0;
            if (d == 0) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < result.cells.size(); ++i) {
                    if (result.cells[i].mean_score > result.cells[best].mean_score) best = i;
                }
                result.best_index = best;
                return result;
            }
        }
    }
}

}  // namespace chartml::eval
