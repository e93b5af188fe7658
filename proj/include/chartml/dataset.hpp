#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chartml/chart.hpp"
#include "chartml/client.hpp"
#include "chartml/matrix.hpp"

namespace chartml::data {

/// Feature matrix + labels. X may contain missing cells (NaN) until a
/// PreprocessState is applied.
struct Dataset {
    std::vector<std::string> column_names;
    Matrix X;
    std::vector<int> y;                    // RankClass ordinals
    std::vector<std::string> row_ids;      // track URIs
    std::array<std::size_t, chart::kNumClasses> class_counts{};
};

/// Imputation fill values and standardization parameters, fitted on training
/// rows only. scale is the sample (n-1) standard deviation; zero-variance
/// columns keep scale 1 so they pass through as zeros.
struct PreprocessState {
    std::vector<std::string> column_names;
    std::vector<double> fill_values;
    std::vector<double> scaler_mean;
    std::vector<double> scaler_scale;
};

struct HoldoutSplit {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

using Folds = std::vector<std::vector<std::size_t>>;

struct JoinOptions {
    bool include_peak_rank = false;  // target-leaking; off unless explicitly requested
};

/// Metadata column order: streams, previous_rank, [peak_rank,] days_on_chart,
/// followed by the 13 audio columns. Tracks without features keep their rows
/// with missing audio cells; previous_rank absent is a missing cell too.
/// Throws ValueError on duplicate feature rows or empty tracks.
Dataset join_on_uri(std::span<const chart::TrackRecord> tracks,
                    std::span<const client::AudioFeatures> features, JoinOptions options = {});

/// Fit fill values (means over non-missing training cells) and scaler
/// parameters (mean / sample std of the imputed training column).
/// Throws ValueError when a column has no non-missing training cell.
PreprocessState fit_preprocess(const Matrix& X, std::span<const std::size_t> train_rows,
                               std::span<const std::string> column_names);

/// Impute then standardize the selected rows; returns a dense matrix in the
/// order of `rows`.
Matrix apply_preprocess(const PreprocessState& state, const Matrix& X,
                        std::span<const std::size_t> rows);

/// Keep exactly the 13 audio columns (same rows and labels). Idempotent.
/// Throws ValueError when an audio column is missing.
Dataset filter_audio_only(const Dataset& dataset);

/// Dataset restricted to the given rows (same columns).
Dataset subset_rows(const Dataset& dataset, std::span<const std::size_t> rows);

/// Stratified train/test split: per class, round(train_fraction * count)
/// training rows (clamped so both sides keep at least one row per class).
/// Deterministic given seed. Throws ValueError when a class has < 2 rows.
HoldoutSplit stratified_holdout(std::span<const int> y, double train_fraction, std::uint64_t seed);
HoldoutSplit stratified_holdout(const Dataset& dataset, double train_fraction, std::uint64_t seed);

/// k disjoint exhaustive folds; per class, fold counts differ by at most 1.
/// Deterministic given seed. Throws ValueError for k < 2 or a class smaller
/// than k.
Folds stratified_kfold(std::span<const int> y, int k, std::uint64_t seed);
Folds stratified_kfold(const Dataset& dataset, int k, std::uint64_t seed);

/// Pearson correlation over columns. Requires >= 2 rows and no missing
/// cells; zero-variance columns get r = 0 off-diagonal and 1 on it.
Matrix correlation_matrix(const Matrix& X);

// dataset CSV: uri,label,<feature columns>; missing cells are empty fields.
std::string dataset_to_csv(const Dataset& dataset);
Dataset dataset_from_csv(std::string_view content, const std::string& source = {});
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_csv(const std::filesystem::path& path);

void write_preprocess_json(const std::filesystem::path& path, const PreprocessState& state);
PreprocessState read_preprocess_json(const std::filesystem::path& path);

}  // namespace chartml::data
