#include "chartml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "chartml/csv.hpp"
#include "chartml/error.hpp"
#include "chartml/kernels.hpp"

namespace chartml::data {

namespace {

std::array<std::size_t, chart::kNumClasses> count_classes(std::span<const int> y) {
    std::array<std::size_t, chart::kNumClasses> counts{};
    for (int label : y) {
        if (label < 0 || label >= chart::kNumClasses) {
            throw ValueError(fmt::format("label ordinal {} out of range", label));
        }
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

std::vector<std::vector<std::size_t>> rows_by_class(std::span<const int> y, int n_classes) {
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0) throw ValueError(fmt::format("negative label at row {}", i));
        if (y[i] >= n_classes) groups.resize(static_cast<std::size_t>(y[i]) + 1);
        groups[static_cast<std::size_t>(y[i])].push_back(i);
    }
    return groups;
}

}  // namespace

Dataset join_on_uri(std::span<const chart::TrackRecord> tracks,
                    std::span<const client::AudioFeatures> features, JoinOptions options) {
    if (tracks.empty()) throw ValueError("cannot build a dataset from zero tracks");
    std::unordered_map<std::string, const client::AudioFeatures*> by_uri;
    for (const client::AudioFeatures& f : features) {
        if (!by_uri.emplace(f.track_uri, &f).second) {
            throw ValueError(fmt::format("duplicate feature row for uri {}", f.track_uri));
        }
    }

    Dataset ds;
    ds.column_names = {"streams", "previous_rank"};
    if (options.include_peak_rank) ds.column_names.push_back("peak_rank");
    ds.column_names.push_back("days_on_chart");
    for (auto col : client::kAudioColumns) ds.column_names.emplace_back(col);

    ds.X = Matrix(tracks.size(), ds.column_names.size());
    ds.y.reserve(tracks.size());
    ds.row_ids.reserve(tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const chart::TrackRecord& t = tracks[i];
        std::size_t j = 0;
        ds.X(i, j++) = static_cast<double>(t.streams);
        ds.X(i, j++) = t.previous_rank ? static_cast<double>(*t.previous_rank) : missing_value();
        if (options.include_peak_rank) ds.X(i, j++) = static_cast<double>(t.peak_rank);
        ds.X(i, j++) = static_cast<double>(t.days_on_chart);
        auto it = by_uri.find(t.track_uri);
        for (std::size_t c = 0; c < client::kAudioColumns.size(); ++c) {
            ds.X(i, j + c) = it == by_uri.end() ? missing_value()
                                                : client::audio_column_value(*it->second, c);
        }
        ds.y.push_back(static_cast<int>(t.label));
        ds.row_ids.push_back(t.track_uri);
    }
    ds.class_counts = count_classes(ds.y);
    return ds;
}

PreprocessState fit_preprocess(const Matrix& X, std::span<const std::size_t> train_rows,
                               std::span<const std::string> column_names) {
    if (train_rows.empty()) throw ValueError("cannot fit preprocessing on zero rows");
    std::size_t p = X.cols();
    PreprocessState state;
    state.column_names.assign(column_names.begin(), column_names.end());
    state.fill_values.resize(p);
    state.scaler_mean.resize(p);
    state.scaler_scale.resize(p);

    for (std::size_t j = 0; j < p; ++j) {
        double sum = 0.0;
        std::size_t present = 0;
        for (std::size_t r : train_rows) {
            double v = X(r, j);
            if (!is_missing(v)) {
                sum += v;
                ++present;
            }
        }
        if (present == 0) {
            throw ValueError(fmt::format("column '{}' has no non-missing training value",
                                         j < column_names.size() ? column_names[j] : std::to_string(j)));
        }
        double fill = sum / static_cast<double>(present);
        state.fill_values[j] = fill;

        // scaler statistics over the imputed training column
        double n = static_cast<double>(train_rows.size());
        double total = sum + fill * static_cast<double>(train_rows.size() - present);
        double mean = total / n;
        double ss = 0.0;
        for (std::size_t r : train_rows) {
            double v = X(r, j);
            if (is_missing(v)) v = fill;
            double d = v - mean;
            ss += d * d;
        }
        double scale = train_rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        state.scaler_mean[j] = mean;
        state.scaler_scale[j] = scale > 0.0 ? scale : 1.0;
    }
    return state;
}

Matrix apply_preprocess(const PreprocessState& state, const Matrix& X,
                        std::span<const std::size_t> rows) {
    if (state.fill_values.size() != X.cols()) {
        throw ValueError(fmt::format("preprocess state has {} columns, matrix has {}",
                                     state.fill_values.size(), X.cols()));
    }
    Matrix out(rows.size(), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = X.row(rows[i]);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < X.cols(); ++j) {
            double v = is_missing(src[j]) ? state.fill_values[j] : src[j];
            dst[j] = (v - state.scaler_mean[j]) / state.scaler_scale[j];
        }
    }
    return out;
}

Dataset filter_audio_only(const Dataset& dataset) {
    std::vector<std::size_t> keep;
    keep.reserve(client::kAudioColumns.size());
    for (auto col : client::kAudioColumns) {
        auto it = std::find(dataset.column_names.begin(), dataset.column_names.end(), col);
        if (it == dataset.column_names.end()) {
            throw ValueError(fmt::format("dataset is missing audio column '{}'", col));
        }
        keep.push_back(static_cast<std::size_t>(it - dataset.column_names.begin()));
    }
    Dataset out;
    out.column_names.reserve(keep.size());
    for (std::size_t j : keep) out.column_names.push_back(dataset.column_names[j]);
    out.X = Matrix(dataset.X.rows(), keep.size());
    for (std::size_t i = 0; i < dataset.X.rows(); ++i) {
        for (std::size_t c = 0; c < keep.size(); ++c) out.X(i, c) = dataset.X(i, keep[c]);
    }
    out.y = dataset.y;
    out.row_ids = dataset.row_ids;
    out.class_counts = dataset.class_counts;
    return out;
}

Dataset subset_rows(const Dataset& dataset, std::span<const std::size_t> rows) {
    Dataset out;
    out.column_names = dataset.column_names;
    out.X = select_rows(dataset.X, rows);
    out.y.reserve(rows.size());
    out.row_ids.reserve(rows.size());
    for (std::size_t r : rows) {
        out.y.push_back(dataset.y[r]);
        out.row_ids.push_back(dataset.row_ids[r]);
    }
    out.class_counts = count_classes(out.y);
    return out;
}

HoldoutSplit stratified_holdout(std::span<const int> y, double train_fraction, std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw ValueError(fmt::format("train_fraction must be in (0, 1), got {}", train_fraction));
    }
    auto groups = rows_by_class(y, chart::kNumClasses);
    std::mt19937_64 rng(seed);
    HoldoutSplit split;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        auto& rows = groups[c];
        if (rows.empty()) continue;
        if (rows.size() < 2) {
            throw ValueError(fmt::format("class {} has {} row(s); need at least 2 to split", c,
                                         rows.size()));
        }
        std::shuffle(rows.begin(), rows.end(), rng);
        auto want = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(rows.size())));
        // keep at least one row on each side
        want = std::clamp<std::size_t>(want, 1, rows.size() - 1);
        split.train_rows.insert(split.train_rows.end(), rows.begin(),
                                rows.begin() + static_cast<std::ptrdiff_t>(want));
        split.test_rows.insert(split.test_rows.end(),
                               rows.begin() + static_cast<std::ptrdiff_t>(want), rows.end());
    }
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    return split;
}

HoldoutSplit stratified_holdout(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
    return stratified_holdout(dataset.y, train_fraction, seed);
}

Folds stratified_kfold(std::span<const int> y, int k, std::uint64_t seed) {
    if (k < 2) throw ValueError(fmt::format("k must be >= 2, got {}", k));
    auto groups = rows_by_class(y, chart::kNumClasses);
    std::mt19937_64 rng(seed);
    Folds folds(static_cast<std::size_t>(k));
    std::size_t next_fold = 0;  // rolling start so leftover rows spread across folds
    for (std::size_t c = 0; c < groups.size(); ++c) {
        auto& rows = groups[c];
        if (rows.empty()) continue;
        if (rows.size() < static_cast<std::size_t>(k)) {
            throw ValueError(
                fmt::format("class {} has {} row(s), fewer than k = {}", c, rows.size(), k));
        }
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            folds[(next_fold + i) % static_cast<std::size_t>(k)].push_back(rows[i]);
        }
        next_fold = (next_fold + rows.size()) % static_cast<std::size_t>(k);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

Folds stratified_kfold(const Dataset& dataset, int k, std::uint64_t seed) {
    return stratified_kfold(dataset.y, k, seed);
}

Matrix correlation_matrix(const Matrix& X) {
    std::size_t n = X.rows();
    std::size_t p = X.cols();
    if (n < 2) throw ValueError(fmt::format("correlation needs >= 2 rows, got {}", n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (is_missing(X(i, j))) {
                throw ValueError("correlation input contains missing cells");
            }
        }
    }

    // center each column into a contiguous buffer so the dot kernel applies
    Matrix centered(p, n);
    std::vector<double> norm(p);
    for (std::size_t j = 0; j < p; ++j) {
        double* col = centered.row(j);
        for (std::size_t i = 0; i < n; ++i) col[i] = X(i, j);
        double mean = kernels::sum(col, n) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) col[i] -= mean;
        norm[j] = std::sqrt(kernels::dot(col, col, n));
    }

    Matrix corr(p, p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        corr(a, a) = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            double r = 0.0;
            if (norm[a] > 0.0 && norm[b] > 0.0) {
                r = kernels::dot(centered.row(a), centered.row(b), n) / (norm[a] * norm[b]);
                r = std::clamp(r, -1.0, 1.0);
            }
            corr(a, b) = r;
            corr(b, a) = r;
        }
    }
    return corr;
}

std::string dataset_to_csv(const Dataset& dataset) {
    std::string out = "uri,label";
    for (const std::string& col : dataset.column_names) {
        out += ',';
        out += col;
    }
    out += '\n';
    for (std::size_t i = 0; i < dataset.X.rows(); ++i) {
        out += csv::escape(dataset.row_ids[i]);
        out += ',';
        out += chart::to_string(static_cast<chart::RankClass>(dataset.y[i]));
        for (std::size_t j = 0; j < dataset.X.cols(); ++j) {
            out += ',';
            double v = dataset.X(i, j);
            if (!is_missing(v)) out += fmt::format("{}", v);
        }
        out += '\n';
    }
    return out;
}

Dataset dataset_from_csv(std::string_view content, const std::string& source) {
    auto rows = csv::parse(content, source);
    if (rows.empty()) throw ParseError("empty dataset file", source);
    const auto& header = rows.front();
    if (header.size() < 3 || header[0] != "uri" || header[1] != "label") {
        throw ParseError("dataset header must start with uri,label", source, 1);
    }
    Dataset ds;
    ds.column_names.assign(header.begin() + 2, header.end());
    std::size_t p = ds.column_names.size();
    ds.X = Matrix(rows.size() - 1, p);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != p + 2) {
            throw ParseError(fmt::format("row {}: expected {} fields, got {}", r + 1, p + 2,
                                         row.size()),
                             source, r + 1);
        }
        ds.row_ids.push_back(row[0]);
        ds.y.push_back(static_cast<int>(chart::rank_class_from_string(row[1])));
        for (std::size_t j = 0; j < p; ++j) {
            const std::string& s = row[j + 2];
            if (s.empty()) {
                ds.X(r - 1, j) = missing_value();
                continue;
            }
            double v{};
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                throw ParseError(fmt::format("row {}: bad number '{}' in column {}", r + 1, s,
                                             ds.column_names[j]),
                                 source, r + 1);
            }
            ds.X(r - 1, j) = v;
        }
    }
    ds.class_counts = count_classes(ds.y);
    return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << dataset_to_csv(dataset);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return dataset_from_csv(buf.str(), path.string());
}

void write_preprocess_json(const std::filesystem::path& path, const PreprocessState& state) {
    nlohmann::ordered_json doc;
    doc["columns"] = state.column_names;
    doc["fill_values"] = state.fill_values;
    doc["scaler_mean"] = state.scaler_mean;
    doc["scaler_scale"] = state.scaler_scale;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << doc.dump(2) << '\n';
}

PreprocessState read_preprocess_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open {}", path.string()));
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("invalid preprocess JSON", path.string());
    PreprocessState state;
    state.column_names = doc.at("columns").get<std::vector<std::string>>();
    state.fill_values = doc.at("fill_values").get<std::vector<double>>();
    state.scaler_mean = doc.at("scaler_mean").get<std::vector<double>>();
    state.scaler_scale = doc.at("scaler_scale").get<std::vector<double>>();
    return state;
}

}  // namespace chartml::data
