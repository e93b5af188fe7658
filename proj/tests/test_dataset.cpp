#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "chartml/dataset.hpp"
#include "chartml/error.hpp"
#include "support/synthetic.hpp"

using namespace chartml;
using chart::RankClass;

namespace {

chart::TrackRecord track(const std::string& uri, int peak, long long streams,
                         std::optional<int> prev, int days) {
    return {uri, "n", "a", peak, streams, prev, days, chart::label_rank_class(peak)};
}

client::AudioFeatures features_for(const std::string& uri, double fill = 0.5) {
    client::AudioFeatures f;
    f.track_uri = uri;
    f.danceability = fill;
    f.energy = fill;
    f.valence = fill;
    f.tempo = 100 + fill;
    f.acousticness = fill;
    f.loudness = -5 - fill;
    f.instrumentalness = fill / 10;
    f.speechiness = fill / 5;
    f.liveness = fill / 3;
    f.key = 4;
    f.mode = 1;
    f.duration_ms = 200000;
    f.time_signature = 4;
    return f;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

}  // namespace

TEST_CASE("join keeps tracks without features and fixes column order") {
    std::vector<chart::TrackRecord> tracks{track("a", 5, 100, 3, 10), track("b", 60, 50, std::nullopt, 2),
                                           track("c", 20, 75, 8, 4)};
    std::vector<client::AudioFeatures> features{features_for("a"), features_for("c", 0.9)};
    auto ds = data::join_on_uri(tracks, features);
    CHECK(ds.X.rows() == 3);
    CHECK(ds.X.cols() == 16);  // 3 metadata + 13 audio, peak_rank excluded by default
    CHECK(ds.column_names[0] == "streams");
    CHECK(ds.column_names[1] == "previous_rank");
    CHECK(ds.column_names[2] == "days_on_chart");
    CHECK(ds.column_names[3] == "danceability");
    CHECK(is_missing(ds.X(1, 1)));   // absent previous_rank
    CHECK(is_missing(ds.X(1, 3)));   // track b has no features row
    CHECK_FALSE(is_missing(ds.X(0, 3)));
    CHECK(ds.class_counts[0] == 1);
    CHECK(ds.class_counts[1] == 1);
    CHECK(ds.class_counts[2] == 1);

    data::JoinOptions with_peak;
    with_peak.include_peak_rank = true;
    auto ds_peak = data::join_on_uri(tracks, features, with_peak);
    CHECK(ds_peak.X.cols() == 17);
    CHECK(ds_peak.column_names[2] == "peak_rank");
    CHECK(ds_peak.X(0, 2) == 5.0);

    features.push_back(features_for("a"));
    CHECK_THROWS_AS(data::join_on_uri(tracks, features), ValueError);
    CHECK_THROWS_AS(data::join_on_uri({}, {}), ValueError);
}

TEST_CASE("fit_preprocess imputes with the training mean then standardizes") {
    Matrix x(4, 1);
    x(0, 0) = 1;
    x(1, 0) = 2;
    x(2, 0) = missing_value();
    x(3, 0) = 3;
    std::vector<std::string> names{"col"};
    auto rows = iota_rows(4);
    auto state = data::fit_preprocess(x, rows, names);
    CHECK(state.fill_values[0] == doctest::Approx(2.0));

    auto out = data::apply_preprocess(state, x, rows);
    // imputed column [1,2,2,3]: mean 2, sample std sqrt(2/3)
    double sd = std::sqrt(2.0 / 3.0);
    CHECK(out(0, 0) == doctest::Approx(-1.0 / sd));
    CHECK(out(2, 0) == doctest::Approx(0.0));
}

TEST_CASE("column [1,2,3] standardizes to [-1,0,1] under sample std") {
    Matrix x(3, 1);
    x(0, 0) = 1;
    x(1, 0) = 2;
    x(2, 0) = 3;
    std::vector<std::string> names{"c"};
    auto rows = iota_rows(3);
    auto state = data::fit_preprocess(x, rows, names);
    CHECK(state.scaler_scale[0] == doctest::Approx(1.0));  // sample std with n-1
    auto out = data::apply_preprocess(state, x, rows);
    CHECK(out(0, 0) == doctest::Approx(-1.0));
    CHECK(out(1, 0) == doctest::Approx(0.0));
    CHECK(out(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("constant columns pass through as zeros with scale 1") {
    Matrix x(3, 1, 5.0);
    std::vector<std::string> names{"c"};
    auto rows = iota_rows(3);
    auto state = data::fit_preprocess(x, rows, names);
    CHECK(state.scaler_scale[0] == 1.0);
    auto out = data::apply_preprocess(state, x, rows);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out(i, 0) == 0.0);
}

TEST_CASE("a column with no non-missing training cell is an error") {
    Matrix x(2, 1, missing_value());
    std::vector<std::string> names{"c"};
    auto rows = iota_rows(2);
    CHECK_THROWS_AS(data::fit_preprocess(x, rows, names), ValueError);
}

TEST_CASE("preprocessing uses training rows only") {
    Matrix x(4, 2);
    // train rows 0,1; test rows 2,3 carry wildly different values
    x(0, 0) = 1;
    x(1, 0) = 3;
    x(2, 0) = 1000;
    x(3, 0) = -1000;
    x(0, 1) = missing_value();
    x(1, 1) = 10;
    x(2, 1) = 99999;
    x(3, 1) = 99999;
    std::vector<std::string> names{"a", "b"};
    std::vector<std::size_t> train{0, 1};
    auto state = data::fit_preprocess(x, train, names);
    CHECK(state.fill_values[0] == doctest::Approx(2.0));
    CHECK(state.fill_values[1] == doctest::Approx(10.0));  // train-only mean over non-missing
    CHECK(state.scaler_mean[0] == doctest::Approx(2.0));

    // the train view standardizes to mean 0, sample std 1
    auto train_view = data::apply_preprocess(state, x, train);
    double mean = (train_view(0, 0) + train_view(1, 0)) / 2.0;
    CHECK(std::fabs(mean) < 1e-12);
}

TEST_CASE("filter_audio_only keeps exactly the 13 audio columns") {
    std::vector<chart::TrackRecord> tracks{track("a", 5, 100, 3, 10), track("b", 60, 50, 1, 2)};
    std::vector<client::AudioFeatures> features{features_for("a"), features_for("b", 0.7)};
    auto full = data::join_on_uri(tracks, features);
    auto audio = data::filter_audio_only(full);
    CHECK(audio.X.cols() == 13);
    CHECK(audio.column_names.front() == "danceability");
    CHECK(audio.column_names.back() == "time_signature");
    CHECK(audio.y == full.y);
    CHECK(audio.X(0, 0) == full.X(0, 3));

    // idempotent
    auto again = data::filter_audio_only(audio);
    CHECK(again.column_names == audio.column_names);
    CHECK(again.X == audio.X);

    // missing tempo
    auto broken = audio;
    broken.column_names[3] = "not_tempo";
    CHECK_THROWS_AS(data::filter_audio_only(broken), ValueError);

    // the 17-column variant (peak_rank included) filters to the same 13
    data::JoinOptions with_peak;
    with_peak.include_peak_rank = true;
    auto full17 = data::join_on_uri(tracks, features, with_peak);
    CHECK(full17.X.cols() == 17);
    auto audio13 = data::filter_audio_only(full17);
    CHECK(audio13.X.cols() == 13);
    CHECK(audio13.y == full17.y);
}

TEST_CASE("subset_rows restricts rows and recounts classes") {
    auto raw = testsupport::make_synthetic({.n_tracks = 50, .seed = 30});
    auto ds = data::join_on_uri(raw.tracks, raw.features);
    std::vector<std::size_t> rows{0, 3, 7, 11};
    auto sub = data::subset_rows(ds, rows);
    CHECK(sub.X.rows() == 4);
    CHECK(sub.column_names == ds.column_names);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(sub.row_ids[i] == ds.row_ids[rows[i]]);
        CHECK(sub.y[i] == ds.y[rows[i]]);
    }
    CHECK(sub.class_counts[0] + sub.class_counts[1] + sub.class_counts[2] == 4);
}

TEST_CASE("stratified holdout splits proportionally per class") {
    std::vector<int> y;
    y.insert(y.end(), 10, 0);
    y.insert(y.end(), 30, 1);
    y.insert(y.end(), 60, 2);
    auto split = data::stratified_holdout(y, 0.8, 42);
    std::array<int, 3> train_counts{};
    for (std::size_t r : split.train_rows) ++train_counts[static_cast<std::size_t>(y[r])];
    CHECK(train_counts[0] == 8);
    CHECK(train_counts[1] == 24);
    CHECK(train_counts[2] == 48);
    CHECK(split.train_rows.size() + split.test_rows.size() == y.size());

    // determinism + disjointness
    auto split2 = data::stratified_holdout(y, 0.8, 42);
    CHECK(split.train_rows == split2.train_rows);
    CHECK(split.test_rows == split2.test_rows);
    std::set<std::size_t> all(split.train_rows.begin(), split.train_rows.end());
    for (std::size_t r : split.test_rows) CHECK(all.insert(r).second);
    CHECK(all.size() == y.size());

    auto split3 = data::stratified_holdout(y, 0.8, 43);
    CHECK(split.train_rows != split3.train_rows);

    std::vector<int> tiny{0, 0, 1};
    CHECK_THROWS_AS(data::stratified_holdout(tiny, 0.8, 1), ValueError);
}

TEST_CASE("stratified kfold balances classes across folds") {
    std::vector<int> y;
    y.insert(y.end(), 10, 0);
    y.insert(y.end(), 20, 1);
    auto folds = data::stratified_kfold(y, 5, 7);
    REQUIRE(folds.size() == 5);
    for (const auto& fold : folds) {
        std::array<int, 2> counts{};
        for (std::size_t r : fold) ++counts[static_cast<std::size_t>(y[r])];
        CHECK(counts[0] == 2);
        CHECK(counts[1] == 4);
    }

    // class count 11 with k=5 -> fold counts a permutation of (3,2,2,2,2)
    std::vector<int> y2(11, 0);
    y2.insert(y2.end(), 10, 1);
    auto folds2 = data::stratified_kfold(y2, 5, 7);
    std::multiset<int> class0_counts;
    for (const auto& fold : folds2) {
        int c0 = 0;
        for (std::size_t r : fold) c0 += y2[r] == 0 ? 1 : 0;
        class0_counts.insert(c0);
    }
    CHECK(class0_counts == std::multiset<int>{2, 2, 2, 2, 3});

    CHECK_THROWS_AS(data::stratified_kfold(y, 1, 7), ValueError);
    std::vector<int> small{0, 0, 0, 1, 1, 1, 1, 1};
    CHECK_THROWS_AS(data::stratified_kfold(small, 5, 7), ValueError);  // class 0 smaller than k
}

TEST_CASE("split properties hold over random label vectors") {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 30 + rng() % 200;
        std::vector<int> y(n);
        for (auto& v : y) v = static_cast<int>(rng() % 3);
        std::array<std::size_t, 3> counts{};
        for (int v : y) ++counts[static_cast<std::size_t>(v)];
        if (std::any_of(counts.begin(), counts.end(), [](std::size_t c) { return c < 5; })) {
            continue;
        }
        auto folds = data::stratified_kfold(y, 5, rng());
        std::set<std::size_t> seen;
        for (int c = 0; c < 3; ++c) {
            std::vector<std::size_t> per_fold;
            for (const auto& fold : folds) {
                per_fold.push_back(static_cast<std::size_t>(std::count_if(
                    fold.begin(), fold.end(), [&](std::size_t r) { return y[r] == c; })));
            }
            auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
            CHECK(*hi - *lo <= 1);
        }
        for (const auto& fold : folds) {
            for (std::size_t r : fold) CHECK(seen.insert(r).second);
        }
        CHECK(seen.size() == n);

        auto split = data::stratified_holdout(y, 0.8, rng());
        for (int c = 0; c < 3; ++c) {
            auto in_class = [&](const std::vector<std::size_t>& rows) {
                return std::count_if(rows.begin(), rows.end(),
                                     [&](std::size_t r) { return y[r] == c; });
            };
            double want = 0.8 * static_cast<double>(counts[static_cast<std::size_t>(c)]);
            CHECK(std::fabs(static_cast<double>(in_class(split.train_rows)) - want) <= 1.0);
        }
    }
}

TEST_CASE("correlation matches the textbook formula") {
    Matrix x(5, 2);
    double xs[5] = {1.0, 2.0, 4.0, 4.5, 7.0};
    double ys[5] = {2.0, 1.5, 3.0, 5.0, 8.5};
    for (int i = 0; i < 5; ++i) {
        x(static_cast<std::size_t>(i), 0) = xs[i];
        x(static_cast<std::size_t>(i), 1) = ys[i];
    }
    auto corr = data::correlation_matrix(x);
    CHECK(corr(0, 0) == 1.0);
    CHECK(corr(1, 1) == 1.0);

    // independent direct computation
    double mx = 0;
    double my = 0;
    for (int i = 0; i < 5; ++i) {
        mx += xs[i] / 5;
        my += ys[i] / 5;
    }
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (int i = 0; i < 5; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    double expected = sxy / std::sqrt(sxx * syy);
    CHECK(std::fabs(corr(0, 1) - expected) < 1e-12);
    CHECK(corr(0, 1) == corr(1, 0));
}

TEST_CASE("correlation handles perfect anticorrelation and degenerate columns") {
    Matrix x(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        x(i, 0) = static_cast<double>(i);
        x(i, 1) = -static_cast<double>(i);
        x(i, 2) = 3.0;  // zero variance
    }
    auto corr = data::correlation_matrix(x);
    CHECK(corr(0, 1) == doctest::Approx(-1.0));
    CHECK(corr(0, 2) == 0.0);
    CHECK(corr(2, 2) == 1.0);

    Matrix one_row(1, 2, 0.0);
    CHECK_THROWS_AS(data::correlation_matrix(one_row), ValueError);
    Matrix with_nan(3, 1, missing_value());
    CHECK_THROWS_AS(data::correlation_matrix(with_nan), ValueError);
}

TEST_CASE("correlation is invariant to positive affine rescaling") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist(0.0, 2.0);
    Matrix x(40, 4);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = dist(rng);
    }
    auto base = data::correlation_matrix(x);
    Matrix scaled = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        scaled(i, 2) = 17.5 * x(i, 2) + 3.0;
        scaled(i, 0) = 0.001 * x(i, 0) - 9.0;
    }
    auto rescaled = data::correlation_matrix(scaled);
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            CHECK(std::fabs(base(a, b) - rescaled(a, b)) < 1e-9);
        }
    }
}

TEST_CASE("dataset csv round trip preserves missing cells and labels") {
    auto data_set = testsupport::make_synthetic({.n_tracks = 60, .seed = 9});
    auto ds = data::join_on_uri(data_set.tracks, data_set.features);
    auto text = data::dataset_to_csv(ds);
    auto back = data::dataset_from_csv(text);
    CHECK(back.column_names == ds.column_names);
    CHECK(back.y == ds.y);
    CHECK(back.row_ids == ds.row_ids);
    REQUIRE(back.X.rows() == ds.X.rows());
    for (std::size_t i = 0; i < ds.X.rows(); ++i) {
        for (std::size_t j = 0; j < ds.X.cols(); ++j) {
            if (is_missing(ds.X(i, j))) {
                CHECK(is_missing(back.X(i, j)));
            } else {
                CHECK(back.X(i, j) == ds.X(i, j));  // shortest round-trip formatting is exact
            }
        }
    }
}

TEST_CASE("preprocess json round trip") {
    Matrix x(3, 2);
    x(0, 0) = 1.25;
    x(1, 0) = 2.5;
    x(2, 0) = 3.125;
    x(0, 1) = 0.1;
    x(1, 1) = missing_value();
    x(2, 1) = 0.3;
    std::vector<std::string> names{"a", "b"};
    auto rows = iota_rows(3);
    auto state = data::fit_preprocess(x, rows, names);
    auto path = std::filesystem::temp_directory_path() / "chartml_test_preprocess.json";
    data::write_preprocess_json(path, state);
    auto back = data::read_preprocess_json(path);
    CHECK(back.column_names == state.column_names);
    CHECK(back.fill_values == state.fill_values);
    CHECK(back.scaler_mean == state.scaler_mean);
    CHECK(back.scaler_scale == state.scaler_scale);
    std::filesystem::remove(path);
}
