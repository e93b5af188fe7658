#include "chartml/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "chartml/dataset.hpp"
#include "chartml/error.hpp"
#include "chartml/eval.hpp"
#include "chartml/http_transport.hpp"
#include "chartml/svg.hpp"

namespace chartml::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << content;
}

}  // namespace

IngestSummary run_ingest(const std::filesystem::path& chart_dir,
                         const std::filesystem::path& out_tracks) {
    if (!std::filesystem::is_directory(chart_dir)) {
        throw ValueError(fmt::format("{} is not a directory", chart_dir.string()));
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(chart_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            paths.push_back(entry.path());
        }
    }
    if (paths.empty()) {
        throw ValueError(fmt::format("no chart files in {}", chart_dir.string()));
    }
    std::sort(paths.begin(), paths.end());

    std::vector<std::pair<chart::Date, std::string>> files;
    files.reserve(paths.size());
    for (const auto& path : paths) {
        chart::Date date;
        try {
            date = chart::parse_date(path.stem().string());
        } catch (const ValueError&) {
            throw ParseError(
                fmt::format("{}: file name is not a YYYY-MM-DD chart date", path.string()),
                path.string());
        }
        files.emplace_back(date, read_file(path));
    }

    chart::Panel panel = chart::build_panel(files);
    auto tracks = chart::reduce_to_tracks(panel);
    chart::write_tracks_csv(out_tracks, tracks);

    IngestSummary summary;
    summary.files = files.size();
    summary.panel_rows = panel.entries.size();
    summary.tracks = tracks.size();
    for (const auto& t : tracks) ++summary.class_counts[static_cast<std::size_t>(t.label)];
    return summary;
}

FixtureTransport::FixtureTransport(const std::filesystem::path& fixture_file) {
    fixture_ = json::parse(read_file(fixture_file), nullptr, false);
    if (fixture_.is_discarded() || !fixture_.is_object()) {
        throw ParseError("fixture file is not a JSON object", fixture_file.string());
    }
}

FixtureTransport::FixtureTransport(nlohmann::json fixture) : fixture_(std::move(fixture)) {}

client::TransportResponse FixtureTransport::send(const client::HttpRequest& request) {
    if (request.method == "POST") {
        return {200, R"({"access_token":"fixture-token","expires_in":3600})", std::nullopt};
    }
    auto pos = request.url.find("ids=");
    if (pos == std::string::npos) return {400, "missing ids", std::nullopt};
    std::string joined = percent_decode(request.url.substr(pos + 4));

    json entries = json::array();
    std::size_t start = 0;
    while (start <= joined.size()) {
        auto end = joined.find(',', start);
        if (end == std::string::npos) end = joined.size();
        std::string id = joined.substr(start, end - start);
        start = end + 1;
        if (id.empty()) continue;
        auto it = fixture_.find(id);
        if (it == fixture_.end() || it->is_null()) {
            entries.push_back(nullptr);
        } else {
            json entry = *it;
            entry["id"] = id;
            entries.push_back(std::move(entry));
        }
        if (end == joined.size()) break;
    }
    json body;
    body["audio_features"] = std::move(entries);
    return {200, body.dump(), std::nullopt};
}

std::string percent_decode(std::string_view s) {
    auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && hex(s[i + 1]) >= 0 && hex(s[i + 2]) >= 0) {
            out += static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2]));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

EnrichSummary run_enrich(const EnrichConfig& config, client::Transport* transport_override,
                         client::Clock* clock_override) {
    auto tracks = chart::read_tracks_csv(config.tracks_csv);
    std::vector<std::string> uris;
    std::unordered_set<std::string> seen;
    for (const auto& t : tracks) {
        if (seen.insert(t.track_uri).second) uris.push_back(t.track_uri);
    }

    EnrichSummary summary;
    summary.requested = uris.size();

    // resume: keep rows already fetched into the output file
    std::vector<client::AudioFeatures> existing;
    if (std::filesystem::exists(config.out_features)) {
        existing = client::read_features_csv(config.out_features);
    }
    std::unordered_set<std::string> have;
    for (const auto& f : existing) have.insert(f.track_uri);
    std::vector<std::string> todo;
    for (const auto& uri : uris) {
        if (!have.contains(uri)) todo.push_back(uri);
    }
    summary.skipped = uris.size() - todo.size();

    client::ClientConfig client_config = config.client;
    std::unique_ptr<client::Transport> owned_transport;
    client::Transport* transport = transport_override;
    if (transport == nullptr) {
        if (config.mock_fixture) {
            owned_transport = std::make_unique<FixtureTransport>(*config.mock_fixture);
            if (client_config.client_id.empty()) client_config.client_id = "fixture";
            if (client_config.client_secret.empty()) client_config.client_secret = "fixture";
        } else {
            owned_transport = std::make_unique<client::HttpTransport>();
        }
        transport = owned_transport.get();
    }
    client::SystemClock system_clock;
    client::Clock* clock = clock_override ? clock_override : &system_clock;

    client::EnrichmentClient enrichment(*transport, *clock, client_config);
    client::EnrichResult result = enrichment.enrich_all(todo);
    summary.fetched = result.features.size();
    summary.misses = result.misses;

    existing.insert(existing.end(), std::make_move_iterator(result.features.begin()),
                    std::make_move_iterator(result.features.end()));
    client::write_features_csv(config.out_features, existing);

    summary.misses_path = config.out_features;
    summary.misses_path += ".misses.txt";
    std::string miss_lines;
    for (const auto& uri : summary.misses) {
        miss_lines += uri;
        miss_lines += '\n';
    }
    write_file(summary.misses_path, miss_lines);
    return summary;
}

PrepareSummary run_prepare(const PrepareConfig& config) {
    auto tracks = chart::read_tracks_csv(config.tracks_csv);
    auto features = client::read_features_csv(config.features_csv);

    data::JoinOptions join_options;
    join_options.include_peak_rank = config.include_peak_rank;
    data::Dataset full = data::join_on_uri(tracks, features, join_options);
    data::write_dataset_csv(config.out_full, full);

    data::Dataset audio = data::filter_audio_only(full);
    data::write_dataset_csv(config.out_audio, audio);

    // fitted on the training side of the configured split so no held-out
    // statistics leak into the recorded fill values / scaler
    auto split = data::stratified_holdout(full, config.train_fraction, config.seed);
    auto state = data::fit_preprocess(full.X, split.train_rows, full.column_names);
    data::write_preprocess_json(config.out_preprocess, state);

    PrepareSummary summary;
    summary.rows = full.X.rows();
    summary.full_columns = full.X.cols();
    std::unordered_set<std::string> have;
    for (const auto& f : features) have.insert(f.track_uri);
    for (const auto& t : tracks) {
        if (!have.contains(t.track_uri)) ++summary.tracks_without_features;
    }
    return summary;
}

namespace {

ordered_json grid_value_to_json(const eval::GridValue& v) {
    if (!v) return nullptr;
    double d = *v;
    if (d == std::floor(d) && std::fabs(d) < 1e15) return static_cast<long long>(d);
    return d;
}

ordered_json eval_report_to_json(const eval::EvalReport& report) {
    ordered_json out;
    out["accuracy"] = report.accuracy;
    out["macro_f1"] = report.macro_f1;
    auto per_class = ordered_json::array();
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        per_class.push_back(
            {{"class", std::string(chart::to_string(static_cast<chart::RankClass>(c)))},
             {"precision", report.per_class[c].precision},
             {"recall", report.per_class[c].recall},
             {"f1", report.per_class[c].f1}});
    }
    out["per_class"] = std::move(per_class);
    auto confusion = ordered_json::array();
    for (std::size_t i = 0; i < report.confusion.n_classes; ++i) {
        auto row = ordered_json::array();
        for (std::size_t j = 0; j < report.confusion.n_classes; ++j) {
            row.push_back(report.confusion.at(i, j));
        }
        confusion.push_back(std::move(row));
    }
    out["confusion"] = std::move(confusion);
    return out;
}

eval::ParamGrid load_param_grid(const std::filesystem::path& path) {
    ordered_json doc = ordered_json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError("grid file must be a JSON object of {param: [values...]}", path.string());
    }
    eval::ParamGrid grid;
    for (const auto& [name, values] : doc.items()) {
        if (!values.is_array()) {
            throw ParseError(fmt::format("grid parameter '{}' must map to an array", name),
                             path.string());
        }
        std::vector<eval::GridValue> list;
        for (const auto& v : values) {
            if (v.is_null()) {
                list.push_back(std::nullopt);
            } else if (v.is_number()) {
                list.push_back(v.get<double>());
            } else {
                throw ParseError(
                    fmt::format("grid parameter '{}' has a non-numeric, non-null value", name),
                    path.string());
            }
        }
        grid.emplace_back(name, std::move(list));
    }
    return grid;
}

eval::GridValue parse_override_value(const std::string& text) {
    if (text == "null" || text == "none" || text == "unlimited") return std::nullopt;
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValueError(fmt::format("cannot parse parameter value '{}'", text));
    }
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

}  // namespace

ordered_json run_evaluate(const EvaluateConfig& config) {
    if (config.features_mode != "full" && config.features_mode != "audio_only") {
        throw ValueError(fmt::format("unknown features mode '{}'", config.features_mode));
    }
    data::Dataset dataset = data::read_dataset_csv(config.data_csv);
    if (config.features_mode == "audio_only") dataset = data::filter_audio_only(dataset);

    std::vector<std::string> models = config.models;
    if (models.empty()) models = {"logreg", "knn", "rf", "gbt"};
    if (!config.param_overrides.empty() && models.size() != 1) {
        throw ValueError("parameter overrides need exactly one --model");
    }
    std::optional<eval::ParamGrid> grid;
    if (config.grid_file) {
        if (models.size() != 1) throw ValueError("grid search needs exactly one --model");
        grid = load_param_grid(*config.grid_file);
    }

    auto reports = ordered_json::array();
    const learn::TrainedModel* best_tree_model = nullptr;
    double best_tree_score = -1.0;
    std::vector<std::unique_ptr<learn::TrainedModel>> kept_models;

    for (const std::string& name : models) {
        learn::LearnerSpec spec = learn::default_spec(name);
        // the global seed drives the ensembles unless explicitly overridden
        if (auto* rf = std::get_if<learn::ForestParams>(&spec)) rf->seed = config.seed;
        if (auto* gbt = std::get_if<learn::GbtParams>(&spec)) gbt->seed = config.seed;
        for (const auto& [pname, pvalue] : config.param_overrides) {
            spec = eval::apply_param(spec, pname, parse_override_value(pvalue));
        }

        ordered_json entry;
        entry["model"] = name;
        entry["features"] = config.features_mode;
        entry["seed"] = config.seed;
        if (config.timestamp) entry["timestamp"] = utc_timestamp();

        auto trained = std::make_unique<learn::TrainedModel>();
        eval::EvalReport holdout = eval::holdout_evaluate(spec, dataset, config.train_fraction,
                                                          config.seed, trained.get());
        entry["holdout"] = eval_report_to_json(holdout);

        if (config.cv_k > 0) {
            eval::CvResult cv = eval::cross_validate(spec, dataset, config.cv_k, config.seed);
            entry["cv"] = {{"k", config.cv_k},
                           {"fold_scores", cv.fold_scores},
                           {"mean", cv.mean},
                           {"std", cv.stddev}};
        }

        if (grid) {
            // tune on the training split only; the held-out rows never see a
            // grid candidate
            auto split = data::stratified_holdout(dataset, config.train_fraction, config.seed);
            data::Dataset train_only = data::subset_rows(dataset, split.train_rows);
            eval::GridResult gr = eval::grid_search(spec, *grid, train_only,
                                                    config.cv_k > 0 ? config.cv_k : 5, config.seed);
            auto cells = ordered_json::array();
            for (const auto& cell : gr.cells) {
                ordered_json params;
                for (const auto& [pname, pvalue] : cell.params) {
                    params[pname] = grid_value_to_json(pvalue);
                }
                cells.push_back({{"params", std::move(params)},
                                 {"mean", cell.mean_score},
                                 {"std", cell.stddev}});
            }
            ordered_json best_params;
            for (const auto& [pname, pvalue] : gr.cells[gr.best_index].params) {
                best_params[pname] = grid_value_to_json(pvalue);
            }
            entry["grid"] = {{"cells", std::move(cells)},
                             {"best", {{"params", std::move(best_params)},
                                       {"mean", gr.cells[gr.best_index].mean_score}}}};
        }

        bool tree_model = name == "rf" || name == "gbt";
        if (tree_model) {
            auto ranked = learn::feature_importance(*trained);
            auto importances = ordered_json::array();
            for (const auto& [col, value] : ranked) {
                importances.push_back(ordered_json::array({col, value}));
            }
            entry["importances"] = std::move(importances);
            if (holdout.macro_f1 > best_tree_score) {
                best_tree_score = holdout.macro_f1;
                best_tree_model = trained.get();
            }
            kept_models.push_back(std::move(trained));
        }
        reports.push_back(std::move(entry));
    }

    if (config.out_importances_svg && best_tree_model) {
        auto ranked = learn::feature_importance(*best_tree_model);
        write_file(*config.out_importances_svg, svg::bar_chart(ranked, "Feature importance"));
    }
    if (config.out_correlation_svg) {
        // EDA plot: impute with full-data means, then Pearson correlations
        std::vector<std::size_t> all_rows(dataset.X.rows());
        std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
        auto state = data::fit_preprocess(dataset.X, all_rows, dataset.column_names);
        Matrix filled(dataset.X.rows(), dataset.X.cols());
        for (std::size_t i = 0; i < dataset.X.rows(); ++i) {
            for (std::size_t j = 0; j < dataset.X.cols(); ++j) {
                double v = dataset.X(i, j);
                filled(i, j) = is_missing(v) ? state.fill_values[j] : v;
            }
        }
        Matrix corr = data::correlation_matrix(filled);
        write_file(*config.out_correlation_svg,
                   svg::heatmap(corr, dataset.column_names, "Pairwise correlation"));
    }

    ordered_json doc = reports.size() == 1 ? reports.front() : reports;
    write_file(config.out_report, doc.dump(2) + "\n");
    return doc;
}

}  // namespace chartml::pipeline
