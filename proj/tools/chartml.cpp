// chartml: ingest daily chart files, enrich tracks with audio features,
// prepare datasets and evaluate the four classifiers.
//
// Exit codes: 0 ok, 1 usage, 2 ingest failure, 3 enrich failure,
// 4 evaluate/prepare failure.

#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chartml/error.hpp"
#include "chartml/pipeline.hpp"

namespace {

using namespace chartml;

int cmd_ingest(const std::string& chart_dir, const std::string& out) {
    try {
        auto summary = pipeline::run_ingest(chart_dir, out);
        fmt::print("parsed {} chart files, {} panel rows -> {} tracks\n", summary.files,
                   summary.panel_rows, summary.tracks);
        fmt::print("class distribution: TOP10={}, MID11_50={}, TAIL51PLUS={}\n",
                   summary.class_counts[0], summary.class_counts[1], summary.class_counts[2]);
        fmt::print("wrote {}\n", out);
        return 0;
    } catch (const ParseError& e) {
        if (!e.source().empty() && e.row() > 0) {
            fmt::print(stderr, "ingest failed: {} (file {}, row {})\n", e.what(), e.source(),
                       e.row());
        } else if (!e.source().empty()) {
            fmt::print(stderr, "ingest failed: {} (file {})\n", e.what(), e.source());
        } else {
            fmt::print(stderr, "ingest failed: {}\n", e.what());
        }
        return 2;
    } catch (const Error& e) {
        fmt::print(stderr, "ingest failed: {}\n", e.what());
        return 2;
    }
}

int cmd_enrich(pipeline::EnrichConfig config) {
    try {
        if (!config.mock_fixture) {
            client::load_credentials_from_env(config.client);
            if (config.client.client_id.empty() || config.client.client_secret.empty()) {
                fmt::print(stderr,
                           "enrich failed: CLIENT_ID / CLIENT_SECRET not set (or pass --mock)\n");
                return 3;
            }
        }
        auto summary = pipeline::run_enrich(config);
        fmt::print("{} unique tracks: {} already present, {} fetched, {} missing\n",
                   summary.requested, summary.skipped, summary.fetched, summary.misses.size());
        fmt::print("wrote {} (miss list: {})\n", config.out_features.string(),
                   summary.misses_path.string());
        return 0;
    } catch (const RetriesExhausted& e) {
        fmt::print(stderr, "enrich failed: {} (last status {})\n", e.what(), e.last_status());
        return 3;
    } catch (const AuthError& e) {
        fmt::print(stderr, "enrich failed: {}\n", e.what());
        return 3;
    } catch (const Error& e) {
        fmt::print(stderr, "enrich failed: {}\n", e.what());
        return 3;
    }
}

int cmd_prepare(const pipeline::PrepareConfig& config) {
    try {
        auto summary = pipeline::run_prepare(config);
        fmt::print("{} rows, {} full columns ({} tracks without features)\n", summary.rows,
                   summary.full_columns, summary.tracks_without_features);
        fmt::print("wrote {}, {}, {}\n", config.out_full.string(), config.out_audio.string(),
                   config.out_preprocess.string());
        return 0;
    } catch (const Error& e) {
        fmt::print(stderr, "prepare failed: {}\n", e.what());
        return 4;
    }
}

void print_metrics_table(const nlohmann::ordered_json& doc) {
    auto rows = doc.is_array() ? doc : nlohmann::ordered_json::array({doc});
    fmt::print("{:<8} {:<11} {:>9} {:>9} {:>9} {:>9}\n", "model", "features", "accuracy",
               "macro_f1", "cv_mean", "cv_std");
    for (const auto& entry : rows) {
        std::string cv_mean = entry.contains("cv")
                                  ? fmt::format("{:.4f}", entry["cv"]["mean"].get<double>())
                                  : "-";
        std::string cv_std = entry.contains("cv")
                                 ? fmt::format("{:.4f}", entry["cv"]["std"].get<double>())
                                 : "-";
        fmt::print("{:<8} {:<11} {:>9.4f} {:>9.4f} {:>9} {:>9}\n",
                   entry["model"].get<std::string>(), entry["features"].get<std::string>(),
                   entry["holdout"]["accuracy"].get<double>(),
                   entry["holdout"]["macro_f1"].get<double>(), cv_mean, cv_std);
    }
    for (const auto& entry : rows) {
        fmt::print("\nper-class ({}, holdout):\n", entry["model"].get<std::string>());
        fmt::print("  {:<12} {:>10} {:>10} {:>10}\n", "class", "precision", "recall", "f1");
        for (const auto& pc : entry["holdout"]["per_class"]) {
            fmt::print("  {:<12} {:>10.4f} {:>10.4f} {:>10.4f}\n",
                       pc["class"].get<std::string>(), pc["precision"].get<double>(),
                       pc["recall"].get<double>(), pc["f1"].get<double>());
        }
    }
}

int cmd_evaluate(const pipeline::EvaluateConfig& config) {
    try {
        auto doc = pipeline::run_evaluate(config);
        print_metrics_table(doc);
        if (doc.is_array() ? doc.front().contains("grid") : doc.contains("grid")) {
            const auto& grid = doc.is_array() ? doc.front()["grid"] : doc["grid"];
            fmt::print("\ngrid best: {} (mean macro-F1 {:.4f})\n", grid["best"]["params"].dump(),
                       grid["best"]["mean"].get<double>());
        }
        fmt::print("\nwrote {}\n", config.out_report.string());
        return 0;
    } catch (const Error& e) {
        fmt::print(stderr, "evaluate failed: {}\n", e.what());
        return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Daily-chart ingestion, audio-feature enrichment and peak-rank classification"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse daily chart CSVs into tracks.csv");
    std::string chart_dir;
    std::string tracks_out = "tracks.csv";
    ingest->add_option("--charts", chart_dir, "Directory of YYYY-MM-DD.csv files")->required();
    ingest->add_option("--out", tracks_out, "Output tracks.csv path");

    // enrich
    auto* enrich = app.add_subcommand("enrich", "Fetch audio features for every track");
    pipeline::EnrichConfig enrich_config;
    std::string mock_fixture;
    long long interval_ms = enrich_config.client.min_request_interval.count();
    enrich->add_option("--tracks", enrich_config.tracks_csv, "tracks.csv from ingest")->required();
    enrich->add_option("--out", enrich_config.out_features, "Output features.csv path")
        ->default_val("features.csv");
    enrich->add_option("--mock", mock_fixture, "Fixture JSON (id -> features) instead of the network");
    enrich->add_option("--token-endpoint", enrich_config.client.token_endpoint, "OAuth token URL")
        ->default_val("https://accounts.spotify.com/api/token");
    enrich->add_option("--features-endpoint", enrich_config.client.features_endpoint,
                       "Batch audio-features URL")
        ->default_val("https://api.spotify.com/v1/audio-features");
    enrich->add_option("--batch-size", enrich_config.client.batch_size, "Ids per request (1-100)");
    enrich->add_option("--interval-ms", interval_ms, "Minimum ms between request starts");
    enrich->add_option("--max-retries", enrich_config.client.max_retries, "Retries after 429");

    // prepare
    auto* prepare = app.add_subcommand("prepare", "Join tracks with features into model-ready datasets");
    pipeline::PrepareConfig prepare_config;
    prepare->add_option("--tracks", prepare_config.tracks_csv, "tracks.csv")->required();
    prepare->add_option("--features", prepare_config.features_csv, "features.csv")->required();
    prepare->add_option("--out-full", prepare_config.out_full)->default_val("dataset.full.csv");
    prepare->add_option("--out-audio", prepare_config.out_audio)->default_val("dataset.audio.csv");
    prepare->add_option("--out-preprocess", prepare_config.out_preprocess)
        ->default_val("preprocess.json");
    prepare->add_flag("--include-peak-rank", prepare_config.include_peak_rank,
                      "Add peak_rank as a feature column (leaks the label; off by default)");
    prepare->add_option("--seed", prepare_config.seed, "Split seed for preprocess.json");
    prepare->add_option("--train-fraction", prepare_config.train_fraction);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Train and score the classifiers");
    pipeline::EvaluateConfig eval_config;
    std::vector<std::string> model_flags;
    std::vector<std::string> param_flags;
    bool no_timestamp = false;
    std::string importances_svg = "importances.svg";
    std::string correlation_svg = "correlation.svg";
    evaluate->add_option("--data", eval_config.data_csv, "Prepared dataset CSV")
        ->default_val("dataset.full.csv");
    evaluate->add_option("--model", model_flags,
                         "logreg|knn|rf|gbt|all (repeatable; default all)");
    evaluate->add_option("--features", eval_config.features_mode, "full|audio_only")
        ->default_val("full");
    evaluate->add_option("--cv", eval_config.cv_k, "Stratified cross-validation folds (0 = off)");
    evaluate->add_option("--grid", eval_config.grid_file,
                         "Grid-search JSON file ({param: [values...]}); needs one --model");
    evaluate->add_option("--param", param_flags, "Override one hyperparameter, name=value");
    evaluate->add_option("--seed", eval_config.seed, "Seed for splits and ensembles");
    evaluate->add_option("--train-fraction", eval_config.train_fraction);
    evaluate->add_option("--report", eval_config.out_report)->default_val("report.json");
    evaluate->add_option("--importances-svg", importances_svg);
    evaluate->add_option("--correlation-svg", correlation_svg);
    evaluate->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp field from report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (ingest->parsed()) return cmd_ingest(chart_dir, tracks_out);

    if (enrich->parsed()) {
        if (!mock_fixture.empty()) enrich_config.mock_fixture = mock_fixture;
        enrich_config.client.min_request_interval = client::Duration(interval_ms);
        return cmd_enrich(enrich_config);
    }

    if (prepare->parsed()) return cmd_prepare(prepare_config);

    if (evaluate->parsed()) {
        for (const auto& m : model_flags) {
            if (m == "all") continue;
            eval_config.models.push_back(m);
        }
        for (const auto& p : param_flags) {
            auto eq = p.find('=');
            if (eq == std::string::npos) {
                fmt::print(stderr, "--param expects name=value, got '{}'\n", p);
                return 1;
            }
            eval_config.param_overrides.emplace_back(p.substr(0, eq), p.substr(eq + 1));
        }
        eval_config.timestamp = !no_timestamp;
        eval_config.out_importances_svg = importances_svg;
        eval_config.out_correlation_svg = correlation_svg;
        return cmd_evaluate(eval_config);
    }
    return 1;
}
