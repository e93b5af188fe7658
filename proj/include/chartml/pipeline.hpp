#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartml/chart.hpp"
#include "chartml/client.hpp"

// End-to-end wiring behind the CLI subcommands. Kept as library functions so
// the integration tests drive the same code paths as the binary.

namespace chartml::pipeline {

struct IngestSummary {
    std::size_t files = 0;
    std::size_t panel_rows = 0;
    std::size_t tracks = 0;
    std::array<std::size_t, chart::kNumClasses> class_counts{};
};

/// Read every YYYY-MM-DD.csv under chart_dir, build the panel, reduce it and
/// write tracks.csv. Throws ParseError/ValueError with file context.
IngestSummary run_ingest(const std::filesystem::path& chart_dir,
                         const std::filesystem::path& out_tracks);

struct EnrichConfig {
    std::filesystem::path tracks_csv;
    std::filesystem::path out_features;
    std::optional<std::filesystem::path> mock_fixture;  // offline fixture player
    client::ClientConfig client;
};

struct EnrichSummary {
    std::size_t requested = 0;  // unique ids in tracks.csv
    std::size_t skipped = 0;    // already present in an existing output file
    std::size_t fetched = 0;
    std::vector<std::string> misses;
    std::filesystem::path misses_path;
};

/// Fetch features for every track not already present in the output file;
/// the miss list is written next to it as <out>.misses.txt. Tests may inject
/// their own transport/clock.
EnrichSummary run_enrich(const EnrichConfig& config,
                         client::Transport* transport_override = nullptr,
                         client::Clock* clock_override = nullptr);

struct PrepareConfig {
    std::filesystem::path tracks_csv;
    std::filesystem::path features_csv;
    std::filesystem::path out_full;
    std::filesystem::path out_audio;
    std::filesystem::path out_preprocess;
    bool include_peak_rank = false;
    std::uint64_t seed = 42;
    double train_fraction = 0.8;  // preprocess.json is fitted on this train split
};

struct PrepareSummary {
    std::size_t rows = 0;
    std::size_t full_columns = 0;
    std::size_t tracks_without_features = 0;
};

PrepareSummary run_prepare(const PrepareConfig& config);

struct EvaluateConfig {
    std::filesystem::path data_csv;
    std::string features_mode = "full";  // "full" | "audio_only"
    std::vector<std::string> models;     // subset of logreg/knn/rf/gbt, or empty = all four
    std::vector<std::pair<std::string, std::string>> param_overrides;  // name, value ("null" ok)
    int cv_k = 0;                        // 0 = holdout only
    std::optional<std::filesystem::path> grid_file;  // JSON {param: [values...]}
    std::uint64_t seed = 42;
    double train_fraction = 0.8;
    bool timestamp = true;
    std::filesystem::path out_report;
    std::optional<std::filesystem::path> out_importances_svg;
    std::optional<std::filesystem::path> out_correlation_svg;
};

/// Run holdout (always), cross-validation and grid search (when configured)
/// for every requested model; write report.json and the SVG plots. Returns
/// the report document (an object for one model, an array for several).
nlohmann::ordered_json run_evaluate(const EvaluateConfig& config);

/// Transport that replays a fixture file instead of the network: the token
/// endpoint always succeeds and feature GETs are answered from a JSON map of
/// id -> feature object (or null for a known miss).
class FixtureTransport final : public client::Transport {
public:
    explicit FixtureTransport(const std::filesystem::path& fixture_file);
    explicit FixtureTransport(nlohmann::json fixture);

    client::TransportResponse send(const client::HttpRequest& request) override;

private:
    nlohmann::json fixture_;
};

std::string percent_decode(std::string_view s);

}  // namespace chartml::pipeline
