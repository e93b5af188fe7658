#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chartml::chart {

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;
    auto operator<=>(const Date&) const = default;
};

/// Parse "YYYY-MM-DD". Throws ValueError on malformed or impossible dates.
Date parse_date(std::string_view s);
std::string to_string(const Date& d);

/// Three-tier target label with fixed ordinal encoding 0/1/2. The ordinal
/// order follows chart tiers: better peak rank = lower ordinal.
enum class RankClass : int {
    Top10 = 0,
    Mid11_50 = 1,
    Tail51Plus = 2,
};
inline constexpr int kNumClasses = 3;

/// 1-10 -> Top10, 11-50 -> Mid11_50, 51-200 -> Tail51Plus.
/// Throws ValueError outside [1, 200].
RankClass label_rank_class(int peak_rank);

std::string_view to_string(RankClass c);
RankClass rank_class_from_string(std::string_view s);

/// One row of a daily chart file.
struct ChartEntry {
    Date chart_date;
    int rank = 0;  // 1..200, unique within a date
    std::string track_uri;
    std::string track_name;
    std::string artist_name;
    long long streams = 0;
};

/// All daily files concatenated, sorted by (date, rank).
struct Panel {
    std::vector<ChartEntry> entries;
    std::vector<Date> dates;  // distinct, ascending
};

/// Per-track aggregate over the whole panel.
struct TrackRecord {
    std::string track_uri;
    std::string track_name;
    std::string artist_name;
    int peak_rank = 0;                  // min daily rank
    long long streams = 0;              // streams on the retained row
    std::optional<int> previous_rank;   // rank on the most recent date before the retained row
    int days_on_chart = 0;              // distinct chart dates the track appears on
    RankClass label = RankClass::Tail51Plus;
};

/// Parse one daily chart CSV. The header row is matched case-insensitively
/// against a small alias table (chart exports vary across vintages):
///   rank:    rank, position, pos
///   uri:     uri, track_uri, spotify_uri, track_id, url, id
///   name:    track_name, name, track, title
///   artist:  artist_name, artist, artists, artist_names
///   streams: streams, stream_count, plays
/// Throws ParseError on an empty file, a missing column, a row whose rank or
/// streams does not parse (row index reported), or a duplicated rank.
std::vector<ChartEntry> parse_chart_file(std::string_view content, Date chart_date,
                                         const std::string& source = {});

/// Concatenate parsed files into a panel sorted by (date, rank). Throws
/// ParseError (with the file name attached) on parse failures, a repeated
/// date, or a duplicate (date, uri) pair.
Panel build_panel(std::span<const std::pair<Date, std::string>> files);

/// Collapse the panel to one labeled record per distinct track URI.
/// The retained row is the chronologically first entry whose rank equals the
/// peak rank; streams come from that row; previous_rank is the track's rank
/// on its latest chart date strictly before the retained row's date.
/// Throws ValueError on an empty panel.
std::vector<TrackRecord> reduce_to_tracks(const Panel& panel);

// tracks.csv: uri,name,artist,peak_rank,streams,previous_rank,days_on_chart,label
// (previous_rank empty when absent; label serialized TOP10 / MID11_50 / TAIL51PLUS)
std::string tracks_to_csv(std::span<const TrackRecord> tracks);
std::vector<TrackRecord> tracks_from_csv(std::string_view content, const std::string& source = {});
void write_tracks_csv(const std::filesystem::path& path, std::span<const TrackRecord> tracks);
std::vector<TrackRecord> read_tracks_csv(const std::filesystem::path& path);

}  // namespace chartml::chart
