#include "chartml/chart.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "chartml/csv.hpp"
#include "chartml/error.hpp"

namespace chartml::chart {

namespace {

// lowercase + spaces to underscores, so "Track Name" matches "track_name"
std::string normalize_header(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (c == ' ') c = '_';
    }
    return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    // tolerate surrounding spaces, reject anything else non-numeric
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    Int value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

// Header aliases, matched after lowercasing.
const std::vector<std::string>& aliases(int which) {
    static const std::vector<std::string> kRank{"rank", "position", "pos"};
    static const std::vector<std::string> kUri{"uri", "track_uri", "spotify_uri", "track_id", "url", "id"};
    static const std::vector<std::string> kName{"track_name", "name", "track", "title"};
    static const std::vector<std::string> kArtist{"artist_name", "artist", "artists", "artist_names"};
    static const std::vector<std::string> kStreams{"streams", "stream_count", "plays"};
    switch (which) {
        case 0: return kRank;
        case 1: return kUri;
        case 2: return kName;
        case 3: return kArtist;
        default: return kStreams;
    }
}

std::size_t find_column(const std::vector<std::string>& header, int which, const char* label,
                        const std::string& source) {
    for (const std::string& alias : aliases(which)) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (normalize_header(header[i]) == alias) return i;
        }
    }
    throw ParseError(fmt::format("header is missing a {} column", label), source, 1);
}

}  // namespace

Date parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw ValueError(fmt::format("bad date '{}': expected YYYY-MM-DD", s));
    }
    auto y = parse_int<int>(s.substr(0, 4));
    auto m = parse_int<int>(s.substr(5, 2));
    auto d = parse_int<int>(s.substr(8, 2));
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1 || *d > days_in_month(*y, *m)) {
        throw ValueError(fmt::format("bad date '{}'", s));
    }
    return Date{*y, *m, *d};
}

std::string to_string(const Date& d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", d.year, d.month, d.day);
}

RankClass label_rank_class(int peak_rank) {
    if (peak_rank < 1 || peak_rank > 200) {
        throw ValueError(fmt::format("peak_rank {} out of range [1, 200]", peak_rank));
    }
    if (peak_rank <= 10) return RankClass::Top10;
    if (peak_rank <= 50) return RankClass::Mid11_50;
    return RankClass::Tail51Plus;
}

std::string_view to_string(RankClass c) {
    switch (c) {
        case RankClass::Top10: return "TOP10";
        case RankClass::Mid11_50: return "MID11_50";
        case RankClass::Tail51Plus: return "TAIL51PLUS";
    }
    return "?";
}

RankClass rank_class_from_string(std::string_view s) {
    if (s == "TOP10") return RankClass::Top10;
    if (s == "MID11_50") return RankClass::Mid11_50;
    if (s == "TAIL51PLUS") return RankClass::Tail51Plus;
    throw ValueError(fmt::format("unknown rank class '{}'", s));
}

std::vector<ChartEntry> parse_chart_file(std::string_view content, Date chart_date,
                                         const std::string& source) {
    auto rows = csv::parse(content, source);
    if (rows.empty()) throw ParseError("empty chart file", source);
    const auto& header = rows.front();
    std::size_t rank_col = find_column(header, 0, "rank", source);
    std::size_t uri_col = find_column(header, 1, "track URI", source);
    std::size_t name_col = find_column(header, 2, "track name", source);
    std::size_t artist_col = find_column(header, 3, "artist", source);
    std::size_t streams_col = find_column(header, 4, "streams", source);
    if (rows.size() == 1) throw ParseError("chart file has a header but no rows", source);

    std::vector<ChartEntry> entries;
    entries.reserve(rows.size() - 1);
    std::unordered_set<int> seen_ranks;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::size_t need = std::max({rank_col, uri_col, name_col, artist_col, streams_col});
        if (row.size() <= need) {
            throw ParseError(fmt::format("row {} has {} fields, expected at least {}", r + 1,
                                         row.size(), need + 1),
                             source, r + 1);
        }
        auto rank = parse_int<int>(row[rank_col]);
        if (!rank || *rank < 1 || *rank > 200) {
            throw ParseError(fmt::format("row {}: bad rank '{}'", r + 1, row[rank_col]), source, r + 1);
        }
        auto streams = parse_int<long long>(row[streams_col]);
        if (!streams || *streams < 0) {
            throw ParseError(fmt::format("row {}: bad streams '{}'", r + 1, row[streams_col]),
                             source, r + 1);
        }
        if (row[uri_col].empty()) {
            throw ParseError(fmt::format("row {}: empty track URI", r + 1), source, r + 1);
        }
        if (!seen_ranks.insert(*rank).second) {
            throw ParseError(fmt::format("row {}: duplicate rank {} for {}", r + 1, *rank,
                                         to_string(chart_date)),
                             source, r + 1);
        }
        entries.push_back(ChartEntry{chart_date, *rank, row[uri_col], row[name_col],
                                     row[artist_col], *streams});
    }
    return entries;
}

Panel build_panel(std::span<const std::pair<Date, std::string>> files) {
    Panel panel;
    std::set<Date> dates;
    for (const auto& [date, content] : files) {
        if (!dates.insert(date).second) {
            throw ParseError(fmt::format("duplicate chart date {}", to_string(date)));
        }
        auto entries = parse_chart_file(content, date, to_string(date));
        panel.entries.insert(panel.entries.end(), entries.begin(), entries.end());
    }
    std::sort(panel.entries.begin(), panel.entries.end(), [](const ChartEntry& a, const ChartEntry& b) {
        return std::tie(a.chart_date, a.rank) < std::tie(b.chart_date, b.rank);
    });
    std::set<std::pair<Date, std::string>> seen;
    for (const ChartEntry& e : panel.entries) {
        if (!seen.insert({e.chart_date, e.track_uri}).second) {
            throw ParseError(fmt::format("duplicate (date, uri) pair: {} {}",
                                         to_string(e.chart_date), e.track_uri));
        }
    }
    panel.dates.assign(dates.begin(), dates.end());
    return panel;
}

std::vector<TrackRecord> reduce_to_tracks(const Panel& panel) {
    if (panel.entries.empty()) throw ValueError("cannot reduce an empty panel");

    // Group rows per track, keeping panel order (already date-ascending).
    std::unordered_map<std::string, std::vector<const ChartEntry*>> by_uri;
    std::vector<std::string> order;  // first-appearance order for stable output
    for (const ChartEntry& e : panel.entries) {
        auto [it, inserted] = by_uri.try_emplace(e.track_uri);
        if (inserted) order.push_back(e.track_uri);
        it->second.push_back(&e);
    }

    std::vector<TrackRecord> records;
    records.reserve(order.size());
    for (const std::string& uri : order) {
        const auto& rows = by_uri[uri];
        int peak = rows.front()->rank;
        for (const ChartEntry* e : rows) peak = std::min(peak, e->rank);
        const ChartEntry* retained = nullptr;
        for (const ChartEntry* e : rows) {
            if (e->rank == peak) {
                retained = e;
                break;  // rows are date-ascending, so this is the first peak date
            }
        }
        std::optional<int> previous;
        for (const ChartEntry* e : rows) {
            if (e->chart_date < retained->chart_date) {
                // rows ascend by date, so the last match is the most recent
                previous = e->rank;
            }
        }
        records.push_back(TrackRecord{
            uri,
            retained->track_name,
            retained->artist_name,
            peak,
            retained->streams,
            previous,
            static_cast<int>(rows.size()),  // (date, uri) pairs are unique, so rows = distinct dates
            label_rank_class(peak),
        });
    }
    return records;
}

std::string tracks_to_csv(std::span<const TrackRecord> tracks) {
    std::string out = "uri,name,artist,peak_rank,streams,previous_rank,days_on_chart,label\n";
    for (const TrackRecord& t : tracks) {
        out += csv::join_row({t.track_uri, t.track_name, t.artist_name,
                              std::to_string(t.peak_rank), std::to_string(t.streams),
                              t.previous_rank ? std::to_string(*t.previous_rank) : std::string{},
                              std::to_string(t.days_on_chart), std::string(to_string(t.label))});
        out += '\n';
    }
    return out;
}

std::vector<TrackRecord> tracks_from_csv(std::string_view content, const std::string& source) {
    auto rows = csv::parse(content, source);
    if (rows.empty()) throw ParseError("empty tracks file", source);
    std::vector<TrackRecord> tracks;
    tracks.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 8) {
            throw ParseError(fmt::format("row {}: expected 8 fields, got {}", r + 1, row.size()),
                             source, r + 1);
        }
        auto peak = parse_int<int>(row[3]);
        auto streams = parse_int<long long>(row[4]);
        auto days = parse_int<int>(row[6]);
        if (!peak || !streams || !days) {
            throw ParseError(fmt::format("row {}: non-numeric peak_rank/streams/days_on_chart", r + 1),
                             source, r + 1);
        }
        std::optional<int> previous;
        if (!row[5].empty()) {
            auto p = parse_int<int>(row[5]);
            if (!p) throw ParseError(fmt::format("row {}: bad previous_rank '{}'", r + 1, row[5]),
                                     source, r + 1);
            previous = *p;
        }
        tracks.push_back(TrackRecord{row[0], row[1], row[2], *peak, *streams, previous, *days,
                                     rank_class_from_string(row[7])});
    }
    return tracks;
}

void write_tracks_csv(const std::filesystem::path& path, std::span<const TrackRecord> tracks) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << tracks_to_csv(tracks);
}

std::vector<TrackRecord> read_tracks_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return tracks_from_csv(buf.str(), path.string());
}

}  // namespace chartml::chart
