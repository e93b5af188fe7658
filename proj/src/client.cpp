#include "chartml/client.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "chartml/csv.hpp"
#include "chartml/error.hpp"

namespace chartml::client {

using nlohmann::json;

double audio_column_value(const AudioFeatures& f, std::size_t column) {
    switch (column) {
        case 0: return f.danceability;
        case 1: return f.energy;
        case 2: return f.valence;
        case 3: return f.tempo;
        case 4: return f.acousticness;
        case 5: return f.loudness;
        case 6: return f.instrumentalness;
        case 7: return f.speechiness;
        case 8: return f.liveness;
        case 9: return static_cast<double>(f.key);
        case 10: return static_cast<double>(f.mode);
        case 11: return static_cast<double>(f.duration_ms);
        case 12: return static_cast<double>(f.time_signature);
        default: throw ValueError(fmt::format("audio column index {} out of range", column));
    }
}

Duration SystemClock::now() {
    return std::chrono::duration_cast<Duration>(
        std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(Duration d) { std::this_thread::sleep_for(d); }

void load_credentials_from_env(ClientConfig& config) {
    if (const char* id = std::getenv("CLIENT_ID")) config.client_id = id;
    if (const char* secret = std::getenv("CLIENT_SECRET")) config.client_secret = secret;
}

std::vector<std::vector<std::string>> chunk_uris(std::span<const std::string> uris, int batch_size) {
    if (batch_size < 1) throw ValueError(fmt::format("batch_size must be >= 1, got {}", batch_size));
    std::vector<std::vector<std::string>> batches;
    std::size_t step = static_cast<std::size_t>(batch_size);
    for (std::size_t i = 0; i < uris.size(); i += step) {
        std::size_t end = std::min(uris.size(), i + step);
        batches.emplace_back(uris.begin() + static_cast<std::ptrdiff_t>(i),
                             uris.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

std::string bare_track_id(std::string_view uri) {
    auto pos = uri.rfind(':');
    return std::string(pos == std::string_view::npos ? uri : uri.substr(pos + 1));
}

std::string percent_encode(std::string_view s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                          (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~';
        if (unreserved) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        }
    }
    return out;
}

HttpRequest build_batch_request(std::span<const std::string> batch, const std::string& endpoint) {
    if (batch.empty()) throw ValueError("cannot build a request for an empty batch");
    std::string joined;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (i) joined += ',';
        joined += bare_track_id(batch[i]);
    }
    HttpRequest req;
    req.method = "GET";
    req.url = fmt::format("{}?ids={}", endpoint, percent_encode(joined));
    return req;
}

EnrichmentClient::EnrichmentClient(Transport& transport, Clock& clock, ClientConfig config)
    : transport_(transport), clock_(clock), config_(std::move(config)) {
    if (config_.batch_size < 1 || config_.batch_size > 100) {
        throw ValueError(fmt::format("batch_size must be in [1, 100], got {}", config_.batch_size));
    }
    if (config_.max_retries < 0) {
        throw ValueError(fmt::format("max_retries must be >= 0, got {}", config_.max_retries));
    }
    if (config_.min_request_interval < Duration(0)) {
        throw ValueError("min_request_interval must be >= 0");
    }
}

std::string EnrichmentClient::ensure_token() {
    std::lock_guard lock(mutex_);
    return ensure_token_locked();
}

std::string EnrichmentClient::ensure_token_locked() {
    if (token_ && clock_.now() < token_expiry_) return *token_;
    if (config_.client_id.empty() || config_.client_secret.empty()) {
        throw AuthError("missing credentials (CLIENT_ID / CLIENT_SECRET)");
    }
    HttpRequest req;
    req.method = "POST";
    req.url = config_.token_endpoint;
    req.headers = {{"Content-Type", "application/x-www-form-urlencoded"}};
    req.body = fmt::format("grant_type=client_credentials&client_id={}&client_secret={}",
                           percent_encode(config_.client_id), percent_encode(config_.client_secret));
    TransportResponse resp = transport_.send(req);
    if (resp.status < 200 || resp.status >= 300) {
        throw AuthError(fmt::format("token endpoint returned status {}", resp.status), resp.status);
    }
    json body = json::parse(resp.body, nullptr, false);
    if (body.is_discarded() || !body.contains("access_token")) {
        throw MalformedBody("token response missing access_token");
    }
    long long expires_in = body.value("expires_in", 3600LL);
    token_ = body["access_token"].get<std::string>();
    // refresh 30 s early so a token never expires mid-batch
    token_expiry_ = clock_.now() + Duration(std::max(0LL, expires_in * 1000 - 30'000));
    return *token_;
}

void EnrichmentClient::pace_locked() {
    if (last_request_start_) {
        Duration elapsed = clock_.now() - *last_request_start_;
        if (elapsed < config_.min_request_interval) {
            clock_.sleep_for(config_.min_request_interval - elapsed);
        }
    }
    last_request_start_ = clock_.now();
}

EnrichResult EnrichmentClient::fetch_batch(std::span<const std::string> batch) {
    std::lock_guard lock(mutex_);
    return fetch_batch_locked(batch);
}

EnrichResult EnrichmentClient::fetch_batch_locked(std::span<const std::string> batch) {
    HttpRequest base = build_batch_request(batch, config_.features_endpoint);
    bool token_refreshed = false;
    int attempt = 1;  // total send attempts, retries allowed on top of the first
    for (;;) {
        HttpRequest req = base;
        req.headers.push_back({"Authorization", fmt::format("Bearer {}", ensure_token_locked())});
        pace_locked();
        TransportResponse resp = transport_.send(req);
        if (resp.status >= 200 && resp.status < 300) {
            std::vector<std::string> ids;
            ids.reserve(batch.size());
            for (const std::string& uri : batch) ids.push_back(bare_track_id(uri));
            EnrichResult result = parse_features_body(resp.body, ids);
            // report misses as the original URIs, not the bare ids
            std::unordered_map<std::string, std::string> uri_of;
            for (std::size_t i = 0; i < batch.size(); ++i) uri_of[ids[i]] = batch[i];
            for (std::string& miss : result.misses) miss = uri_of[miss];
            for (AudioFeatures& f : result.features) f.track_uri = uri_of[f.track_uri];
            return result;
        }
        if (resp.status == 401 && !token_refreshed) {
            token_refreshed = true;
            token_.reset();  // forces a refresh on the next loop
            continue;
        }
        if (resp.status == 429) {
            if (attempt > config_.max_retries) {
                throw RetriesExhausted(
                    fmt::format("throttled after {} attempts (last status 429)", attempt),
                    resp.status, attempt);
            }
            auto backoff = Duration(static_cast<long long>(std::llround(
                static_cast<double>(config_.backoff_base.count()) *
                std::pow(config_.backoff_factor, attempt - 1))));
            Duration wait = backoff;
            if (resp.retry_after && *resp.retry_after > wait) wait = *resp.retry_after;
            clock_.sleep_for(wait);
            ++attempt;
            continue;
        }
        throw HttpError(fmt::format("features endpoint returned status {}", resp.status), resp.status);
    }
}

EnrichResult EnrichmentClient::enrich_all(std::span<const std::string> uris) {
    std::vector<std::string> dedup;
    dedup.reserve(uris.size());
    std::unordered_set<std::string> seen;
    for (const std::string& uri : uris) {
        if (seen.insert(uri).second) dedup.push_back(uri);
    }
    EnrichResult all;
    auto batches = chunk_uris(dedup, config_.batch_size);
    for (std::size_t b = 0; b < batches.size(); ++b) {
        try {
            EnrichResult one = fetch_batch(batches[b]);
            all.features.insert(all.features.end(), std::make_move_iterator(one.features.begin()),
                                std::make_move_iterator(one.features.end()));
            all.misses.insert(all.misses.end(), std::make_move_iterator(one.misses.begin()),
                              std::make_move_iterator(one.misses.end()));
        } catch (const RetriesExhausted& e) {
            throw RetriesExhausted(fmt::format("batch {}: {}", b, e.what()), e.last_status(),
                                   e.attempts());
        } catch (const HttpError& e) {
            throw HttpError(fmt::format("batch {}: {}", b, e.what()), e.status());
        } catch (const MalformedBody& e) {
            throw MalformedBody(fmt::format("batch {}: {}", b, e.what()));
        }
    }
    return all;
}

namespace {

double require_number(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_number()) {
        throw MalformedBody(fmt::format("feature object missing numeric field '{}'", field));
    }
    return it->get<double>();
}

}  // namespace

EnrichResult parse_features_body(const std::string& body, std::span<const std::string> requested_ids) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("audio_features") ||
        !doc["audio_features"].is_array()) {
        throw MalformedBody("response body is not an audio_features document");
    }
    std::unordered_map<std::string, AudioFeatures> by_id;
    for (const json& entry : doc["audio_features"]) {
        if (entry.is_null()) continue;
        if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
            throw MalformedBody("feature entry missing string field 'id'");
        }
        AudioFeatures f;
        f.track_uri = entry["id"].get<std::string>();
        f.danceability = require_number(entry, "danceability");
        f.energy = require_number(entry, "energy");
        f.valence = require_number(entry, "valence");
        f.tempo = require_number(entry, "tempo");
        f.acousticness = require_number(entry, "acousticness");
        f.loudness = require_number(entry, "loudness");
        f.instrumentalness = require_number(entry, "instrumentalness");
        f.speechiness = require_number(entry, "speechiness");
        f.liveness = require_number(entry, "liveness");
        f.key = static_cast<int>(require_number(entry, "key"));
        f.mode = static_cast<int>(require_number(entry, "mode"));
        f.duration_ms = static_cast<long long>(require_number(entry, "duration_ms"));
        f.time_signature = static_cast<int>(require_number(entry, "time_signature"));
        by_id.emplace(f.track_uri, std::move(f));
    }
    EnrichResult result;
    for (const std::string& id : requested_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            result.misses.push_back(id);
        } else {
            result.features.push_back(it->second);
        }
    }
    return result;
}

std::string features_to_csv(std::span<const AudioFeatures> features) {
    std::string out = "uri";
    for (auto col : kAudioColumns) {
        out += ',';
        out += col;
    }
    out += '\n';
    for (const AudioFeatures& f : features) {
        out += csv::escape(f.track_uri);
        for (std::size_t c = 0; c < kAudioColumns.size(); ++c) {
            out += ',';
            double v = audio_column_value(f, c);
            if (c >= 9 && c <= 12) {
                out += fmt::format("{}", static_cast<long long>(v));
            } else {
                out += fmt::format("{}", v);
            }
        }
        out += '\n';
    }
    return out;
}

std::vector<AudioFeatures> features_from_csv(std::string_view content, const std::string& source) {
    auto rows = csv::parse(content, source);
    if (rows.empty()) throw ParseError("empty features file", source);
    const auto& header = rows.front();
    if (header.size() != kAudioColumns.size() + 1 || header[0] != "uri") {
        throw ParseError("features file header does not match the expected schema", source, 1);
    }
    for (std::size_t c = 0; c < kAudioColumns.size(); ++c) {
        if (header[c + 1] != kAudioColumns[c]) {
            throw ParseError(fmt::format("features column {} is '{}', expected '{}'", c + 1,
                                         header[c + 1], kAudioColumns[c]),
                             source, 1);
        }
    }
    std::vector<AudioFeatures> features;
    features.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != kAudioColumns.size() + 1) {
            throw ParseError(fmt::format("row {}: expected {} fields, got {}", r + 1,
                                         kAudioColumns.size() + 1, row.size()),
                             source, r + 1);
        }
        auto num = [&](std::size_t c) -> double {
            const std::string& s = row[c + 1];
            double v{};
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                throw ParseError(fmt::format("row {}: bad number '{}' in column {}", r + 1, s,
                                             kAudioColumns[c]),
                                 source, r + 1);
            }
            return v;
        };
        AudioFeatures f;
        f.track_uri = row[0];
        f.danceability = num(0);
        f.energy = num(1);
        f.valence = num(2);
        f.tempo = num(3);
        f.acousticness = num(4);
        f.loudness = num(5);
        f.instrumentalness = num(6);
        f.speechiness = num(7);
        f.liveness = num(8);
        f.key = static_cast<int>(num(9));
        f.mode = static_cast<int>(num(10));
        f.duration_ms = static_cast<long long>(num(11));
        f.time_signature = static_cast<int>(num(12));
        features.push_back(std::move(f));
    }
    return features;
}

void write_features_csv(const std::filesystem::path& path, std::span<const AudioFeatures> features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << features_to_csv(features);
}

std::vector<AudioFeatures> read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return features_from_csv(buf.str(), path.string());
}

}  // namespace chartml::client
