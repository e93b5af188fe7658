#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chartml::client {

using Duration = std::chrono::milliseconds;

/// The 13 per-track audio attributes served by the feature endpoint.
struct AudioFeatures {
    std::string track_uri;
    double danceability = 0;
    double energy = 0;
    double valence = 0;
    double tempo = 0;
    double acousticness = 0;
    double loudness = 0;
    double instrumentalness = 0;
    double speechiness = 0;
    double liveness = 0;
    int key = -1;
    int mode = 0;
    long long duration_ms = 0;
    int time_signature = 4;
};

/// Audio column order used everywhere downstream (CSV schemas, datasets).
inline constexpr std::array<std::string_view, 13> kAudioColumns{
    "danceability",     "energy",      "valence",  "tempo",       "acousticness",
    "loudness",         "instrumentalness", "speechiness", "liveness", "key",
    "mode",             "duration_ms", "time_signature"};

double audio_column_value(const AudioFeatures& f, std::size_t column);

struct HttpRequest {
    std::string method;  // "GET" or "POST"
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

struct TransportResponse {
    int status = 0;
    std::string body;
    std::optional<Duration> retry_after;
};

/// Abstract wire. The real adapter is a thin leaf; tests script responses.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResponse send(const HttpRequest& request) = 0;
};

/// Abstract time so pacing and backoff are testable without waiting.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Duration now() = 0;
    virtual void sleep_for(Duration d) = 0;
};

class SystemClock final : public Clock {
public:
    Duration now() override;
    void sleep_for(Duration d) override;
};

/// Deterministic clock: time advances only through sleep_for. Records every
/// sleep so tests can assert backoff schedules.
class SimClock final : public Clock {
public:
    Duration now() override { return t_; }
    void sleep_for(Duration d) override {
        t_ += d;
        sleeps_.push_back(d);
    }
    const std::vector<Duration>& sleeps() const { return sleeps_; }

private:
    Duration t_{0};
    std::vector<Duration> sleeps_;
};

struct ClientConfig {
    int batch_size = 100;                  // ids per request, 1..100
    Duration min_request_interval{500};    // 2 requests per second
    int max_retries = 5;                   // retries after the initial attempt
    Duration backoff_base{1000};
    double backoff_factor = 2.0;
    std::string token_endpoint;
    std::string features_endpoint;
    std::string client_id;
    std::string client_secret;
};

/// Read CLIENT_ID / CLIENT_SECRET into the config (empty when unset).
void load_credentials_from_env(ClientConfig& config);

/// Order-preserving partition into batches of batch_size (last may be short).
/// Throws ValueError when batch_size < 1.
std::vector<std::vector<std::string>> chunk_uris(std::span<const std::string> uris, int batch_size);

/// "spotify:track:abc" -> "abc" (text after the last colon).
std::string bare_track_id(std::string_view uri);

/// RFC 3986 percent-encoding; unreserved characters pass through.
std::string percent_encode(std::string_view s);

/// GET descriptor for one batch: {endpoint}?ids=<comma-joined bare ids>,
/// percent-encoded. Deterministic for a given batch. Throws ValueError on an
/// empty batch.
HttpRequest build_batch_request(std::span<const std::string> batch, const std::string& endpoint);

struct EnrichResult {
    std::vector<AudioFeatures> features;
    std::vector<std::string> misses;  // ids the API returned as null or absent
};

/// Batched feature client: token caching, request pacing, exponential-backoff
/// retries. One request in flight at a time; the instance may be shared
/// across threads (calls serialize internally).
class EnrichmentClient {
public:
    EnrichmentClient(Transport& transport, Clock& clock, ClientConfig config);

    /// Cached bearer token, refreshed via one client-credentials POST when
    /// missing or expired. Throws AuthError / MalformedBody.
    std::string ensure_token();

    /// Fetch one batch. Paces every attempt, retries 429 with
    /// sleep = max(Retry-After, base * factor^(attempt-1)) up to max_retries,
    /// refreshes the token once on 401. Throws RetriesExhausted, HttpError,
    /// MalformedBody.
    EnrichResult fetch_batch(std::span<const std::string> batch);

    /// Dedup (order-preserving), chunk, and fetch everything sequentially.
    /// Errors from fetch_batch are rethrown with the batch index attached.
    EnrichResult enrich_all(std::span<const std::string> uris);

    const ClientConfig& config() const { return config_; }

private:
    std::string ensure_token_locked();
    void pace_locked();
    EnrichResult fetch_batch_locked(std::span<const std::string> batch);

    Transport& transport_;
    Clock& clock_;
    ClientConfig config_;
    std::mutex mutex_;
    std::optional<std::string> token_;
    Duration token_expiry_{0};
    std::optional<Duration> last_request_start_;
};

/// Parse a feature-endpoint body ({"audio_features":[obj|null, ...]}) against
/// the ids that were requested. Unknown ids in the response are ignored;
/// requested ids that come back null or missing land in `misses`.
EnrichResult parse_features_body(const std::string& body, std::span<const std::string> requested_ids);

// features.csv: uri followed by the 13 audio columns, one row per fetched id.
std::string features_to_csv(std::span<const AudioFeatures> features);
std::vector<AudioFeatures> features_from_csv(std::string_view content, const std::string& source = {});
void write_features_csv(const std::filesystem::path& path, std::span<const AudioFeatures> features);
std::vector<AudioFeatures> read_features_csv(const std::filesystem::path& path);

}  // namespace chartml::client
