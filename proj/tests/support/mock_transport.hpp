#pragma once

#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartml/client.hpp"

namespace chartml::testsupport {

/// Scripted transport: answers from a queue and records every request with
/// the sim-clock time it arrived at.
class ScriptedTransport final : public client::Transport {
public:
    explicit ScriptedTransport(client::Clock& clock) : clock_(&clock) {}

    void push(client::TransportResponse response) { script_.push_back(std::move(response)); }
    void push_status(int status) { script_.push_back({status, "{}", std::nullopt}); }

    struct Sent {
        client::HttpRequest request;
        client::Duration at;
    };
    const std::vector<Sent>& sent() const { return sent_; }

    std::vector<client::Duration> feature_request_starts() const {
        std::vector<client::Duration> starts;
        for (const Sent& s : sent_) {
            if (s.request.method == "GET") starts.push_back(s.at);
        }
        return starts;
    }

    client::TransportResponse send(const client::HttpRequest& request) override {
        sent_.push_back({request, clock_->now()});
        if (request.method == "POST") {
            // token endpoint unless the script overrides it
            if (token_responses_.empty()) {
                return {200, R"({"access_token":"scripted-token","expires_in":3600})", std::nullopt};
            }
            auto r = token_responses_.front();
            token_responses_.pop_front();
            return r;
        }
        if (script_.empty()) return {500, "script exhausted", std::nullopt};
        auto r = script_.front();
        script_.pop_front();
        return r;
    }

    void push_token_response(client::TransportResponse response) {
        token_responses_.push_back(std::move(response));
    }

private:
    client::Clock* clock_;
    std::deque<client::TransportResponse> script_;
    std::deque<client::TransportResponse> token_responses_;
    std::vector<Sent> sent_;
};

/// JSON body for a successful audio-features response over the given bare
/// ids; an empty id produces a null entry.
inline std::string features_body(const std::vector<std::string>& ids) {
    nlohmann::json entries = nlohmann::json::array();
    for (const std::string& id : ids) {
        if (id.empty()) {
            entries.push_back(nullptr);
            continue;
        }
        entries.push_back({{"id", id},
                           {"danceability", 0.5},
                           {"energy", 0.6},
                           {"valence", 0.4},
                           {"tempo", 120.0},
                           {"acousticness", 0.2},
                           {"loudness", -7.5},
                           {"instrumentalness", 0.01},
                           {"speechiness", 0.05},
                           {"liveness", 0.12},
                           {"key", 5},
                           {"mode", 1},
                           {"duration_ms", 201000},
                           {"time_signature", 4}});
    }
    nlohmann::json body;
    body["audio_features"] = std::move(entries);
    return body.dump();
}

}  // namespace chartml::testsupport
