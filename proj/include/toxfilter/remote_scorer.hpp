#pragma once

#include <cstdlib>
#include <memory>
#include <semaphore>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "scorer.hpp"

namespace toxfilter {

/// Failure talking to a remote scoring service.  `kind` distinguishes the
/// four ways a request can go wrong so callers can decide what is retryable
/// and reports can say what actually happened.
class remote_error : public std::runtime_error {
public:
    enum class Kind { timeout, transport, status, payload };

    remote_error(Kind kind, const std::string& what, int status_code = 0)
        : std::runtime_error(what), kind_(kind), status_(status_code) {}

    Kind kind() const noexcept { return kind_; }
    int status() const noexcept { return status_; }

    /// Pipeline stage the error surfaced in; empty outside a pipeline run.
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    Kind kind_;
    int status_;
    std::string stage_;
};

inline std::string_view to_string(remote_error::Kind k) noexcept {
    switch (k) {
    case remote_error::Kind::timeout: return "timeout";
    case remote_error::Kind::transport: return "transport";
    case remote_error::Kind::status: return "status";
    default: return "payload";
    }
}

struct RemoteScorerConfig {
    std::string endpoint;
    std::string api_key_env = "TOXFILTER_API_KEY";
    std::string api_key_header = "X-Api-Key";
    int timeout_ms = 5000;
    int retries = 1;
    int max_in_flight = 8;
};

/// Scores texts against an HTTP service: POST {"text": ...} to the endpoint,
/// expect {"score": <number in [0,1]>} back.  Transport failures are retried
/// `retries` times; timeouts, HTTP error statuses and malformed payloads are
/// reported as distinct remote_error kinds.  At most `max_in_flight` requests
/// run concurrently across all threads sharing the instance.
class RemoteScorer : public Scorer {
public:
    explicit RemoteScorer(RemoteScorerConfig config) : config_(std::move(config)) {
        if (config_.endpoint.empty()) throw config_error("remote scorer endpoint is empty");
        if (config_.max_in_flight < 1) throw config_error("max_in_flight must be at least 1");
        if (config_.timeout_ms < 1) throw config_error("timeout_ms must be at least 1");
        split_endpoint();
        slots_ = std::make_unique<std::counting_semaphore<>>(config_.max_in_flight);
    }

    double score(const std::string& text) const override {
        slots_->acquire();
        struct Release {
            std::counting_semaphore<>* s;
            ~Release() { s->release(); }
        } release{slots_.get()};
        return score_once_with_retry(text);
    }

    std::string name() const override { return "remote"; }

    const RemoteScorerConfig& config() const noexcept { return config_; }

private:
    void split_endpoint() {
        const std::string& url = config_.endpoint;
        std::size_t scheme = url.find("://");
        if (scheme == std::string::npos)
            throw config_error("endpoint must start with http:// or https://: " + url);
        std::size_t path = url.find('/', scheme + 3);
        if (path == std::string::npos) {
            base_ = url;
            path_ = "/";
        } else {
            base_ = url.substr(0, path);
            path_ = url.substr(path);
        }
    }

    double score_once_with_retry(const std::string& text) const {
        for (int attempt = 0;; ++attempt) {
            try {
                return score_once(text);
            } catch (const remote_error& e) {
                if (e.kind() != remote_error::Kind::transport || attempt >= config_.retries) throw;
            }
        }
    }

    double score_once(const std::string& text) const {
        httplib::Client client(base_);
        const time_t sec = config_.timeout_ms / 1000;
        const time_t usec = (config_.timeout_ms % 1000) * 1000;
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);

        httplib::Headers headers;
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
            headers.emplace(config_.api_key_header, key);

        nlohmann::json body = {{"text", text}};
        auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) {
            auto err = res.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write) {
                throw remote_error(remote_error::Kind::timeout,
                                   "request to " + config_.endpoint + " timed out: " +
                                       httplib::to_string(err));
            }
            throw remote_error(remote_error::Kind::transport,
                               "request to " + config_.endpoint + " failed: " +
                                   httplib::to_string(err));
        }
        if (res->status < 200 || res->status >= 300) {
            throw remote_error(remote_error::Kind::status,
                               "scoring service returned HTTP " + std::to_string(res->status),
                               res->status);
        }
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("score") ||
            !j["score"].is_number()) {
            throw remote_error(remote_error::Kind::payload,
                               "scoring service response has no numeric 'score' field");
        }
        double s = j["score"].get<double>();
        if (!(s >= 0.0 && s <= 1.0)) {
            throw remote_error(remote_error::Kind::payload,
                               "scoring service returned score outside [0, 1]");
        }
        return s;
    }

    RemoteScorerConfig config_;
    std::string base_;
    std::string path_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

} // namespace toxfilter
