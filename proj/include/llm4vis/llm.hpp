#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "llm4vis/error.hpp"

namespace llm4vis::llm {

inline constexpr std::string_view kDefaultModel = "gpt-3.5-turbo-16k";
inline constexpr double kDefaultTemperature = 0.0;
inline constexpr int kDefaultMaxTokens = 1024;
inline constexpr std::string_view kDefaultApiBase = "https://api.openai.com";
inline constexpr std::string_view kApiKeyEnv = "LLM4VIS_API_KEY";

enum class Role { System, User, Assistant };
std::string_view to_string(Role r);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ModelSettings {
    std::string model_id{kDefaultModel};
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;
};

struct ChatRequest {
    std::string model_id{kDefaultModel};
    std::vector<ChatMessage> messages;
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;

    /// Throws ConfigError without messages, with negative temperature or
    /// with non-positive max_tokens.
    void validate() const;

    /// The whole prompt as a single user message.
    static ChatRequest from_prompt(std::string prompt, const ModelSettings& settings);

    friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

enum class FinishReason { Stop, Length, Other };
std::string_view to_string(FinishReason r);
FinishReason parse_finish_reason(std::string_view s);

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::Stop;
    std::string provider_meta;

    friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

/// Compact JSON with sorted keys and messages in order.
std::string canonical_json(const ChatRequest& req);
nlohmann::json request_to_json(const ChatRequest& req);
ChatRequest request_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const ChatResponse& resp);
ChatResponse response_from_json(const nlohmann::json& j);

struct CacheKey {
    std::string digest;  // 64 lowercase hex chars

    friend bool operator==(const CacheKey&, const CacheKey&) = default;
    friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

/// SHA-256 of canonical_json(req).
CacheKey cache_key(const ChatRequest& req);
std::string sha256_hex(std::string_view data);

/// Failure raised by a provider. Retryable failures (transport errors, rate
/// limits, server errors) are retried by the gateway.
class ProviderError : public GatewayError {
public:
    ProviderError(const std::string& what, bool retryable) : GatewayError(what), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
    virtual std::string_view name() const = 0;
};

/// Scripted responses. Digest entries answer every request with that digest;
/// sequence entries are consumed first-in first-out by requests that match
/// no digest.
class MockProvider : public Provider {
public:
    struct Entry {
        std::optional<std::string> digest;  // nullopt = sequence entry
        std::string response;
    };

    explicit MockProvider(std::vector<Entry> entries);
    /// One JSON object per line: {"match": "digest"|"sequence", "digest"?, "response"}.
    static std::vector<Entry> parse_transcript(std::string_view content);
    static std::vector<Entry> load_transcript(const std::filesystem::path& path);

    ChatResponse complete(const ChatRequest& req) override;
    std::string_view name() const override { return "mock"; }

    std::size_t remaining_sequence() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> by_digest_;
    std::deque<std::string> sequence_;
};

std::string write_transcript(const std::vector<MockProvider::Entry>& entries);

/// Talks to an OpenAI-compatible chat completions endpoint.
class OpenAIProvider : public Provider {
public:
    OpenAIProvider(std::string api_base, std::string api_key,
                   std::chrono::seconds timeout = std::chrono::seconds(120));
    ChatResponse complete(const ChatRequest& req) override;
    std::string_view name() const override { return "openai"; }

private:
    std::string api_base_;
    std::string api_key_;
    std::chrono::seconds timeout_;
};

/// Content-addressed, write-once store: <dir>/<digest>.json.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path_for(const CacheKey& key) const;
    std::optional<ChatResponse> lookup(const CacheKey& key) const;
    /// Stores unless an entry exists; returns the response that ends up stored.
    ChatResponse store(const CacheKey& key, const ChatRequest& req, const ChatResponse& resp) const;

private:
    std::filesystem::path dir_;
};

struct RetryPolicy {
    std::size_t max_retries = 2;
    std::chrono::milliseconds initial_backoff{1000};
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleeping the thread
};

/// Routes requests through an optional cache to one provider, retrying
/// retryable provider failures with exponential backoff. Safe for
/// concurrent use when the provider is.
class Gateway {
public:
    Gateway(std::shared_ptr<Provider> provider, std::optional<ResponseCache> cache = std::nullopt,
            RetryPolicy retry = {});

    ChatResponse complete(const ChatRequest& req);

    std::size_t provider_calls() const { return provider_calls_.load(); }
    std::size_t cache_hits() const { return cache_hits_.load(); }
    const Provider& provider() const { return *provider_; }
    bool has_cache() const { return cache_.has_value(); }

private:
    std::shared_ptr<Provider> provider_;
    std::optional<ResponseCache> cache_;
    RetryPolicy retry_;
    std::atomic<std::size_t> provider_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now_iso();

}  // namespace llm4vis::llm
