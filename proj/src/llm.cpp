#include "llm4vis/llm.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace llm4vis::llm {

namespace fs = std::filesystem;

std::string_view to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

namespace {

Role parse_role(std::string_view s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw IngestError("unknown message role '" + std::string(s) + "'");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IngestError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void ChatRequest::validate() const {
    if (messages.empty()) throw ConfigError("chat request has no messages");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

ChatRequest ChatRequest::from_prompt(std::string prompt, const ModelSettings& settings) {
    ChatRequest r;
    r.model_id = settings.model_id;
    r.temperature = settings.temperature;
    r.max_tokens = settings.max_tokens;
    r.messages.push_back({Role::User, std::move(prompt)});
    r.validate();
    return r;
}

std::string_view to_string(FinishReason r) {
    switch (r) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::Other: return "other";
    }
    return "other";
}

FinishReason parse_finish_reason(std::string_view s) {
    if (s == "stop") return FinishReason::Stop;
    if (s == "length") return FinishReason::Length;
    return FinishReason::Other;
}

nlohmann::json request_to_json(const ChatRequest& req) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : req.messages) msgs.push_back({{"content", m.content}, {"role", to_string(m.role)}});
    return {{"max_tokens", req.max_tokens},
            {"messages", std::move(msgs)},
            {"model_id", req.model_id},
            {"temperature", req.temperature}};
}

ChatRequest request_from_json(const nlohmann::json& j) {
    ChatRequest r;
    r.model_id = j.at("model_id").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.max_tokens = j.at("max_tokens").get<int>();
    for (const auto& m : j.at("messages"))
        r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    return r;
}

nlohmann::json response_to_json(const ChatResponse& resp) {
    return {{"finish_reason", to_string(resp.finish_reason)},
            {"provider_meta", resp.provider_meta},
            {"text", resp.text}};
}

ChatResponse response_from_json(const nlohmann::json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
    r.provider_meta = j.value("provider_meta", std::string{});
    return r;
}

std::string canonical_json(const ChatRequest& req) { return request_to_json(req).dump(); }

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

CacheKey cache_key(const ChatRequest& req) { return {sha256_hex(canonical_json(req))}; }

// ---------------------------------------------------------------- mock

MockProvider::MockProvider(std::vector<Entry> entries) {
    for (auto& e : entries) {
        if (e.digest)
            by_digest_.emplace(*e.digest, std::move(e.response));
        else
            sequence_.push_back(std::move(e.response));
    }
}

std::vector<MockProvider::Entry> MockProvider::parse_transcript(std::string_view content) {
    std::vector<Entry> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        std::string_view line = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const std::string where = "transcript line " + std::to_string(line_no) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IngestError(where + "invalid JSON (" + e.what() + ")");
        }
        if (!j.is_object() || !j.contains("match") || !j.contains("response") || !j["response"].is_string())
            throw IngestError(where + "expected {\"match\", \"response\"}");
        const std::string match = j["match"].is_string() ? j["match"].get<std::string>() : "";
        Entry e;
        e.response = j["response"].get<std::string>();
        if (match == "digest") {
            if (!j.contains("digest") || !j["digest"].is_string())
                throw IngestError(where + "digest entry without a digest");
            e.digest = j["digest"].get<std::string>();
        } else if (match != "sequence") {
            throw IngestError(where + "match must be \"digest\" or \"sequence\"");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<MockProvider::Entry> MockProvider::load_transcript(const fs::path& path) {
    return parse_transcript(read_file(path));
}

std::string write_transcript(const std::vector<MockProvider::Entry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["match"] = e.digest ? "digest" : "sequence";
        if (e.digest) j["digest"] = *e.digest;
        j["response"] = e.response;
        out += j.dump();
        out += '\n';
    }
    return out;
}

ChatResponse MockProvider::complete(const ChatRequest& req) {
    const CacheKey key = cache_key(req);
    std::string text;
    {
        std::lock_guard lock(mu_);
        if (auto it = by_digest_.find(key.digest); it != by_digest_.end()) {
            text = it->second;
        } else if (!sequence_.empty()) {
            text = std::move(sequence_.front());
            sequence_.pop_front();
        } else {
            throw GatewayError("mock transcript has no response for request " + key.digest, 1);
        }
    }
    ChatResponse r;
    r.finish_reason = text.empty() ? FinishReason::Other : FinishReason::Stop;
    r.text = std::move(text);
    r.provider_meta = "mock";
    return r;
}

std::size_t MockProvider::remaining_sequence() const {
    std::lock_guard lock(mu_);
    return sequence_.size();
}

// ---------------------------------------------------------------- cache

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

fs::path ResponseCache::path_for(const CacheKey& key) const { return dir_ / (key.digest + ".json"); }

std::optional<ChatResponse> ResponseCache::lookup(const CacheKey& key) const {
    const fs::path p = path_for(key);
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    try {
        return response_from_json(nlohmann::json::parse(read_file(p)).at("response"));
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("corrupt cache entry " + p.string() + ": " + e.what());
    }
}

ChatResponse ResponseCache::store(const CacheKey& key, const ChatRequest& req, const ChatResponse& resp) const {
    static std::atomic<std::uint64_t> counter{0};
    const fs::path final_path = path_for(key);
    const fs::path tmp = dir_ / (".tmp-" + key.digest + "-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(counter.fetch_add(1)));
    nlohmann::json doc{{"created_at", utc_now_iso()}, {"request", request_to_json(req)},
                       {"response", response_to_json(resp)}};
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write cache entry " + tmp.string());
        out << doc.dump() << '\n';
        if (!out.flush()) throw ConfigError("cannot write cache entry " + tmp.string());
    }
    // A hard link never replaces an existing file, so the first writer wins.
    std::error_code ec;
    fs::create_hard_link(tmp, final_path, ec);
    fs::remove(tmp);
    if (!ec) return resp;
    if (auto existing = lookup(key)) return *existing;
    throw ConfigError("cannot store cache entry " + final_path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(std::shared_ptr<Provider> provider, std::optional<ResponseCache> cache, RetryPolicy retry)
    : provider_(std::move(provider)), cache_(std::move(cache)), retry_(std::move(retry)) {
    if (!provider_) throw ConfigError("gateway needs a provider");
    if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse Gateway::complete(const ChatRequest& req) {
    req.validate();
    const CacheKey key = cache_key(req);
    if (cache_) {
        if (auto hit = cache_->lookup(key)) {
            ++cache_hits_;
            return *hit;
        }
    }
    auto backoff = retry_.initial_backoff;
    std::size_t attempts = 0;
    for (;;) {
        ++attempts;
        ++provider_calls_;
        try {
            ChatResponse resp = provider_->complete(req);
            if (cache_) return cache_->store(key, req, resp);
            return resp;
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempts > retry_.max_retries)
                throw GatewayError(std::string(provider_->name()) + " request " + key.digest + " failed after " +
                                       std::to_string(attempts) + " attempt(s): " + e.what(),
                                   attempts);
            retry_.sleep(backoff);
            backoff *= 2;
        }
    }
}

std::string utc_now_iso() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace llm4vis::llm
