#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "llm4vis/llm.hpp"

namespace llm4vis::llm {

OpenAIProvider::OpenAIProvider(std::string api_base, std::string api_key, std::chrono::seconds timeout)
    : api_base_(std::move(api_base)), api_key_(std::move(api_key)), timeout_(timeout) {
    while (!api_base_.empty() && api_base_.back() == '/') api_base_.pop_back();
    if (api_base_.empty()) throw ConfigError("empty api base URL");
    if (api_key_.empty()) throw ConfigError("missing credential: set " + std::string(kApiKeyEnv));
}

ChatResponse OpenAIProvider::complete(const ChatRequest& req) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    const nlohmann::json body{{"model", req.model_id},
                              {"messages", std::move(msgs)},
                              {"temperature", req.temperature},
                              {"max_tokens", req.max_tokens}};

    httplib::Client client(api_base_);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    client.set_bearer_token_auth(api_key_);

    auto res = client.Post("/v1/chat/completions", body.dump(), "application/json");
    if (!res) throw ProviderError("transport error: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
        throw ProviderError("HTTP " + std::to_string(res->status), true);
    if (res->status != 200)
        throw ProviderError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500), false);

    try {
        const auto j = nlohmann::json::parse(res->body);
        const auto& choice = j.at("choices").at(0);
        ChatResponse out;
        const auto& content = choice.at("message").at("content");
        out.text = content.is_string() ? content.get<std::string>() : std::string{};
        out.finish_reason = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                                ? parse_finish_reason(choice["finish_reason"].get<std::string>())
                                : FinishReason::Other;
        if (out.text.empty()) out.finish_reason = FinishReason::Other;
        out.provider_meta = j.value("id", std::string{}) + " " + j.value("model", std::string{});
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what(), false);
    }
}

}  // namespace llm4vis::llm
