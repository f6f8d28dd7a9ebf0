#pragma once

#include "tmm/digest.hpp"
#include "tmm/sa.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

namespace tmm {

struct PromptBundle {
    std::string persona_preamble;
    std::string game_rules_text;
    std::string scene_text;
    std::string question_text;
    std::string instruction;   // precedes the choices
    std::string choices_text;  // one "- label" line per choice
    std::string suffix;        // closes the prompt

    /// The full prompt sent to the model.
    std::string text() const;
};

PromptBundle build_prompt(const BeliefState& belief, const SAQuestion& question);

/// Follow-up sent once when the first response matched no single choice.
std::string reprompt_text(const PromptBundle& bundle);

/// Extracts the scene document back out of a prompt built by build_prompt.
/// Throws ProtocolError if the prompt carries none.
nlohmann::json scene_document_from_prompt(const std::string& prompt);

struct DecodingParams {
    double temperature = 0.0;
    int max_tokens = 32;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Throws TransportError once retries are exhausted.
    virtual std::string send(const std::string& prompt, const DecodingParams& params) = 0;
};

/// Fixed prompt-hash -> response table, with an optional fallback.
class StubLlmClient final : public LlmClient {
public:
    using Fallback = std::function<std::string(const std::string& prompt)>;

    explicit StubLlmClient(std::map<std::string, std::string> by_hash = {}, Fallback fallback = {});
    std::string send(const std::string& prompt, const DecodingParams& params) override;
    void set(const std::string& prompt, std::string response);
    int calls() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> by_hash_;
    Fallback fallback_;
    int calls_ = 0;
};

/// Stub that reads the scene back out of the prompt and answers with the
/// hand-crafted rule for the matching bank question.
class RuleStubClient final : public LlmClient {
public:
    explicit RuleStubClient(QuestionBank bank) : bank_(std::move(bank)) {}
    std::string send(const std::string& prompt, const DecodingParams& params) override;

private:
    QuestionBank bank_;
};

struct HttpClientConfig {
    std::string endpoint = "http://127.0.0.1:8080/v1/chat/completions";
    std::string model = "default";
    std::string api_key_env = "TMM_LLM_API_KEY";
    std::chrono::milliseconds timeout{30000};
    int retries = 2;
};

/// OpenAI-style chat-completions client.
class HttpLlmClient final : public LlmClient {
public:
    explicit HttpLlmClient(HttpClientConfig config);
    std::string send(const std::string& prompt, const DecodingParams& params) override;

private:
    HttpClientConfig config_;
    std::string scheme_host_;
    std::string path_;
};

/// Response cache in a directory of (prompt hash -> response) files plus a
/// cap on concurrent calls to the wrapped client.
class CachingClient final : public LlmClient {
public:
    CachingClient(std::shared_ptr<LlmClient> inner, std::filesystem::path dir, int max_in_flight = 4);
    std::string send(const std::string& prompt, const DecodingParams& params) override;

    int hits() const { return hits_; }
    int misses() const { return misses_; }

private:
    std::shared_ptr<LlmClient> inner_;
    std::filesystem::path dir_;
    std::counting_semaphore<64> slots_;
    std::atomic<int> hits_{0};
    std::atomic<int> misses_{0};
};

/// Maps a free-text response to exactly one choice label, or nothing.
std::optional<std::string> match_choice(const std::string& response, const std::vector<std::string>& choices);

/// Asks the model; one reprompt on an unmatched response, then an abstention.
/// TransportError propagates.
SAAnswer answer_llm(const BeliefState& belief, const SAQuestion& question, LlmClient& client,
                    const DecodingParams& params = {});

}  // namespace tmm
