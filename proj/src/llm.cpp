#include "tmm/llm.hpp"

#include "tmm/errors.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace tmm {

namespace {

constexpr const char* kSceneMarker = "Scene:\n";
constexpr const char* kQuestionMarker = "Question: ";

const char* kPersona =
    "You are A1, the human player in a two-player cooking game. Your teammate is the robot. "
    "The scene below is what you currently believe about the kitchen. Some of it may be out of date, "
    "and you should answer from this belief, not from what might really be true.";

const char* kRules =
    "Game rules: the kitchen is a grid of floor, counter, pot and serving-station tiles. "
    "Each player holds at most one item and interacts with the tile they face. "
    "Every soup takes three ingredient units, onion or tomato in any mix, put into the same pot; "
    "a full pot cooks for 100 ticks (10 ticks per second). "
    "A cooked soup is scooped onto an empty plate and carried to a serving station. "
    "Play stops at tick 900 or once no further soup can be finished. "
    "Coordinates are x (east) and y (south) starting at 0 in the north-west corner. "
    "Board regions split the grid into a 3 by 3 partition named North-West, North, North-East, West, "
    "Center, East, South-West, South and South-East.";

const char* kInstruction = "Please answer the question using only one of responses below:";
const char* kSuffix = "What is your answer?";

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '+'; }

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (word_char(c)) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

std::string PromptBundle::text() const {
    std::ostringstream out;
    out << persona_preamble << "\n\n"
        << game_rules_text << "\n\n"
        << kSceneMarker << scene_text << "\n\n"
        << kQuestionMarker << question_text << "\n"
        << instruction << "\n"
        << choices_text << suffix;
    return out.str();
}

PromptBundle build_prompt(const BeliefState& belief, const SAQuestion& question) {
    PromptBundle b;
    b.persona_preamble = kPersona;
    b.game_rules_text = kRules;
    b.scene_text = scene_text(belief);
    b.question_text = question.text;
    b.instruction = kInstruction;
    for (const auto& c : question.choices) b.choices_text += "- " + c + "\n";
    b.suffix = kSuffix;
    return b;
}

std::string reprompt_text(const PromptBundle& bundle) {
    return bundle.text() +
           "\n\nYour previous reply did not name exactly one of the responses. "
           "Reply with a single response copied from the list.";
}

nlohmann::json scene_document_from_prompt(const std::string& prompt) {
    const auto at = prompt.find(kSceneMarker);
    if (at == std::string::npos) throw ProtocolError("prompt carries no scene");
    const auto begin = at + std::char_traits<char>::length(kSceneMarker);
    const auto end = prompt.find('\n', begin);
    try {
        return nlohmann::json::parse(prompt.substr(begin, end == std::string::npos ? std::string::npos : end - begin));
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("prompt scene is not valid json: ") + e.what());
    }
}

StubLlmClient::StubLlmClient(std::map<std::string, std::string> by_hash, Fallback fallback)
    : by_hash_(std::move(by_hash)), fallback_(std::move(fallback)) {}

std::string StubLlmClient::send(const std::string& prompt, const DecodingParams&) {
    std::lock_guard lock(mu_);
    ++calls_;
    if (auto it = by_hash_.find(sha256_hex(prompt)); it != by_hash_.end()) return it->second;
    if (fallback_) return fallback_(prompt);
    return "";
}

void StubLlmClient::set(const std::string& prompt, std::string response) {
    std::lock_guard lock(mu_);
    by_hash_[sha256_hex(prompt)] = std::move(response);
}

int StubLlmClient::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::string RuleStubClient::send(const std::string& prompt, const DecodingParams&) {
    const BeliefState belief = belief_from_scene_document(scene_document_from_prompt(prompt));
    const auto q = prompt.find(kQuestionMarker);
    if (q == std::string::npos) throw ProtocolError("prompt carries no question");
    const auto begin = q + std::char_traits<char>::length(kQuestionMarker);
    const std::string text = prompt.substr(begin, prompt.find('\n', begin) - begin);
    for (const auto& question : bank_)
        if (question.text == text) return answer_lp(belief, question).label;
    throw ProtocolError("prompt question is not in the bank: " + text);
}

HttpLlmClient::HttpLlmClient(HttpClientConfig config) : config_(std::move(config)) {
    const auto scheme = config_.endpoint.find("://");
    if (scheme == std::string::npos) throw ConfigError("llm endpoint needs a scheme: " + config_.endpoint);
    const auto path = config_.endpoint.find('/', scheme + 3);
    scheme_host_ = config_.endpoint.substr(0, path);
    path_ = path == std::string::npos ? "/" : config_.endpoint.substr(path);
    if (config_.retries < 0) throw ConfigError("llm retries must be >= 0");
}

std::string HttpLlmClient::send(const std::string& prompt, const DecodingParams& params) {
    httplib::Client client(scheme_host_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    const nlohmann::json body{{"model", config_.model},
                              {"messages", {{{"role", "user"}, {"content", prompt}}}},
                              {"temperature", params.temperature},
                              {"max_tokens", params.max_tokens}};

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw TransportError("llm: " + last_error + " after " + std::to_string(config_.retries + 1) + " attempts");
}

CachingClient::CachingClient(std::shared_ptr<LlmClient> inner, std::filesystem::path dir, int max_in_flight)
    : inner_(std::move(inner)), dir_(std::move(dir)), slots_(std::clamp(max_in_flight, 1, 64)) {
    if (!inner_) throw ConfigError("caching client needs an inner client");
    std::filesystem::create_directories(dir_);
}

std::string CachingClient::send(const std::string& prompt, const DecodingParams& params) {
    const std::string key = sha256_hex(prompt);
    const auto path = dir_ / (key + ".txt");
    if (std::ifstream in(path, std::ios::binary); in) {
        ++hits_;
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    ++misses_;
    std::string response;
    slots_.acquire();
    try {
        response = inner_->send(prompt, params);
    } catch (...) {
        slots_.release();
        throw;
    }
    slots_.release();

    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << std::this_thread::get_id();
    const auto tmp = dir_ / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << response;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);  // last write wins
    if (ec) std::filesystem::remove(tmp, ec);
    return response;
}

std::optional<std::string> match_choice(const std::string& response, const std::vector<std::string>& choices) {
    const std::string t = trim(response);
    for (const auto& c : choices)
        if (t == c) return c;

    const auto words = tokens(response);
    std::optional<std::string> found;
    int hits = 0;
    for (const auto& c : choices) {
        const auto label = tokens(c);
        if (label.empty() || label.size() > words.size()) continue;
        for (std::size_t i = 0; i + label.size() <= words.size(); ++i) {
            if (std::equal(label.begin(), label.end(), words.begin() + static_cast<long>(i))) {
                found = c;
                ++hits;
                break;
            }
        }
    }
    if (hits == 1) return found;
    return std::nullopt;
}

SAAnswer answer_llm(const BeliefState& belief, const SAQuestion& question, LlmClient& client,
                    const DecodingParams& params) {
    const PromptBundle bundle = build_prompt(belief, question);
    SAAnswer answer{question.id, "", AnswerSource::BetaPredLLM, belief.tick};
    auto label = match_choice(client.send(bundle.text(), params), question.choices);
    if (!label) label = match_choice(client.send(reprompt_text(bundle), params), question.choices);
    if (label) answer.label = *label;
    return answer;
}

}  // namespace tmm
