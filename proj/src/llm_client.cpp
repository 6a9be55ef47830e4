#include "drrag/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <semaphore>

#include <httplib.h>
#include <json.hpp>

#include "drrag/errors.hpp"
#include "drrag/jsonl.hpp"
#include "drrag/util.hpp"

namespace drrag {

// ---------------------------------------------------------------------------
// MockLlm

MockLlm::MockLlm() = default;

std::shared_ptr<MockLlm> MockLlm::from_fixture_file(const std::string& path) {
    auto mock = std::make_shared<MockLlm>();
    for_each_jsonl_file(path, [&](std::size_t line, const nlohmann::json& record) {
        if (record.contains("fallback")) {
            mock->set_fallback(jsonl_string(record, "fallback", path, line));
            return;
        }
        mock->add_fixture_hash(jsonl_string(record, "prompt_sha256", path, line),
                               jsonl_string(record, "completion", path, line));
    });
    return mock;
}

void MockLlm::add_fixture(const std::string& prompt, const std::string& completion) {
    by_prompt_hash_[sha256_hex(prompt)] = completion;
}

void MockLlm::add_fixture_hash(const std::string& prompt_sha256, const std::string& completion) {
    by_prompt_hash_[prompt_sha256] = completion;
}

Completion MockLlm::complete(const CompletionRequest& request) const {
    if (request.prompt.empty()) {
        throw DataError("completion request has an empty prompt");
    }
    calls_.fetch_add(1);
    auto it = by_prompt_hash_.find(sha256_hex(request.prompt));
    return {it == by_prompt_hash_.end() ? fallback_ : it->second, 1};
}

// ---------------------------------------------------------------------------
// HttpLlm

struct HttpLlm::Gate {
    explicit Gate(int slots) : semaphore(slots) {}
    std::counting_semaphore<> semaphore;
};

HttpLlm::HttpLlm(std::string base_url) : HttpLlm(std::move(base_url), Options{}) {}

HttpLlm::HttpLlm(std::string base_url, Options options)
    : base_url_(std::move(base_url)),
      options_(std::move(options)),
      gate_(std::make_unique<Gate>(std::max(1, options_.max_inflight))) {}

HttpLlm::~HttpLlm() = default;

std::string HttpLlm::attempt(const CompletionRequest& request) const {
    nlohmann::json body{{"model", options_.model},
                        {"messages", nlohmann::json::array({nlohmann::json{
                                         {"role", "user"}, {"content", request.prompt}}})},
                        {"temperature", request.temperature},
                        {"max_tokens", request.max_tokens}};

    calls_.fetch_add(1);
    gate_->semaphore.acquire();
    httplib::Client client(base_url_);
    client.set_connection_timeout(options_.timeout_ms / 1000, options_.timeout_ms % 1000 * 1000);
    client.set_read_timeout(options_.timeout_ms / 1000, options_.timeout_ms % 1000 * 1000);
    auto res = client.Post(options_.path, body.dump(), "application/json");
    gate_->semaphore.release();

    if (!res) {
        throw TransportError("LLM request to " + base_url_ +
                             " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("LLM at " + base_url_ + " returned status " +
                             std::to_string(res->status));
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty()) {
        throw TransportError("LLM at " + base_url_ + " returned a malformed body");
    }
    const auto& first = parsed["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw TransportError("LLM at " + base_url_ + " returned a malformed choice");
    }
    return first["message"]["content"].get<std::string>();
}

Completion HttpLlm::complete(const CompletionRequest& request) const {
    if (request.prompt.empty()) {
        throw DataError("completion request has an empty prompt");
    }
    int attempts_left = 1 + std::max(0, options_.retries);
    std::uint64_t requests = 0;
    while (true) {
        try {
            ++requests;
            return {attempt(request), requests};
        } catch (const TransportError&) {
            if (--attempts_left <= 0) throw;
        }
    }
}

// ---------------------------------------------------------------------------
// Answer parsing

namespace {

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

bool starts_with_answer_marker(const std::string& line, std::size_t& content_begin) {
    static const std::string marker = "answer:";
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (line.size() - i < marker.size()) return false;
    for (std::size_t j = 0; j < marker.size(); ++j) {
        if (std::tolower(static_cast<unsigned char>(line[i + j])) != marker[j]) return false;
    }
    content_begin = i + marker.size();
    return true;
}

std::string strip_trailing_punct(std::string s) {
    static const std::string punct = ".,;:!?";
    while (!s.empty() && punct.find(s.back()) != std::string::npos) s.pop_back();
    return trim(s);
}

}  // namespace

ParsedAnswer parse_answer(const std::string& completion) {
    ParsedAnswer parsed;
    parsed.raw_completion = completion;

    std::string marker_content;
    bool found = false;
    std::size_t pos = 0;
    while (pos <= completion.size()) {
        std::size_t eol = completion.find('\n', pos);
        std::string line = completion.substr(pos, eol == std::string::npos ? std::string::npos
                                                                           : eol - pos);
        std::size_t content_begin = 0;
        if (starts_with_answer_marker(line, content_begin)) {
            marker_content = line.substr(content_begin);
            found = true;
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }

    if (!found) {
        parsed.extracted = trim(completion);
        parsed.parse_ok = false;
        return parsed;
    }

    std::string value = strip_trailing_punct(trim(marker_content));
    if (value.size() >= 2 && value.front() == '<' && value.back() == '>') {
        value = strip_trailing_punct(trim(value.substr(1, value.size() - 2)));
    }
    parsed.extracted = value;
    parsed.parse_ok = true;
    return parsed;
}

std::shared_ptr<LlmBackend> make_llm(const std::string& selector) {
    if (selector == "mock") return std::make_shared<MockLlm>();
    if (selector.rfind("mock:", 0) == 0) {
        return MockLlm::from_fixture_file(selector.substr(5));
    }
    if (selector.rfind("http:", 0) == 0) {
        std::string url = selector.substr(5);
        if (url.rfind("//", 0) == 0) url = "http:" + url;
        return std::make_shared<HttpLlm>(url);
    }
    throw DataError("unknown llm selector \"" + selector +
                    "\" (expected mock, mock:FIXTURE, http:URL)");
}

}  // namespace drrag
