#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>

namespace drrag {

struct CompletionRequest {
    std::string prompt;  // non-empty
    int max_tokens = 512;
    double temperature = 0.0;  // deterministic decoding by default
};

/// Result of scanning a completion for the final "Answer:" marker. When no
/// marker exists, parse_ok is false and extracted falls back to the whole
/// trimmed completion.
struct ParsedAnswer {
    std::string raw_completion;
    std::string extracted;
    bool parse_ok = false;
};

struct Completion {
    std::string text;
    /// Requests issued for this one call: 1 unless opt-in retries fired.
    /// Safe under concurrent callers, unlike a delta of the global counter.
    std::uint64_t requests = 1;
};

/// Single-call completion backend. complete() issues exactly one request;
/// nothing is retried silently. calls() counts lifetime requests across all
/// callers.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual Completion complete(const CompletionRequest& request) const = 0;
    virtual std::uint64_t calls() const = 0;
    virtual std::string id() const = 0;
};

/// Deterministic mock: maps sha256(prompt) to a canned completion, with a
/// declared fallback for unknown prompts. Fixture file is JSONL of
/// {"prompt_sha256", "completion"} records plus one {"fallback": ...} record.
class MockLlm final : public LlmBackend {
public:
    MockLlm();  // fallback-only
    static std::shared_ptr<MockLlm> from_fixture_file(const std::string& path);

    void add_fixture(const std::string& prompt, const std::string& completion);
    void add_fixture_hash(const std::string& prompt_sha256, const std::string& completion);
    void set_fallback(std::string completion) { fallback_ = std::move(completion); }

    Completion complete(const CompletionRequest& request) const override;
    std::uint64_t calls() const override { return calls_.load(); }
    std::string id() const override { return "mock"; }

    static constexpr const char* kDefaultFallback = "Answer: <UNKNOWN>";

private:
    std::unordered_map<std::string, std::string> by_prompt_hash_;
    std::string fallback_ = kDefaultFallback;
    mutable std::atomic<std::uint64_t> calls_{0};
};

/// Chat-completion HTTP client: POST {base_url}{path} with
/// {"model", "messages": [{"role": "user", "content": prompt}],
///  "temperature", "max_tokens"}; the first choice's message content is the
/// completion. Transport failures raise TransportError; opt-in retries are
/// visible through calls().
class HttpLlm final : public LlmBackend {
public:
    struct Options {
        std::string model = "default";
        std::string path = "/v1/chat/completions";
        int timeout_ms = 60000;
        int max_inflight = 4;
        int retries = 0;
    };

    explicit HttpLlm(std::string base_url);
    HttpLlm(std::string base_url, Options options);
    ~HttpLlm() override;

    Completion complete(const CompletionRequest& request) const override;
    std::uint64_t calls() const override { return calls_.load(); }
    std::string id() const override { return "http:" + base_url_; }

private:
    std::string attempt(const CompletionRequest& request) const;

    std::string base_url_;
    Options options_;
    mutable std::atomic<std::uint64_t> calls_{0};
    struct Gate;
    std::unique_ptr<Gate> gate_;
};

/// Finds the last line beginning "Answer:" (case-insensitive), strips an
/// optional <...> wrapping plus trailing punctuation, and returns the
/// content. Total: non-empty input always yields an extracted string.
ParsedAnswer parse_answer(const std::string& completion);

/// Builds a backend from a CLI selector: "mock", "mock:FIXTURE", "http:URL".
std::shared_ptr<LlmBackend> make_llm(const std::string& selector);

}  // namespace drrag
