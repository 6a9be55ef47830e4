#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "drrag/corpus.hpp"
#include "drrag/dataset.hpp"

namespace drrag {

/// A pairwise relevance judgment. The label is a pure function of
/// (score, threshold): positive iff score >= threshold.
struct ClassifierVerdict {
    std::string parent_doc_id;
    std::string candidate_doc_id;
    double score = 0.0;
    double threshold = 0.0;
    bool positive = false;
};

/// Scoring interface for the pairwise classifier. Backends receive the raw
/// (query, doc_a, doc_b) strings in argument order; symmetry is a backend
/// property, not a contract.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;
    virtual double score(std::string_view query, std::string_view doc_a,
                         std::string_view doc_b) const = 0;
    virtual std::string id() const = 0;
};

/// Jaccard overlap between the token set of query plus doc_a and the token
/// set of doc_b; 0 when either side is empty. Hermetic stand-in for a
/// trained relevance model.
double lexical_score(std::string_view query, std::string_view doc_a, std::string_view doc_b);

class LexicalClassifier final : public ClassifierBackend {
public:
    double score(std::string_view query, std::string_view doc_a,
                 std::string_view doc_b) const override;
    std::string id() const override { return "lexical"; }
};

/// Fixed-score backend; score 1.0 makes every pair positive, 0.0 makes every
/// pair negative at any threshold > 0.
class ConstClassifier final : public ClassifierBackend {
public:
    explicit ConstClassifier(double value) : value_(value) {}
    double score(std::string_view, std::string_view, std::string_view) const override {
        return value_;
    }
    std::string id() const override { return "const:" + std::to_string(value_); }

private:
    double value_;
};

/// Client for the classifier wire protocol: POST {base_url}/classify with
/// body {"query", "doc_a", "doc_b"}, expecting {"score": real in [0,1]}.
/// Non-2xx, timeouts, and malformed bodies raise TransportError. Retries are
/// off by default: retrying a nondeterministic model would break trace
/// replay.
class HttpClassifier final : public ClassifierBackend {
public:
    struct Options {
        int timeout_ms = 10000;
        int max_inflight = 8;
    };

    explicit HttpClassifier(std::string base_url);
    HttpClassifier(std::string base_url, Options options);
    ~HttpClassifier() override;

    double score(std::string_view query, std::string_view doc_a,
                 std::string_view doc_b) const override;
    std::string id() const override { return "http:" + base_url_; }

private:
    std::string base_url_;
    Options options_;
    struct Gate;
    std::unique_ptr<Gate> gate_;
};

/// Runs the backend on (query, doc_a, doc_b) — document payloads, in that
/// order — and thresholds the score. Role tags default to parent = doc_a,
/// candidate = doc_b; callers whose argument order is inverted swap them.
ClassifierVerdict classify(const ClassifierBackend& backend, std::string_view query,
                           const Document& doc_a, const Document& doc_b, double threshold);

/// Builds a backend from a CLI selector: "lexical", "http:URL",
/// "always-positive", or "always-negative".
std::shared_ptr<ClassifierBackend> make_classifier(const std::string& selector);

// ---------------------------------------------------------------------------
// Training-pair generation

struct TrainingPair {
    std::string query;
    std::string doc_a;
    std::string doc_b;
    bool positive = false;
};

struct PairGenOptions {
    int ratio_pos = 1;
    int ratio_neg = 1;
    std::uint64_t seed = 0;
};

struct PairGenSummary {
    std::size_t positives = 0;
    std::size_t neg_gold_distractor = 0;
    std::size_t neg_distractor_distractor = 0;
    std::size_t skipped_records = 0;
    std::size_t negative_shortfall = 0;
};

/// Emits positives from gold-gold pairs and negatives sampled from
/// gold-distractor and distractor-distractor pairs, at the requested
/// positive:negative ratio (within one pair overall). Distractors come from
/// the record's candidate pool when present, otherwise uniformly from the
/// corpus excluding golds. Records with fewer than two resolvable gold
/// documents or no available distractor are skipped and counted.
std::vector<TrainingPair> gen_training_pairs(const std::vector<QueryRecord>& dataset,
                                             const CorpusHandle& corpus,
                                             const PairGenOptions& options,
                                             PairGenSummary* summary = nullptr);

/// Parses "P:N" ratio syntax, e.g. "1:1" or "1:2".
void parse_ratio(const std::string& text, int& pos, int& neg);

}  // namespace drrag
