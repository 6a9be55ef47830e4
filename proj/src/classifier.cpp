#include "drrag/classifier.hpp"

#include <algorithm>
#include <random>
#include <semaphore>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "drrag/errors.hpp"
#include "drrag/util.hpp"

namespace drrag {

double lexical_score(std::string_view query, std::string_view doc_a, std::string_view doc_b) {
    std::set<std::string> left;
    for (auto& t : tokenize(query)) left.insert(std::move(t));
    for (auto& t : tokenize(doc_a)) left.insert(std::move(t));
    std::set<std::string> right;
    for (auto& t : tokenize(doc_b)) right.insert(std::move(t));
    if (left.empty() || right.empty()) return 0.0;
    std::size_t intersection = 0;
    for (const auto& t : right) {
        if (left.count(t)) ++intersection;
    }
    std::size_t uni = left.size() + right.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(uni);
}

double LexicalClassifier::score(std::string_view query, std::string_view doc_a,
                                std::string_view doc_b) const {
    return lexical_score(query, doc_a, doc_b);
}

// ---------------------------------------------------------------------------
// HttpClassifier

struct HttpClassifier::Gate {
    explicit Gate(int slots) : semaphore(slots) {}
    std::counting_semaphore<> semaphore;
};

HttpClassifier::HttpClassifier(std::string base_url)
    : HttpClassifier(std::move(base_url), Options{}) {}

HttpClassifier::HttpClassifier(std::string base_url, Options options)
    : base_url_(std::move(base_url)),
      options_(options),
      gate_(std::make_unique<Gate>(std::max(1, options.max_inflight))) {}

HttpClassifier::~HttpClassifier() = default;

double HttpClassifier::score(std::string_view query, std::string_view doc_a,
                             std::string_view doc_b) const {
    nlohmann::json body{{"query", query}, {"doc_a", doc_a}, {"doc_b", doc_b}};

    gate_->semaphore.acquire();
    httplib::Client client(base_url_);
    client.set_connection_timeout(options_.timeout_ms / 1000, options_.timeout_ms % 1000 * 1000);
    client.set_read_timeout(options_.timeout_ms / 1000, options_.timeout_ms % 1000 * 1000);
    auto res = client.Post("/classify", body.dump(), "application/json");
    gate_->semaphore.release();

    if (!res) {
        throw TransportError("classifier request to " + base_url_ +
                             " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("classifier at " + base_url_ + " returned status " +
                             std::to_string(res->status));
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("score") ||
        !parsed["score"].is_number()) {
        throw TransportError("classifier at " + base_url_ + " returned a malformed body");
    }
    double s = parsed["score"].get<double>();
    if (s < 0.0 || s > 1.0) {
        throw TransportError("classifier at " + base_url_ + " returned score outside [0,1]");
    }
    return s;
}

ClassifierVerdict classify(const ClassifierBackend& backend, std::string_view query,
                           const Document& doc_a, const Document& doc_b, double threshold) {
    ClassifierVerdict v;
    v.parent_doc_id = doc_a.doc_id;
    v.candidate_doc_id = doc_b.doc_id;
    v.score = backend.score(query, document_payload(doc_a), document_payload(doc_b));
    v.threshold = threshold;
    v.positive = v.score >= threshold;
    return v;
}

std::shared_ptr<ClassifierBackend> make_classifier(const std::string& selector) {
    if (selector == "lexical") return std::make_shared<LexicalClassifier>();
    if (selector == "always-positive") return std::make_shared<ConstClassifier>(1.0);
    if (selector == "always-negative") return std::make_shared<ConstClassifier>(0.0);
    if (selector.rfind("http:", 0) == 0) {
        std::string url = selector.substr(5);
        if (url.rfind("//", 0) == 0) url = "http:" + url;  // accept full http://host:port
        return std::make_shared<HttpClassifier>(url);
    }
    throw DataError("unknown classifier selector \"" + selector +
                    "\" (expected lexical, http:URL, always-positive, always-negative)");
}

// ---------------------------------------------------------------------------
// Training-pair generation

namespace {

const Document* resolve(const CorpusHandle& corpus, const std::string& doc_id) {
    return corpus.find(doc_id);
}

}  // namespace

std::vector<TrainingPair> gen_training_pairs(const std::vector<QueryRecord>& dataset,
                                             const CorpusHandle& corpus,
                                             const PairGenOptions& options,
                                             PairGenSummary* summary) {
    if (options.ratio_pos < 1 || options.ratio_neg < 1) {
        throw DataError("pair ratio components must be >= 1");
    }
    PairGenSummary local;
    PairGenSummary& sum = summary ? *summary : local;
    sum = {};

    std::mt19937_64 rng(options.seed);
    std::vector<TrainingPair> pairs;

    // Emitting negatives against a running target keeps the overall ratio
    // within one pair even when per-record counts do not divide evenly.
    std::size_t cum_pos = 0;
    std::size_t cum_neg_emitted = 0;

    for (const QueryRecord& query : dataset) {
        std::vector<const Document*> golds;
        for (const auto& id : query.gold_doc_ids) {
            if (const Document* doc = resolve(corpus, id)) golds.push_back(doc);
        }
        if (golds.size() < 2) {
            ++sum.skipped_records;
            continue;
        }

        // Distractors: the record's candidate pool when present, otherwise
        // sampled from the corpus excluding golds.
        std::vector<const Document*> distractors;
        if (!query.candidates.empty()) {
            for (const auto& id : query.candidates) {
                const Document* doc = resolve(corpus, id);
                if (doc && std::find(query.gold_doc_ids.begin(), query.gold_doc_ids.end(), id) ==
                               query.gold_doc_ids.end()) {
                    distractors.push_back(doc);
                }
            }
        } else {
            std::vector<const Document*> pool;
            for (const Document& doc : corpus.documents()) {
                if (std::find(query.gold_doc_ids.begin(), query.gold_doc_ids.end(), doc.doc_id) ==
                    query.gold_doc_ids.end()) {
                    pool.push_back(&doc);
                }
            }
            deterministic_shuffle(pool, rng);
            std::size_t want = std::min<std::size_t>(pool.size(), 4);
            distractors.assign(pool.begin(), pool.begin() + want);
        }
        if (distractors.empty()) {
            ++sum.skipped_records;
            continue;
        }

        // Positives: every gold-gold pair.
        std::size_t record_pos = 0;
        for (std::size_t i = 0; i < golds.size(); ++i) {
            for (std::size_t j = i + 1; j < golds.size(); ++j) {
                pairs.push_back({query.text, document_payload(*golds[i]),
                                 document_payload(*golds[j]), true});
                ++record_pos;
            }
        }
        sum.positives += record_pos;

        // Negative candidates: gold-distractor then distractor-distractor.
        struct NegPair {
            const Document* a;
            const Document* b;
            bool gold_distractor;
        };
        std::vector<NegPair> candidates;
        for (const Document* g : golds) {
            for (const Document* d : distractors) {
                candidates.push_back({g, d, true});
            }
        }
        for (std::size_t i = 0; i < distractors.size(); ++i) {
            for (std::size_t j = i + 1; j < distractors.size(); ++j) {
                candidates.push_back({distractors[i], distractors[j], false});
            }
        }
        deterministic_shuffle(candidates, rng);

        cum_pos += record_pos;
        std::size_t total_neg_target =
            cum_pos * static_cast<std::size_t>(options.ratio_neg) /
            static_cast<std::size_t>(options.ratio_pos);
        std::size_t record_neg = total_neg_target - cum_neg_emitted;
        if (record_neg > candidates.size()) {
            sum.negative_shortfall += record_neg - candidates.size();
            record_neg = candidates.size();
        }
        for (std::size_t i = 0; i < record_neg; ++i) {
            const NegPair& np = candidates[i];
            pairs.push_back(
                {query.text, document_payload(*np.a), document_payload(*np.b), false});
            if (np.gold_distractor) {
                ++sum.neg_gold_distractor;
            } else {
                ++sum.neg_distractor_distractor;
            }
        }
        cum_neg_emitted += record_neg;
    }
    return pairs;
}

void parse_ratio(const std::string& text, int& pos, int& neg) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw DataError("ratio must look like \"1:1\", got \"" + text + "\"");
    }
    try {
        pos = std::stoi(text.substr(0, colon));
        neg = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw DataError("ratio must look like \"1:1\", got \"" + text + "\"");
    }
    if (pos < 1 || neg < 1) {
        throw DataError("ratio components must be >= 1, got \"" + text + "\"");
    }
}

}  // namespace drrag
