#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "drrag/corpus.hpp"
#include "drrag/dataset.hpp"

namespace drrag {

/// QA answer normalization: lowercase, strip punctuation, drop the articles
/// a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

/// 1 iff the normalized prediction equals some normalized gold.
int exact_match(std::string_view pred, const std::vector<std::string>& golds);

/// Max over golds of token-multiset F1 between normalized token lists.
/// 1 when both sides normalize to nothing, 0 when exactly one does.
double token_f1(std::string_view pred, const std::vector<std::string>& golds);

/// 1 iff some normalized gold occurs as a contiguous token subsequence of
/// the normalized prediction. Containment is a local convention: it keeps
/// Acc >= EM pointwise.
int accuracy(std::string_view pred, const std::vector<std::string>& golds);

/// |context ∩ gold| / |gold| with set semantics; order and duplicates in the
/// context are irrelevant. Throws DataError on empty gold.
double recall_rate(const std::vector<std::string>& context_doc_ids,
                   const std::vector<std::string>& gold_doc_ids);

/// One row of a results file (the trace sub-object is not needed for
/// scoring and is ignored on load).
struct ResultRecord {
    std::string query_id;
    std::string strategy;
    int k = 0;
    std::string answer;
    std::vector<std::string> context_doc_ids;
    std::uint64_t llm_calls = 0;
    double wall_time_ms = 0.0;
};

std::vector<ResultRecord> load_results(const std::string& path);

struct PerQueryEval {
    std::string query_id;
    int em = 0;
    double f1 = 0.0;
    int acc = 0;
    std::optional<double> recall;  // absent when the record has no gold docs
    std::size_t context_size = 0;
    std::uint64_t llm_calls = 0;
    double wall_time_ms = 0.0;
};

/// Aggregates are arithmetic means of the per-query rows; recomputing them
/// from per_query must reproduce the header values bit-exactly.
struct EvalReport {
    double em = 0.0;           // [0,100]
    double f1 = 0.0;           // [0,100]
    double acc = 0.0;          // [0,100]
    double recall_rate = 0.0;  // [0,100], over rows that carry gold docs
    double actual_numbers = 0.0;
    double steps = 0.0;
    double time_per_query_ms = 0.0;
    std::size_t query_count = 0;
    std::size_t recall_excluded = 0;
    std::optional<double> normalized_steps;  // set when a baseline is supplied
    std::optional<double> normalized_time;
    std::vector<PerQueryEval> per_query;
};

/// Scores a results set against its dataset. Every result query_id must
/// exist in the dataset and appear at most once in the results. When a
/// corpus is supplied, gold_doc_ids are checked to resolve in it.
EvalReport evaluate(const std::vector<ResultRecord>& results,
                    const std::vector<QueryRecord>& dataset,
                    const CorpusHandle* corpus = nullptr);

EvalReport evaluate_run(const std::string& results_path, const std::string& dataset_path,
                        const CorpusHandle* corpus = nullptr);

/// Adds normalized Step and Time columns relative to a baseline run.
void apply_baseline(EvalReport& report, const EvalReport& baseline);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
std::string report_table(const EvalReport& report);

}  // namespace drrag
