#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drrag/classifier.hpp"
#include "drrag/dataset.hpp"
#include "drrag/llm_client.hpp"
#include "drrag/retrievers.hpp"

namespace drrag {

/// BM25 and SM are single-stage baselines that spend the whole budget k in
/// one retrieval. QDC adds a concatenation-driven second stage; CIS and CFS
/// add classifier selection on top of it.
enum class Strategy { Bm25, Sm, Qdc, Cis, Cfs };

Strategy strategy_from_string(const std::string& name);
const char* strategy_name(Strategy strategy);
bool is_two_stage(Strategy strategy);
bool needs_classifier(Strategy strategy);

struct PipelineConfig {
    Strategy strategy = Strategy::Sm;
    int k = 4;   // total context budget
    int k1 = 0;  // first-stage count; 0 -> ceil(k/2) for two-stage strategies, k otherwise
    int k2 = 0;  // second-stage depth per parent; 0 -> k - k1 (min 1)
    double classifier_threshold = 0.5;
    /// Off-by-default alternate CIS mode: classify all pairs among the
    /// retrieved context and drop any member whose pairings are all negative.
    bool cis_full_pairwise = false;

    /// Fills defaulted k1/k2 and validates ranges. Throws DataError on an
    /// unsatisfiable configuration.
    PipelineConfig normalized() const;
};

struct StageCandidates {
    std::string parent_doc_id;
    std::vector<ScoredDoc> candidates;
};

/// Auditable record of one pipeline run: what each stage retrieved, every
/// classifier verdict, the final context, and the LLM call count.
struct RetrievalTrace {
    std::string query_id;
    Strategy strategy = Strategy::Sm;
    int k = 0;
    int k1 = 0;
    int k2 = 0;
    std::vector<ScoredDoc> first_stage;
    std::vector<StageCandidates> second_stage;  // parents in first-stage rank order
    std::vector<ClassifierVerdict> verdicts;
    std::vector<std::string> final_context;  // ordered, deduplicated, <= k
    std::uint64_t llm_calls = 0;
    double wall_time_ms = 0.0;
    bool answer_parse_ok = true;
};

struct AnswerResult {
    std::string answer;
    RetrievalTrace trace;
};

/// First retrieval stage: top-k1 for the configured retriever (BM25 for the
/// BM25 strategy, SM otherwise). These documents are unconditional members
/// of the final context.
std::vector<ScoredDoc> run_first_stage(const QueryRecord& query, const PipelineConfig& config,
                                       const SearchIndex& index);

/// Query-document concatenation: per first-stage parent, retrieve k2
/// candidates for Concat(query, parent) and admit the highest-ranked one not
/// already in the context, stopping once the budget k is met.
RetrievalTrace run_qdc(const QueryRecord& query, const PipelineConfig& config,
                       const SearchIndex& index);

/// Inverse selection: run QDC, then drop each second-stage member whose
/// pairing with every first-stage document is classified negative.
/// First-stage documents are never removed.
RetrievalTrace run_cis(const QueryRecord& query, const PipelineConfig& config,
                       const SearchIndex& index, const ClassifierBackend& classifier);

/// Forward selection: per parent, scan second-stage candidates in rank order
/// and admit the first one that is absent from the context and classified
/// positive with its parent; a parent may admit nothing, so the final
/// context may hold fewer than k documents.
RetrievalTrace run_cfs(const QueryRecord& query, const PipelineConfig& config,
                       const SearchIndex& index, const ClassifierBackend& classifier);

/// Dispatches to the configured strategy. classifier may be null for
/// strategies that do not use one.
RetrievalTrace run_strategy(const QueryRecord& query, const PipelineConfig& config,
                            const SearchIndex& index, const ClassifierBackend* classifier);

/// Renders the reading-comprehension prompt: preamble, "Contexts" block with
/// "Document i:" headers in context order and verbatim text, the answer
/// format instruction, then the question.
std::string assemble_prompt(const QueryRecord& query, const std::vector<Document>& context_docs);

/// Full run: retrieve via the configured strategy, assemble one prompt,
/// perform exactly one LLM completion, and parse the answer. llm_calls is
/// taken from the backend's request counter, so opt-in transport retries
/// stay visible.
AnswerResult answer_query(const QueryRecord& query, const PipelineConfig& config,
                          const SearchIndex& index, const ClassifierBackend* classifier,
                          const LlmBackend& llm);

nlohmann::json trace_to_json(const RetrievalTrace& trace);

/// One results-file record: answer plus serialized trace.
nlohmann::json result_record_json(const AnswerResult& result);

}  // namespace drrag
