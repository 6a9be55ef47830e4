#include "drrag/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <unordered_set>

#include "drrag/errors.hpp"

namespace drrag {

Strategy strategy_from_string(const std::string& name) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "bm25") return Strategy::Bm25;
    if (lower == "sm") return Strategy::Sm;
    if (lower == "qdc") return Strategy::Qdc;
    if (lower == "cis") return Strategy::Cis;
    if (lower == "cfs") return Strategy::Cfs;
    throw DataError("unknown strategy \"" + name + "\" (expected bm25, sm, qdc, cis, cfs)");
}

const char* strategy_name(Strategy strategy) {
    switch (strategy) {
        case Strategy::Bm25: return "bm25";
        case Strategy::Sm: return "sm";
        case Strategy::Qdc: return "qdc";
        case Strategy::Cis: return "cis";
        case Strategy::Cfs: return "cfs";
    }
    return "?";
}

bool is_two_stage(Strategy strategy) {
    return strategy == Strategy::Qdc || strategy == Strategy::Cis || strategy == Strategy::Cfs;
}

bool needs_classifier(Strategy strategy) {
    return strategy == Strategy::Cis || strategy == Strategy::Cfs;
}

PipelineConfig PipelineConfig::normalized() const {
    PipelineConfig cfg = *this;
    if (cfg.k < 1) throw DataError("k must be >= 1");
    if (!is_two_stage(cfg.strategy)) {
        // Single-stage baselines spend the whole budget in stage one.
        cfg.k1 = cfg.k;
        cfg.k2 = 0;
        return cfg;
    }
    if (cfg.k1 == 0) cfg.k1 = (cfg.k + 1) / 2;
    if (cfg.k2 == 0) cfg.k2 = std::max(1, cfg.k - cfg.k1);
    if (cfg.k1 < 1) throw DataError("k1 must be >= 1");
    if (cfg.k1 > cfg.k) throw DataError("k1 must not exceed k");
    if (cfg.k2 < 1) throw DataError("k2 must be >= 1 for two-stage strategies");
    if (cfg.classifier_threshold < 0.0 || cfg.classifier_threshold > 1.0) {
        throw DataError("classifier threshold must lie in [0,1]");
    }
    return cfg;
}

std::vector<ScoredDoc> run_first_stage(const QueryRecord& query, const PipelineConfig& config,
                                       const SearchIndex& index) {
    PipelineConfig cfg = config.normalized();
    std::size_t count = static_cast<std::size_t>(cfg.k1);
    if (cfg.strategy == Strategy::Bm25) {
        return index.bm25->retrieve(query.text, count);
    }
    return index.vectors->retrieve(query.text, count);
}

namespace {

/// QDC skeleton shared by QDC, CIS, and CFS: seeds the context with the
/// first stage and walks parents in rank order. `admit` decides which
/// candidate (if any) a parent contributes.
template <typename AdmitFn>
RetrievalTrace two_stage_walk(const QueryRecord& query, const PipelineConfig& cfg,
                              const SearchIndex& index, AdmitFn admit) {
    RetrievalTrace trace;
    trace.query_id = query.query_id;
    trace.strategy = cfg.strategy;
    trace.k = cfg.k;
    trace.k1 = cfg.k1;
    trace.k2 = cfg.k2;
    trace.first_stage = run_first_stage(query, cfg, index);

    std::unordered_set<std::string> in_context;
    for (const ScoredDoc& doc : trace.first_stage) {
        trace.final_context.push_back(doc.doc_id);
        in_context.insert(doc.doc_id);
    }

    std::size_t budget = static_cast<std::size_t>(cfg.k);
    for (const ScoredDoc& parent : trace.first_stage) {
        if (trace.final_context.size() >= budget) break;
        const Document& parent_doc = index.corpus->at(parent.doc_id);
        std::string expanded = concat_query(query.text, parent_doc);
        StageCandidates stage;
        stage.parent_doc_id = parent.doc_id;
        stage.candidates =
            index.vectors->retrieve(expanded, static_cast<std::size_t>(cfg.k2));
        trace.second_stage.push_back(std::move(stage));
        const std::vector<ScoredDoc>& candidates = trace.second_stage.back().candidates;

        std::optional<std::string> chosen = admit(trace, parent_doc, candidates, in_context);
        if (chosen) {
            trace.final_context.push_back(*chosen);
            in_context.insert(*chosen);
        }
    }
    return trace;
}

}  // namespace

RetrievalTrace run_qdc(const QueryRecord& query, const PipelineConfig& config,
                       const SearchIndex& index) {
    PipelineConfig cfg = config.normalized();
    return two_stage_walk(
        query, cfg, index,
        [](RetrievalTrace&, const Document&, const std::vector<ScoredDoc>& candidates,
           const std::unordered_set<std::string>& in_context) -> std::optional<std::string> {
            for (const ScoredDoc& candidate : candidates) {
                if (!in_context.count(candidate.doc_id)) return candidate.doc_id;
            }
            return std::nullopt;
        });
}

namespace {

RetrievalTrace run_cis_full_pairwise(RetrievalTrace trace, const QueryRecord& query,
                                     const PipelineConfig& cfg, const SearchIndex& index,
                                     const ClassifierBackend& classifier) {
    // Alternate mode: every unordered pair among the retrieved context is
    // classified, and any member (first stage included) whose pairings are
    // all negative is dropped.
    const std::vector<std::string> members = trace.final_context;
    std::unordered_set<std::string> keep;
    std::vector<ClassifierVerdict> verdicts;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            ClassifierVerdict v =
                classify(classifier, query.text, index.corpus->at(members[i]),
                         index.corpus->at(members[j]), cfg.classifier_threshold);
            if (v.positive) {
                keep.insert(members[i]);
                keep.insert(members[j]);
            }
            verdicts.push_back(std::move(v));
        }
    }
    trace.verdicts.insert(trace.verdicts.end(), verdicts.begin(), verdicts.end());
    std::vector<std::string> filtered;
    for (const std::string& id : members) {
        if (keep.count(id)) filtered.push_back(id);
    }
    trace.final_context = std::move(filtered);
    return trace;
}

}  // namespace

RetrievalTrace run_cis(const QueryRecord& query, const PipelineConfig& config,
                       const SearchIndex& index, const ClassifierBackend& classifier) {
    PipelineConfig cfg = config.normalized();
    RetrievalTrace trace = run_qdc(query, cfg, index);
    trace.strategy = Strategy::Cis;

    if (cfg.cis_full_pairwise) {
        return run_cis_full_pairwise(std::move(trace), query, cfg, index, classifier);
    }

    std::unordered_set<std::string> first_stage_ids;
    for (const ScoredDoc& doc : trace.first_stage) first_stage_ids.insert(doc.doc_id);

    std::vector<std::string> filtered;
    for (const std::string& member : trace.final_context) {
        if (first_stage_ids.count(member)) {
            filtered.push_back(member);  // never removed
            continue;
        }
        const Document& member_doc = index.corpus->at(member);
        bool any_positive = false;
        for (const ScoredDoc& parent : trace.first_stage) {
            // Argument order per the inverse-selection rule: (q, d', d_i).
            ClassifierVerdict v = classify(classifier, query.text, member_doc,
                                           index.corpus->at(parent.doc_id),
                                           cfg.classifier_threshold);
            std::swap(v.parent_doc_id, v.candidate_doc_id);
            any_positive = any_positive || v.positive;
            trace.verdicts.push_back(std::move(v));
        }
        if (any_positive) filtered.push_back(member);
    }
    trace.final_context = std::move(filtered);
    return trace;
}

RetrievalTrace run_cfs(const QueryRecord& query, const PipelineConfig& config,
                       const SearchIndex& index, const ClassifierBackend& classifier) {
    PipelineConfig cfg = config.normalized();
    RetrievalTrace trace = two_stage_walk(
        query, cfg, index,
        [&](RetrievalTrace& t, const Document& parent_doc,
            const std::vector<ScoredDoc>& candidates,
            const std::unordered_set<std::string>& in_context) -> std::optional<std::string> {
            for (const ScoredDoc& candidate : candidates) {
                if (in_context.count(candidate.doc_id)) continue;
                // Argument order per the forward-selection rule: (q, d_i, d').
                ClassifierVerdict v =
                    classify(classifier, query.text, parent_doc,
                             index.corpus->at(candidate.doc_id), cfg.classifier_threshold);
                bool positive = v.positive;
                t.verdicts.push_back(std::move(v));
                if (positive) return candidate.doc_id;
            }
            return std::nullopt;  // no qualifying candidate for this parent
        });
    trace.strategy = Strategy::Cfs;
    return trace;
}

RetrievalTrace run_strategy(const QueryRecord& query, const PipelineConfig& config,
                            const SearchIndex& index, const ClassifierBackend* classifier) {
    PipelineConfig cfg = config.normalized();
    if (needs_classifier(cfg.strategy) && !classifier) {
        throw DataError(std::string(strategy_name(cfg.strategy)) + " requires a classifier");
    }
    switch (cfg.strategy) {
        case Strategy::Bm25:
        case Strategy::Sm: {
            RetrievalTrace trace;
            trace.query_id = query.query_id;
            trace.strategy = cfg.strategy;
            trace.k = cfg.k;
            trace.k1 = cfg.k1;
            trace.k2 = cfg.k2;
            trace.first_stage = run_first_stage(query, cfg, index);
            for (const ScoredDoc& doc : trace.first_stage) {
                trace.final_context.push_back(doc.doc_id);
            }
            return trace;
        }
        case Strategy::Qdc: return run_qdc(query, cfg, index);
        case Strategy::Cis: return run_cis(query, cfg, index, *classifier);
        case Strategy::Cfs: return run_cfs(query, cfg, index, *classifier);
    }
    throw DataError("unreachable strategy");
}

std::string assemble_prompt(const QueryRecord& query, const std::vector<Document>& context_docs) {
    static const char* divider = "------------------------------------------";
    std::ostringstream out;
    out << "You are a reading comprehension expert, and you need to complete a reading "
           "comprehension task.\n";
    out << divider << "\n";
    out << "Contexts\n";
    for (std::size_t i = 0; i < context_docs.size(); ++i) {
        out << "\nDocument " << (i + 1) << ":\n" << context_docs[i].text << "\n";
    }
    out << divider << "\n";
    out << "After reading the documents above, answering the following question. Reasoning step "
           "by step. At last, you should output the final result via the following format:\n";
    out << "Answer: <your answer based on the documents>;\n";
    out << "Please answer the question directly.\n";
    out << divider << "\n";
    out << "Question\n";
    out << query.text << "\n";
    out << divider << "\n";
    out << "Give your analysis process first, and then output your answer in a specified format.";
    return out.str();
}

AnswerResult answer_query(const QueryRecord& query, const PipelineConfig& config,
                          const SearchIndex& index, const ClassifierBackend* classifier,
                          const LlmBackend& llm) {
    auto start = std::chrono::steady_clock::now();

    AnswerResult result;
    result.trace = run_strategy(query, config, index, classifier);

    std::vector<Document> context_docs;
    context_docs.reserve(result.trace.final_context.size());
    for (const std::string& doc_id : result.trace.final_context) {
        context_docs.push_back(index.corpus->at(doc_id));
    }

    CompletionRequest request;
    request.prompt = assemble_prompt(query, context_docs);

    Completion completion = llm.complete(request);
    result.trace.llm_calls = completion.requests;

    ParsedAnswer parsed = parse_answer(completion.text);
    result.answer = parsed.extracted;
    result.trace.answer_parse_ok = parsed.parse_ok;

    auto end = std::chrono::steady_clock::now();
    result.trace.wall_time_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start)
            .count();
    return result;
}

nlohmann::json trace_to_json(const RetrievalTrace& trace) {
    auto scored_list = [](const std::vector<ScoredDoc>& docs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const ScoredDoc& d : docs) {
            arr.push_back({{"doc_id", d.doc_id}, {"score", d.score}, {"rank", d.rank}});
        }
        return arr;
    };
    nlohmann::json second = nlohmann::json::array();
    for (const StageCandidates& stage : trace.second_stage) {
        second.push_back({{"parent_doc_id", stage.parent_doc_id},
                          {"candidates", scored_list(stage.candidates)}});
    }
    nlohmann::json verdicts = nlohmann::json::array();
    for (const ClassifierVerdict& v : trace.verdicts) {
        verdicts.push_back({{"parent_doc_id", v.parent_doc_id},
                            {"candidate_doc_id", v.candidate_doc_id},
                            {"score", v.score},
                            {"threshold", v.threshold},
                            {"label", v.positive ? "positive" : "negative"}});
    }
    return nlohmann::json{{"query_id", trace.query_id},
                          {"first_stage", scored_list(trace.first_stage)},
                          {"second_stage", second},
                          {"verdicts", verdicts},
                          {"final_context", trace.final_context},
                          {"llm_calls", trace.llm_calls},
                          {"wall_time_ms", trace.wall_time_ms},
                          {"answer_parse_ok", trace.answer_parse_ok}};
}

nlohmann::json result_record_json(const AnswerResult& result) {
    const RetrievalTrace& trace = result.trace;
    return nlohmann::json{{"query_id", trace.query_id},
                          {"strategy", strategy_name(trace.strategy)},
                          {"k", trace.k},
                          {"k1", trace.k1},
                          {"k2", trace.k2},
                          {"answer", result.answer},
                          {"context_doc_ids", trace.final_context},
                          {"llm_calls", trace.llm_calls},
                          {"wall_time_ms", trace.wall_time_ms},
                          {"trace", trace_to_json(trace)}};
}

}  // namespace drrag
