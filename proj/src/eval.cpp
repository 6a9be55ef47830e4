#include "drrag/eval.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "drrag/errors.hpp"
#include "drrag/jsonl.hpp"

namespace drrag {

std::string normalize_answer(std::string_view s) {
    std::string no_punct;
    no_punct.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) continue;
        no_punct.push_back(static_cast<char>(std::tolower(c)));
    }
    std::istringstream words(no_punct);
    std::string word;
    std::string out;
    while (words >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

namespace {

std::vector<std::string> normalized_tokens(std::string_view s) {
    std::istringstream words(normalize_answer(s));
    std::vector<std::string> tokens;
    std::string word;
    while (words >> word) tokens.push_back(std::move(word));
    return tokens;
}

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    std::unordered_map<std::string, int> gold_counts;
    for (const auto& t : gold) gold_counts[t]++;
    int overlap = 0;
    for (const auto& t : pred) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

bool contains_subsequence(const std::vector<std::string>& haystack,
                          const std::vector<std::string>& needle) {
    if (needle.empty()) return true;
    if (needle.size() > haystack.size()) return false;
    for (std::size_t start = 0; start + needle.size() <= haystack.size(); ++start) {
        bool match = true;
        for (std::size_t i = 0; i < needle.size(); ++i) {
            if (haystack[start + i] != needle[i]) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

}  // namespace

int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
    std::string normalized = normalize_answer(pred);
    for (const auto& gold : golds) {
        if (normalized == normalize_answer(gold)) return 1;
    }
    return 0;
}

double token_f1(std::string_view pred, const std::vector<std::string>& golds) {
    auto pred_tokens = normalized_tokens(pred);
    double best = 0.0;
    for (const auto& gold : golds) {
        best = std::max(best, f1_single(pred_tokens, normalized_tokens(gold)));
    }
    return best;
}

int accuracy(std::string_view pred, const std::vector<std::string>& golds) {
    auto pred_tokens = normalized_tokens(pred);
    for (const auto& gold : golds) {
        auto gold_tokens = normalized_tokens(gold);
        if (!gold_tokens.empty() && contains_subsequence(pred_tokens, gold_tokens)) return 1;
        if (gold_tokens.empty() && pred_tokens.empty()) return 1;
    }
    return 0;
}

double recall_rate(const std::vector<std::string>& context_doc_ids,
                   const std::vector<std::string>& gold_doc_ids) {
    if (gold_doc_ids.empty()) {
        throw DataError("recall_rate requires a non-empty gold set");
    }
    std::unordered_set<std::string> gold(gold_doc_ids.begin(), gold_doc_ids.end());
    std::unordered_set<std::string> context(context_doc_ids.begin(), context_doc_ids.end());
    std::size_t hit = 0;
    for (const auto& id : gold) {
        if (context.count(id)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(gold.size());
}

std::vector<ResultRecord> load_results(const std::string& path) {
    std::vector<ResultRecord> records;
    for_each_jsonl_file(path, [&](std::size_t line, const nlohmann::json& j) {
        if (j.contains("error")) {
            throw DataError(path + ":" + std::to_string(line) +
                            ": results file contains an error row (from --keep-going); re-run "
                            "without failures before evaluating");
        }
        ResultRecord r;
        r.query_id = jsonl_string(j, "query_id", path, line);
        r.strategy = jsonl_string_or(j, "strategy", "");
        r.answer = jsonl_string_or(j, "answer", "");
        if (j.contains("k") && j["k"].is_number_integer()) r.k = j["k"].get<int>();
        if (j.contains("context_doc_ids") && j["context_doc_ids"].is_array()) {
            for (const auto& id : j["context_doc_ids"]) {
                if (!id.is_string()) {
                    throw DataError(path + ":" + std::to_string(line) +
                                    ": context_doc_ids must be strings");
                }
                r.context_doc_ids.push_back(id.get<std::string>());
            }
        }
        if (j.contains("llm_calls") && j["llm_calls"].is_number()) {
            r.llm_calls = j["llm_calls"].get<std::uint64_t>();
        }
        if (j.contains("wall_time_ms") && j["wall_time_ms"].is_number()) {
            r.wall_time_ms = j["wall_time_ms"].get<double>();
        }
        records.push_back(std::move(r));
    });
    return records;
}

EvalReport evaluate(const std::vector<ResultRecord>& results,
                    const std::vector<QueryRecord>& dataset, const CorpusHandle* corpus) {
    std::unordered_map<std::string, const QueryRecord*> by_id;
    for (const QueryRecord& q : dataset) by_id.emplace(q.query_id, &q);

    std::unordered_set<std::string> seen;
    std::vector<std::string> unknown;
    for (const ResultRecord& r : results) {
        if (!seen.insert(r.query_id).second) {
            throw DataError("duplicate query_id in results: \"" + r.query_id + "\"");
        }
        if (!by_id.count(r.query_id)) unknown.push_back(r.query_id);
    }
    if (!unknown.empty()) {
        std::string joined;
        for (const auto& id : unknown) {
            if (!joined.empty()) joined += ", ";
            joined += id;
        }
        throw DataError("results reference query_ids absent from the dataset: " + joined);
    }

    EvalReport report;
    report.per_query.reserve(results.size());

    // Deterministic aggregation order regardless of how the results arrived.
    std::vector<const ResultRecord*> ordered;
    ordered.reserve(results.size());
    for (const ResultRecord& r : results) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const ResultRecord* a, const ResultRecord* b) { return a->query_id < b->query_id; });

    double em_sum = 0.0, f1_sum = 0.0, acc_sum = 0.0, recall_sum = 0.0;
    double context_sum = 0.0, steps_sum = 0.0, time_sum = 0.0;
    std::size_t recall_rows = 0;

    for (const ResultRecord* r : ordered) {
        const QueryRecord& q = *by_id.at(r->query_id);
        if (corpus) {
            for (const auto& gold : q.gold_doc_ids) {
                if (!corpus->contains(gold)) {
                    throw DataError("gold doc_id \"" + gold + "\" of query \"" + q.query_id +
                                    "\" does not resolve in the corpus");
                }
            }
        }
        PerQueryEval row;
        row.query_id = r->query_id;
        row.em = exact_match(r->answer, q.gold_answers);
        row.f1 = token_f1(r->answer, q.gold_answers);
        row.acc = accuracy(r->answer, q.gold_answers);
        row.context_size = r->context_doc_ids.size();
        row.llm_calls = r->llm_calls;
        row.wall_time_ms = r->wall_time_ms;
        if (!q.gold_doc_ids.empty()) {
            row.recall = recall_rate(r->context_doc_ids, q.gold_doc_ids);
            recall_sum += *row.recall;
            ++recall_rows;
        } else {
            ++report.recall_excluded;
        }
        em_sum += row.em;
        f1_sum += row.f1;
        acc_sum += row.acc;
        context_sum += static_cast<double>(row.context_size);
        steps_sum += static_cast<double>(row.llm_calls);
        time_sum += row.wall_time_ms;
        report.per_query.push_back(std::move(row));
    }

    double n = static_cast<double>(report.per_query.size());
    report.query_count = report.per_query.size();
    if (n > 0) {
        report.em = 100.0 * em_sum / n;
        report.f1 = 100.0 * f1_sum / n;
        report.acc = 100.0 * acc_sum / n;
        report.actual_numbers = context_sum / n;
        report.steps = steps_sum / n;
        report.time_per_query_ms = time_sum / n;
    }
    if (recall_rows > 0) {
        report.recall_rate = 100.0 * recall_sum / static_cast<double>(recall_rows);
    }
    return report;
}

EvalReport evaluate_run(const std::string& results_path, const std::string& dataset_path,
                        const CorpusHandle* corpus) {
    return evaluate(load_results(results_path), load_dataset(dataset_path), corpus);
}

void apply_baseline(EvalReport& report, const EvalReport& baseline) {
    if (baseline.steps > 0.0) report.normalized_steps = report.steps / baseline.steps;
    if (baseline.time_per_query_ms > 0.0) {
        report.normalized_time = report.time_per_query_ms / baseline.time_per_query_ms;
    }
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json per_query = nlohmann::json::array();
    for (const PerQueryEval& row : report.per_query) {
        nlohmann::json j{{"query_id", row.query_id},
                         {"em", row.em},
                         {"f1", row.f1},
                         {"acc", row.acc},
                         {"context_size", row.context_size},
                         {"llm_calls", row.llm_calls},
                         {"wall_time_ms", row.wall_time_ms}};
        if (row.recall) j["recall"] = *row.recall;
        per_query.push_back(std::move(j));
    }
    nlohmann::json j{{"em", report.em},
                     {"f1", report.f1},
                     {"acc", report.acc},
                     {"recall_rate", report.recall_rate},
                     {"actual_numbers", report.actual_numbers},
                     {"steps", report.steps},
                     {"time_per_query_ms", report.time_per_query_ms},
                     {"query_count", report.query_count},
                     {"recall_excluded", report.recall_excluded},
                     {"per_query", std::move(per_query)}};
    if (report.normalized_steps) j["normalized_steps"] = *report.normalized_steps;
    if (report.normalized_time) j["normalized_time"] = *report.normalized_time;
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport report;
    report.em = j.at("em").get<double>();
    report.f1 = j.at("f1").get<double>();
    report.acc = j.at("acc").get<double>();
    report.recall_rate = j.at("recall_rate").get<double>();
    report.actual_numbers = j.at("actual_numbers").get<double>();
    report.steps = j.at("steps").get<double>();
    report.time_per_query_ms = j.at("time_per_query_ms").get<double>();
    report.query_count = j.at("query_count").get<std::size_t>();
    report.recall_excluded = j.at("recall_excluded").get<std::size_t>();
    if (j.contains("normalized_steps")) report.normalized_steps = j["normalized_steps"].get<double>();
    if (j.contains("normalized_time")) report.normalized_time = j["normalized_time"].get<double>();
    for (const auto& row : j.at("per_query")) {
        PerQueryEval p;
        p.query_id = row.at("query_id").get<std::string>();
        p.em = row.at("em").get<int>();
        p.f1 = row.at("f1").get<double>();
        p.acc = row.at("acc").get<int>();
        p.context_size = row.at("context_size").get<std::size_t>();
        p.llm_calls = row.at("llm_calls").get<std::uint64_t>();
        p.wall_time_ms = row.at("wall_time_ms").get<double>();
        if (row.contains("recall")) p.recall = row["recall"].get<double>();
        report.per_query.push_back(std::move(p));
    }
    return report;
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    auto row = [&](const char* name, double value) {
        out << std::left << std::setw(18) << name << std::right << std::setw(10) << value << "\n";
    };
    row("EM", report.em);
    row("F1", report.f1);
    row("Acc", report.acc);
    row("Recall rate", report.recall_rate);
    row("Actual numbers", report.actual_numbers);
    row("Step", report.steps);
    row("Time (ms)", report.time_per_query_ms);
    if (report.normalized_steps) row("Step (vs base)", *report.normalized_steps);
    if (report.normalized_time) row("Time (vs base)", *report.normalized_time);
    out << std::left << std::setw(18) << "Queries" << std::right << std::setw(10)
        << report.query_count << "\n";
    if (report.recall_excluded > 0) {
        out << std::left << std::setw(18) << "Recall excluded" << std::right << std::setw(10)
            << report.recall_excluded << "\n";
    }
    return out.str();
}

}  // namespace drrag
