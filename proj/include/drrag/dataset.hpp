#pragma once

#include <string>
#include <vector>

namespace drrag {

/// One QA instance: the question, its gold answers, the ids of the
/// documents needed to answer it, and an optional distractor pool.
struct QueryRecord {
    std::string query_id;
    std::string text;
    std::vector<std::string> gold_answers;
    std::vector<std::string> gold_doc_ids;
    std::vector<std::string> candidates;  // distractor doc_ids, may be empty
};

/// Reads a dataset from JSONL: {"query_id", "question", "answers": [..],
/// "gold_doc_ids": [..], "candidates": [..]?}. Duplicate query_id or an
/// empty answers list is an error.
std::vector<QueryRecord> load_dataset(const std::string& path);

}  // namespace drrag
