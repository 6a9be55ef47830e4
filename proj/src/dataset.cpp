#include "drrag/dataset.hpp"

#include <unordered_set>

#include "drrag/errors.hpp"
#include "drrag/jsonl.hpp"

namespace drrag {

namespace {

std::vector<std::string> string_array(const nlohmann::json& record, const char* key,
                                      const std::string& origin, std::size_t line,
                                      bool required) {
    auto it = record.find(key);
    if (it == record.end()) {
        if (required) {
            throw DataError(origin + ":" + std::to_string(line) + ": missing field \"" + key +
                            "\"");
        }
        return {};
    }
    if (!it->is_array()) {
        throw DataError(origin + ":" + std::to_string(line) + ": field \"" + key +
                        "\" must be an array of strings");
    }
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw DataError(origin + ":" + std::to_string(line) + ": field \"" + key +
                            "\" must be an array of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

std::vector<QueryRecord> load_dataset(const std::string& path) {
    std::vector<QueryRecord> records;
    std::unordered_set<std::string> seen;
    for_each_jsonl_file(path, [&](std::size_t line, const nlohmann::json& record) {
        QueryRecord query;
        query.query_id = jsonl_string(record, "query_id", path, line);
        query.text = jsonl_string(record, "question", path, line);
        query.gold_answers = string_array(record, "answers", path, line, true);
        query.gold_doc_ids = string_array(record, "gold_doc_ids", path, line, false);
        query.candidates = string_array(record, "candidates", path, line, false);
        if (query.gold_answers.empty()) {
            throw DataError(path + ":" + std::to_string(line) + ": empty answers for query \"" +
                            query.query_id + "\"");
        }
        if (!seen.insert(query.query_id).second) {
            throw DataError(path + ":" + std::to_string(line) + ": duplicate query_id \"" +
                            query.query_id + "\"");
        }
        records.push_back(std::move(query));
    });
    return records;
}

}  // namespace drrag
