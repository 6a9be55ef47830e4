#include "drrag/jsonl.hpp"

#include <fstream>

#include "drrag/errors.hpp"

namespace drrag {

namespace {

bool is_blank(const std::string& line) {
    for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

void for_each_jsonl(std::istream& in, const std::string& origin,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": malformed JSONL record");
        }
        fn(line_no, record);
    }
}

void for_each_jsonl_file(const std::string& path,
                         const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path);
    }
    for_each_jsonl(in, path, fn);
}

std::string jsonl_string(const nlohmann::json& record, const char* key,
                         const std::string& origin, std::size_t line) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) {
        throw DataError(origin + ":" + std::to_string(line) + ": missing or non-string field \"" +
                        key + "\"");
    }
    return it->get<std::string>();
}

std::string jsonl_string_or(const nlohmann::json& record, const char* key,
                            const std::string& fallback) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) return fallback;
    return it->get<std::string>();
}

}  // namespace drrag
