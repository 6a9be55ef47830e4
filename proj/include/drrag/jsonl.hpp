#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <string>

#include <json.hpp>

namespace drrag {

/// Parses a JSONL stream, invoking fn(line_number, record) per non-blank
/// line. Line numbers are 1-based. Parse failures throw DataError naming
/// `origin` and the offending line.
void for_each_jsonl(std::istream& in, const std::string& origin,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn);

/// Same, reading from a file path. Throws DataError if the file is missing.
void for_each_jsonl_file(const std::string& path,
                         const std::function<void(std::size_t, const nlohmann::json&)>& fn);

/// Field accessors with line-level error context.
std::string jsonl_string(const nlohmann::json& record, const char* key,
                         const std::string& origin, std::size_t line);
std::string jsonl_string_or(const nlohmann::json& record, const char* key,
                            const std::string& fallback);

}  // namespace drrag
