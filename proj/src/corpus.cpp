#include "drrag/corpus.hpp"

#include <fstream>

#include "drrag/errors.hpp"
#include "drrag/jsonl.hpp"

namespace drrag {

std::string document_payload(const Document& doc) {
    if (doc.title.empty()) return doc.text;
    return doc.title + "\n" + doc.text;
}

CorpusHandle::CorpusHandle(std::vector<Document> docs) : docs_(std::move(docs)) {
    by_id_.reserve(docs_.size());
    std::size_t total_tokens = 0;
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        const Document& doc = docs_[i];
        if (doc.text.empty()) {
            throw DataError("document \"" + doc.doc_id + "\" has empty text");
        }
        if (!by_id_.emplace(doc.doc_id, i).second) {
            throw DataError("duplicate doc_id \"" + doc.doc_id + "\"");
        }
        total_tokens += tokenize(doc.text).size();
    }
    stats_.doc_count = docs_.size();
    stats_.mean_token_length =
        docs_.empty() ? 0.0 : static_cast<double>(total_tokens) / static_cast<double>(docs_.size());
}

bool CorpusHandle::contains(const std::string& doc_id) const {
    return by_id_.count(doc_id) > 0;
}

const Document* CorpusHandle::find(const std::string& doc_id) const {
    auto it = by_id_.find(doc_id);
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document& CorpusHandle::at(const std::string& doc_id) const {
    const Document* doc = find(doc_id);
    if (!doc) {
        throw DataError("unknown doc_id \"" + doc_id + "\"");
    }
    return *doc;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        bool word_byte = std::isalnum(c) || c >= 0x80;
        if (word_byte) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

CorpusHandle ingest_corpus_stream(std::istream& in, const std::string& origin) {
    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> first_line;  // doc_id -> line seen
    for_each_jsonl(in, origin, [&](std::size_t line, const nlohmann::json& record) {
        Document doc;
        doc.doc_id = jsonl_string(record, "doc_id", origin, line);
        doc.title = jsonl_string_or(record, "title", "");
        doc.text = jsonl_string(record, "text", origin, line);
        if (doc.text.empty()) {
            throw DataError(origin + ":" + std::to_string(line) + ": empty text for doc_id \"" +
                            doc.doc_id + "\"");
        }
        auto [it, inserted] = first_line.emplace(doc.doc_id, line);
        if (!inserted) {
            throw DataError(origin + ":" + std::to_string(line) + ": duplicate doc_id \"" +
                            doc.doc_id + "\" (first seen on line " + std::to_string(it->second) +
                            ")");
        }
        docs.push_back(std::move(doc));
    });
    return CorpusHandle(std::move(docs));
}

CorpusHandle ingest_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open corpus file: " + path);
    }
    return ingest_corpus_stream(in, path);
}

}  // namespace drrag
