#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace drrag {

/// One unit of the knowledge base. Text is preserved byte-exactly from
/// ingestion: prompts quote documents verbatim.
struct Document {
    std::string doc_id;
    std::string title;  // may be empty
    std::string text;
};

/// Title and body as downstream consumers (second-stage queries, the
/// classifier, document embeddings) see a document. An empty title
/// contributes no extra blank line.
std::string document_payload(const Document& doc);

struct CorpusStats {
    std::size_t doc_count = 0;
    double mean_token_length = 0.0;  // mean tokens per document
};

/// Immutable after construction; safe to share across concurrent readers.
/// All derived indexes reference documents by doc_id only.
class CorpusHandle {
public:
    CorpusHandle() = default;
    explicit CorpusHandle(std::vector<Document> docs);

    const std::vector<Document>& documents() const { return docs_; }
    std::size_t size() const { return docs_.size(); }
    bool contains(const std::string& doc_id) const;

    /// Returns nullptr when doc_id is unknown.
    const Document* find(const std::string& doc_id) const;

    /// Throws DataError when doc_id is unknown.
    const Document& at(const std::string& doc_id) const;

    const CorpusStats& stats() const { return stats_; }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
    CorpusStats stats_;
};

/// Engine-wide tokenizer shared by BM25, the reference embedder, the
/// lexical classifier, and token-level answer metrics: lowercase, split on
/// non-alphanumeric runs, no empty tokens. ASCII letters are case-folded;
/// multi-byte UTF-8 sequences are kept intact and treated as word bytes.
std::vector<std::string> tokenize(std::string_view text);

/// Reads a corpus from JSONL ({"doc_id", "title", "text"}; unknown fields
/// ignored). Errors name the offending line: malformed record, duplicate
/// doc_id, empty text.
CorpusHandle ingest_corpus(const std::string& path);
CorpusHandle ingest_corpus_stream(std::istream& in, const std::string& origin);

}  // namespace drrag
