#pragma once

#include <optional>
#include <string>

#include "drrag/retrievers.hpp"

namespace drrag {

struct IndexManifest {
    std::string corpus_sha256;
    std::string embeddings_sha256;  // empty when no sidecar was supplied
    std::string embedder_id;
    std::size_t dimension = 0;
    std::size_t doc_count = 0;
};

struct IngestResult {
    bool up_to_date = false;  // inputs unchanged, nothing rewritten
    IndexManifest manifest;
};

/// Loads sidecar embeddings: JSONL of {"doc_id", "vector": [..]}. All
/// vectors must share one dimension.
std::unordered_map<std::string, EmbeddingVector> load_embedding_sidecar(const std::string& path);

/// Builds the on-disk index: documents.jsonl, bm25.json, vectors.jsonl, and
/// manifest.json under index_dir. When the manifest already matches the
/// input hashes and embedder, nothing is written.
IngestResult write_index(const std::string& corpus_path, const std::string& index_dir,
                         const std::optional<std::string>& embeddings_path,
                         const Embedder& embedder);

/// Reconstructs a ready-to-query SearchIndex from an index directory.
/// Document vectors come from the stored vector index, so sidecar-supplied
/// embeddings survive the round trip; queries use the manifest's embedder.
SearchIndex load_index(const std::string& index_dir);

IndexManifest read_manifest(const std::string& index_dir);

}  // namespace drrag
