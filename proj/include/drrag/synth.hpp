#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drrag/corpus.hpp"
#include "drrag/dataset.hpp"

namespace drrag {

/// Recipe for a synthetic two-hop benchmark. Generation is a pure function
/// of the spec.
struct SynthSpec {
    int num_queries = 100;
    int distractors_per_query = 3;
    int bridge_entity_pool = 0;  // 0 -> num_queries (each query owns its bridge)
    int vocab_size = 0;          // 0 -> full built-in word list
    std::uint64_t seed = 0;
};

struct SynthData {
    std::vector<Document> corpus;      // doc_id order
    std::vector<QueryRecord> dataset;  // query_id order
    /// Queries whose retrieval-margin checks could not be satisfied within
    /// the resampling budget. Zero at desk scale; may be positive for very
    /// large corpora, where token disjointness still holds but hash-bucket
    /// collisions in the reference embedder can perturb rankings.
    std::size_t margin_violations = 0;
};

/// Generates a corpus and query set with, per query: a static document
/// sharing the query's head-entity tokens, a dynamic document sharing a
/// bridge entity with the static one but zero tokens with the raw query,
/// and distractors sharing the relation word ("spouse") with the query but
/// not the bridge. Gold documents are {static, dynamic}; the gold answer is
/// a token unique to the dynamic document.
///
/// Beyond token disjointness (asserted for every instance), the generator
/// verifies against the reference embedder that the static document is the
/// top-1 hit for the raw query, that [static, dynamic] are the top-2 hits
/// for the concatenated query, and that the dynamic document stays out of
/// the raw query's top-2 — resampling entity tokens until the margins hold.
SynthData generate(const SynthSpec& spec);

void write_corpus_jsonl(const std::vector<Document>& corpus, const std::string& path);
void write_dataset_jsonl(const std::vector<QueryRecord>& dataset, const std::string& path);

}  // namespace drrag
