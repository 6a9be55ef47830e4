#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drrag/corpus.hpp"

namespace drrag {

/// One entry of a ranked result list. Scores are non-increasing by rank,
/// ties broken by ascending doc_id; ranks are contiguous from 1.
struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
    int rank = 0;
};

struct EmbeddingVector {
    std::vector<double> values;
    double norm = 0.0;  // cached Euclidean norm
};

EmbeddingVector make_embedding(std::vector<double> values);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string id() const = 0;
};

/// Reference embedder: each token is hashed (FNV-1a) into one of `dimension`
/// buckets, counts accumulated, then L2-normalized unless all-zero.
/// Deterministic and hermetic; external embedders may replace it behind the
/// Embedder interface.
class HashedBowEmbedder final : public Embedder {
public:
    explicit HashedBowEmbedder(std::size_t dimension = kDefaultDimension);
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dimension() const override { return dim_; }
    std::string id() const override;

    static constexpr std::size_t kDefaultDimension = 256;

private:
    std::size_t dim_;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 over a corpus. Postings accelerate candidate generation;
/// scoring walks the query tokens in order so results are bit-identical to a
/// linear-scan reference.
class Bm25Index {
public:
    explicit Bm25Index(std::shared_ptr<const CorpusHandle> corpus, Bm25Params params = {});

    /// Serialized-state constructor used by the on-disk index loader.
    Bm25Index(std::shared_ptr<const CorpusHandle> corpus, Bm25Params params,
              std::vector<std::size_t> doc_lengths,
              std::unordered_map<std::string, std::vector<std::pair<std::size_t, int>>> postings);

    /// Sum over query tokens of idf(t) * tf saturation. Duplicate query
    /// tokens contribute once per occurrence. Throws DataError on unknown
    /// doc_id.
    double score(const std::vector<std::string>& query_tokens, const std::string& doc_id) const;

    /// Top-k by BM25; documents scoring 0 are excluded before truncation.
    std::vector<ScoredDoc> retrieve(const std::string& query_text, std::size_t k) const;

    const Bm25Params& params() const { return params_; }
    const std::vector<std::size_t>& doc_lengths() const { return doc_lengths_; }
    const std::unordered_map<std::string, std::vector<std::pair<std::size_t, int>>>& postings()
        const {
        return postings_;
    }
    double avg_doc_length() const { return avgdl_; }

private:
    double idf(const std::string& term) const;
    double score_doc_index(const std::vector<std::string>& query_tokens, std::size_t index) const;

    std::shared_ptr<const CorpusHandle> corpus_;
    Bm25Params params_;
    std::vector<std::size_t> doc_lengths_;
    // term -> [(doc index, term frequency)], doc indexes ascending
    std::unordered_map<std::string, std::vector<std::pair<std::size_t, int>>> postings_;
    std::unordered_map<std::string, std::size_t> doc_index_;
    double avgdl_ = 0.0;
};

/// Dense vector index over document payload embeddings. Exhaustive cosine
/// scoring; immutable after build and safe for concurrent queries.
class VectorIndex {
public:
    /// Embeds every document payload with `embedder`. Entries of `overrides`
    /// (e.g. a precomputed sidecar) replace the reference embedding for their
    /// doc_id; queries always go through `embedder`, whose dimension must
    /// match.
    VectorIndex(std::shared_ptr<const CorpusHandle> corpus,
                std::shared_ptr<const Embedder> embedder,
                std::unordered_map<std::string, EmbeddingVector> overrides = {});

    /// Top-k by cosine between the embedded query and stored vectors.
    /// Zero-score documents are retained: cosine 0 still ranks.
    std::vector<ScoredDoc> retrieve(const std::string& query_text, std::size_t k) const;

    const EmbeddingVector& document_vector(const std::string& doc_id) const;
    const Embedder& embedder() const { return *embedder_; }
    std::size_t dimension() const { return embedder_->dimension(); }

private:
    std::shared_ptr<const CorpusHandle> corpus_;
    std::shared_ptr<const Embedder> embedder_;
    std::vector<EmbeddingVector> vectors_;  // parallel to corpus documents
};

/// Second-stage query: query text, document title (when present), and
/// document text joined by single newlines.
std::string concat_query(const std::string& query_text, const Document& doc);

/// Sorts (score desc, doc_id asc), truncates to k, assigns 1-based ranks.
std::vector<ScoredDoc> rank_and_truncate(std::vector<ScoredDoc> scored, std::size_t k);

/// Everything one pipeline run needs to retrieve with.
struct SearchIndex {
    std::shared_ptr<const CorpusHandle> corpus;
    std::shared_ptr<const Bm25Index> bm25;
    std::shared_ptr<const VectorIndex> vectors;
};

SearchIndex build_search_index(std::shared_ptr<const CorpusHandle> corpus,
                               std::shared_ptr<const Embedder> embedder = nullptr,
                               std::unordered_map<std::string, EmbeddingVector> overrides = {});

}  // namespace drrag
