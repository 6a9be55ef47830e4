#include "drrag/retrievers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "drrag/errors.hpp"
#include "drrag/util.hpp"

namespace drrag {

EmbeddingVector make_embedding(std::vector<double> values) {
    EmbeddingVector v{std::move(values), 0.0};
    double sq = 0.0;
    for (double x : v.values) sq += x * x;
    v.norm = std::sqrt(sq);
    return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
    double dot = 0.0;
    std::size_t n = std::min(a.values.size(), b.values.size());
    for (std::size_t i = 0; i < n; ++i) dot += a.values[i] * b.values[i];
    return dot / (a.norm * b.norm);
}

HashedBowEmbedder::HashedBowEmbedder(std::size_t dimension) : dim_(dimension) {}

EmbeddingVector HashedBowEmbedder::embed(std::string_view text) const {
    std::vector<double> values(dim_, 0.0);
    for (const std::string& token : tokenize(text)) {
        values[fnv1a64(token) % dim_] += 1.0;
    }
    EmbeddingVector counts = make_embedding(std::move(values));
    if (counts.norm == 0.0) return counts;
    for (double& x : counts.values) x /= counts.norm;
    // Re-derive the cached norm from the stored values so a vector
    // reconstructed from its serialized values is bit-identical.
    return make_embedding(std::move(counts.values));
}

std::string HashedBowEmbedder::id() const {
    return "hashed-bow-fnv1a-" + std::to_string(dim_);
}

std::vector<ScoredDoc> rank_and_truncate(std::vector<ScoredDoc> scored, std::size_t k) {
    std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (scored.size() > k) scored.resize(k);
    for (std::size_t i = 0; i < scored.size(); ++i) {
        scored[i].rank = static_cast<int>(i) + 1;
    }
    return scored;
}

// ---------------------------------------------------------------------------
// Bm25Index

Bm25Index::Bm25Index(std::shared_ptr<const CorpusHandle> corpus, Bm25Params params)
    : corpus_(std::move(corpus)), params_(params) {
    const auto& docs = corpus_->documents();
    doc_lengths_.resize(docs.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto tokens = tokenize(document_payload(docs[i]));
        doc_lengths_[i] = tokens.size();
        total += tokens.size();
        std::unordered_map<std::string, int> counts;
        for (auto& t : tokens) counts[t]++;
        for (auto& [term, tf] : counts) {
            postings_[term].emplace_back(i, tf);
        }
        doc_index_.emplace(docs[i].doc_id, i);
    }
    for (auto& [term, plist] : postings_) {
        std::sort(plist.begin(), plist.end());
    }
    avgdl_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
}

Bm25Index::Bm25Index(
    std::shared_ptr<const CorpusHandle> corpus, Bm25Params params,
    std::vector<std::size_t> doc_lengths,
    std::unordered_map<std::string, std::vector<std::pair<std::size_t, int>>> postings)
    : corpus_(std::move(corpus)),
      params_(params),
      doc_lengths_(std::move(doc_lengths)),
      postings_(std::move(postings)) {
    if (doc_lengths_.size() != corpus_->size()) {
        throw DataError("BM25 state does not match corpus size");
    }
    std::size_t total = 0;
    for (std::size_t i = 0; i < corpus_->size(); ++i) {
        doc_index_.emplace(corpus_->documents()[i].doc_id, i);
        total += doc_lengths_[i];
    }
    avgdl_ = doc_lengths_.empty() ? 0.0
                                  : static_cast<double>(total) /
                                        static_cast<double>(doc_lengths_.size());
}

double Bm25Index::idf(const std::string& term) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return 0.0;
    double n = static_cast<double>(corpus_->size());
    double df = static_cast<double>(it->second.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score_doc_index(const std::vector<std::string>& query_tokens,
                                  std::size_t index) const {
    double dl = static_cast<double>(doc_lengths_[index]);
    double len_norm = avgdl_ > 0.0 ? 1.0 - params_.b + params_.b * dl / avgdl_ : 1.0;
    double total = 0.0;
    for (const std::string& token : query_tokens) {
        auto it = postings_.find(token);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        auto pit = std::lower_bound(plist.begin(), plist.end(),
                                    std::make_pair(index, 0));
        if (pit == plist.end() || pit->first != index) continue;
        double tf = static_cast<double>(pit->second);
        total += idf(token) * tf * (params_.k1 + 1.0) / (tf + params_.k1 * len_norm);
    }
    return total;
}

double Bm25Index::score(const std::vector<std::string>& query_tokens,
                        const std::string& doc_id) const {
    auto it = doc_index_.find(doc_id);
    if (it == doc_index_.end()) {
        throw DataError("unknown doc_id \"" + doc_id + "\"");
    }
    return score_doc_index(query_tokens, it->second);
}

std::vector<ScoredDoc> Bm25Index::retrieve(const std::string& query_text, std::size_t k) const {
    auto query_tokens = tokenize(query_text);
    std::set<std::size_t> candidates;
    for (const std::string& token : query_tokens) {
        auto it = postings_.find(token);
        if (it == postings_.end()) continue;
        for (const auto& [doc, tf] : it->second) candidates.insert(doc);
    }
    std::vector<ScoredDoc> scored;
    scored.reserve(candidates.size());
    for (std::size_t doc : candidates) {
        double s = score_doc_index(query_tokens, doc);
        if (s > 0.0) {
            scored.push_back({corpus_->documents()[doc].doc_id, s, 0});
        }
    }
    return rank_and_truncate(std::move(scored), k);
}

// ---------------------------------------------------------------------------
// VectorIndex

VectorIndex::VectorIndex(std::shared_ptr<const CorpusHandle> corpus,
                         std::shared_ptr<const Embedder> embedder,
                         std::unordered_map<std::string, EmbeddingVector> overrides)
    : corpus_(std::move(corpus)), embedder_(std::move(embedder)) {
    for (const auto& [doc_id, vec] : overrides) {
        if (!corpus_->contains(doc_id)) {
            throw DataError("embedding sidecar names unknown doc_id \"" + doc_id + "\"");
        }
        if (vec.values.size() != embedder_->dimension()) {
            throw DataError("embedding dimension mismatch for doc_id \"" + doc_id + "\": sidecar " +
                            std::to_string(vec.values.size()) + " vs embedder " +
                            std::to_string(embedder_->dimension()));
        }
    }
    vectors_.reserve(corpus_->size());
    for (const Document& doc : corpus_->documents()) {
        auto it = overrides.find(doc.doc_id);
        if (it != overrides.end()) {
            vectors_.push_back(it->second);
        } else {
            vectors_.push_back(embedder_->embed(document_payload(doc)));
        }
    }
}

std::vector<ScoredDoc> VectorIndex::retrieve(const std::string& query_text,
                                             std::size_t k) const {
    EmbeddingVector q = embedder_->embed(query_text);
    std::vector<ScoredDoc> scored;
    scored.reserve(corpus_->size());
    for (std::size_t i = 0; i < corpus_->size(); ++i) {
        scored.push_back({corpus_->documents()[i].doc_id, cosine(q, vectors_[i]), 0});
    }
    return rank_and_truncate(std::move(scored), k);
}

const EmbeddingVector& VectorIndex::document_vector(const std::string& doc_id) const {
    const Document* doc = corpus_->find(doc_id);
    if (!doc) {
        throw DataError("unknown doc_id \"" + doc_id + "\"");
    }
    return vectors_[static_cast<std::size_t>(doc - corpus_->documents().data())];
}

std::string concat_query(const std::string& query_text, const Document& doc) {
    return query_text + "\n" + document_payload(doc);
}

SearchIndex build_search_index(std::shared_ptr<const CorpusHandle> corpus,
                               std::shared_ptr<const Embedder> embedder,
                               std::unordered_map<std::string, EmbeddingVector> overrides) {
    if (!embedder) embedder = std::make_shared<HashedBowEmbedder>();
    SearchIndex index;
    index.corpus = corpus;
    index.bm25 = std::make_shared<Bm25Index>(corpus);
    index.vectors = std::make_shared<VectorIndex>(corpus, embedder, std::move(overrides));
    return index;
}

}  // namespace drrag
