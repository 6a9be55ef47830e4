#include "drrag/index_store.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "drrag/errors.hpp"
#include "drrag/jsonl.hpp"
#include "drrag/util.hpp"

namespace fs = std::filesystem;

namespace drrag {

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kDocumentsFile = "documents.jsonl";
constexpr const char* kBm25File = "bm25.json";
constexpr const char* kVectorsFile = "vectors.jsonl";

nlohmann::json manifest_json(const IndexManifest& m) {
    return nlohmann::json{{"corpus_sha256", m.corpus_sha256},
                          {"embeddings_sha256", m.embeddings_sha256},
                          {"embedder_id", m.embedder_id},
                          {"dimension", m.dimension},
                          {"doc_count", m.doc_count}};
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
}

}  // namespace

std::unordered_map<std::string, EmbeddingVector> load_embedding_sidecar(const std::string& path) {
    std::unordered_map<std::string, EmbeddingVector> vectors;
    std::size_t dimension = 0;
    for_each_jsonl_file(path, [&](std::size_t line, const nlohmann::json& record) {
        std::string doc_id = jsonl_string(record, "doc_id", path, line);
        auto it = record.find("vector");
        if (it == record.end() || !it->is_array()) {
            throw DataError(path + ":" + std::to_string(line) + ": missing \"vector\" array");
        }
        std::vector<double> values;
        values.reserve(it->size());
        for (const auto& v : *it) {
            if (!v.is_number()) {
                throw DataError(path + ":" + std::to_string(line) + ": non-numeric vector entry");
            }
            values.push_back(v.get<double>());
        }
        if (dimension == 0) {
            dimension = values.size();
        } else if (values.size() != dimension) {
            throw DataError(path + ":" + std::to_string(line) +
                            ": inconsistent sidecar dimension (" + std::to_string(values.size()) +
                            " vs " + std::to_string(dimension) + ")");
        }
        if (!vectors.emplace(doc_id, make_embedding(std::move(values))).second) {
            throw DataError(path + ":" + std::to_string(line) + ": duplicate doc_id \"" + doc_id +
                            "\" in sidecar");
        }
    });
    return vectors;
}

IngestResult write_index(const std::string& corpus_path, const std::string& index_dir,
                         const std::optional<std::string>& embeddings_path,
                         const Embedder& embedder) {
    IndexManifest manifest;
    manifest.corpus_sha256 = sha256_file(corpus_path);
    manifest.embeddings_sha256 = embeddings_path ? sha256_file(*embeddings_path) : "";
    manifest.embedder_id = embedder.id();
    manifest.dimension = embedder.dimension();

    fs::path dir(index_dir);
    fs::path manifest_path = dir / kManifestFile;
    if (fs::exists(manifest_path)) {
        try {
            IndexManifest existing = read_manifest(index_dir);
            if (existing.corpus_sha256 == manifest.corpus_sha256 &&
                existing.embeddings_sha256 == manifest.embeddings_sha256 &&
                existing.embedder_id == manifest.embedder_id &&
                existing.dimension == manifest.dimension) {
                return {true, existing};
            }
        } catch (const DataError&) {
            // Unreadable manifest: rebuild below.
        }
    }

    auto corpus = std::make_shared<CorpusHandle>(ingest_corpus(corpus_path));
    manifest.doc_count = corpus->size();

    std::unordered_map<std::string, EmbeddingVector> overrides;
    if (embeddings_path) {
        overrides = load_embedding_sidecar(*embeddings_path);
        for (const auto& [doc_id, vec] : overrides) {
            if (vec.values.size() != embedder.dimension()) {
                throw DataError("sidecar dimension " + std::to_string(vec.values.size()) +
                                " does not match embedder dimension " +
                                std::to_string(embedder.dimension()));
            }
            if (!corpus->contains(doc_id)) {
                throw DataError("embedding sidecar names unknown doc_id \"" + doc_id + "\"");
            }
        }
    }

    Bm25Index bm25(corpus);
    fs::create_directories(dir);

    // documents.jsonl: the ingested corpus, re-emitted verbatim.
    {
        std::ofstream out(dir / kDocumentsFile, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + (dir / kDocumentsFile).string());
        for (const Document& doc : corpus->documents()) {
            nlohmann::json j{{"doc_id", doc.doc_id}, {"title", doc.title}, {"text", doc.text}};
            out << j.dump() << "\n";
        }
    }

    // bm25.json: inverted index state keyed by document position.
    {
        nlohmann::json postings = nlohmann::json::object();
        for (const auto& [term, plist] : bm25.postings()) {
            nlohmann::json entries = nlohmann::json::array();
            for (const auto& [doc, tf] : plist) {
                entries.push_back(nlohmann::json::array({doc, tf}));
            }
            postings[term] = std::move(entries);
        }
        nlohmann::json j{{"k1", bm25.params().k1},
                         {"b", bm25.params().b},
                         {"doc_lengths", bm25.doc_lengths()},
                         {"postings", std::move(postings)}};
        write_text_file(dir / kBm25File, j.dump());
    }

    // vectors.jsonl: one embedding per document, sidecar overrides applied.
    {
        std::ofstream out(dir / kVectorsFile, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + (dir / kVectorsFile).string());
        for (const Document& doc : corpus->documents()) {
            auto it = overrides.find(doc.doc_id);
            EmbeddingVector vec = it != overrides.end()
                                      ? it->second
                                      : embedder.embed(document_payload(doc));
            nlohmann::json j{{"doc_id", doc.doc_id}, {"vector", vec.values}};
            out << j.dump() << "\n";
        }
    }

    write_text_file(manifest_path, manifest_json(manifest).dump(2) + "\n");
    return {false, manifest};
}

IndexManifest read_manifest(const std::string& index_dir) {
    fs::path path = fs::path(index_dir) / kManifestFile;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open index manifest: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw DataError("malformed index manifest: " + path.string());
    }
    IndexManifest m;
    m.corpus_sha256 = j.value("corpus_sha256", "");
    m.embeddings_sha256 = j.value("embeddings_sha256", "");
    m.embedder_id = j.value("embedder_id", "");
    m.dimension = j.value("dimension", std::size_t{0});
    m.doc_count = j.value("doc_count", std::size_t{0});
    return m;
}

SearchIndex load_index(const std::string& index_dir) {
    fs::path dir(index_dir);
    IndexManifest manifest = read_manifest(index_dir);

    auto corpus = std::make_shared<CorpusHandle>(ingest_corpus((dir / kDocumentsFile).string()));

    // BM25 from stored state.
    std::ifstream bm25_in(dir / kBm25File, std::ios::binary);
    if (!bm25_in) throw DataError("cannot open " + (dir / kBm25File).string());
    nlohmann::json bj = nlohmann::json::parse(bm25_in, nullptr, false);
    if (bj.is_discarded() || !bj.is_object()) {
        throw DataError("malformed BM25 index: " + (dir / kBm25File).string());
    }
    Bm25Params params{bj.value("k1", 1.2), bj.value("b", 0.75)};
    std::vector<std::size_t> doc_lengths = bj.at("doc_lengths").get<std::vector<std::size_t>>();
    std::unordered_map<std::string, std::vector<std::pair<std::size_t, int>>> postings;
    for (const auto& [term, entries] : bj.at("postings").items()) {
        std::vector<std::pair<std::size_t, int>> plist;
        for (const auto& e : entries) {
            plist.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<int>());
        }
        postings.emplace(term, std::move(plist));
    }

    // Vector index from stored embeddings; queries go through the manifest's
    // embedder.
    if (manifest.embedder_id != HashedBowEmbedder(manifest.dimension).id()) {
        throw DataError("index was built with embedder \"" + manifest.embedder_id +
                        "\", which this build cannot reconstruct for queries");
    }
    auto embedder = std::make_shared<HashedBowEmbedder>(manifest.dimension);
    auto overrides = load_embedding_sidecar((dir / kVectorsFile).string());

    SearchIndex index;
    index.corpus = corpus;
    index.bm25 = std::make_shared<Bm25Index>(corpus, params, std::move(doc_lengths),
                                             std::move(postings));
    index.vectors = std::make_shared<VectorIndex>(corpus, embedder, std::move(overrides));
    return index;
}

}  // namespace drrag
