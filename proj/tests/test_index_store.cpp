#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "drrag/errors.hpp"
#include "drrag/index_store.hpp"
#include "drrag/synth.hpp"
#include "test_support.hpp"

using namespace drrag;
using drrag::test::TempDir;

namespace {

std::string small_corpus_jsonl() {
    nlohmann::json d1{{"doc_id", "d1"}, {"title", ""}, {"text", "alpha beta gamma"}};
    nlohmann::json d2{{"doc_id", "d2"}, {"title", "T"}, {"text", "delta epsilon"}};
    nlohmann::json d3{{"doc_id", "d3"}, {"title", ""}, {"text", "alpha zeta"}};
    return d1.dump() + "\n" + d2.dump() + "\n" + d3.dump() + "\n";
}

}  // namespace

TEST_CASE("write_index then load_index round-trips retrieval behavior") {
    TempDir tmp("idx");
    std::string corpus_path = tmp.write("c.jsonl", small_corpus_jsonl());
    HashedBowEmbedder embedder;

    IngestResult first = write_index(corpus_path, tmp.file("idx"), std::nullopt, embedder);
    CHECK_FALSE(first.up_to_date);
    CHECK(first.manifest.doc_count == 3);
    CHECK(first.manifest.dimension == 256);

    SUBCASE("re-ingesting unchanged inputs is a no-op") {
        auto mtime_before =
            std::filesystem::last_write_time(tmp.dir() / "idx" / "documents.jsonl");
        IngestResult again = write_index(corpus_path, tmp.file("idx"), std::nullopt, embedder);
        CHECK(again.up_to_date);
        CHECK(std::filesystem::last_write_time(tmp.dir() / "idx" / "documents.jsonl") ==
              mtime_before);
    }

    SUBCASE("loaded index answers like a fresh one") {
        SearchIndex loaded = load_index(tmp.file("idx"));
        auto fresh_corpus = std::make_shared<CorpusHandle>(ingest_corpus(corpus_path));
        SearchIndex fresh = build_search_index(fresh_corpus);

        for (const std::string query : {"alpha", "delta epsilon", "zeta alpha beta"}) {
            auto a = loaded.bm25->retrieve(query, 3);
            auto b = fresh.bm25->retrieve(query, 3);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].doc_id == b[i].doc_id);
                CHECK(a[i].score == b[i].score);
            }
            auto va = loaded.vectors->retrieve(query, 3);
            auto vb = fresh.vectors->retrieve(query, 3);
            for (std::size_t i = 0; i < va.size(); ++i) {
                CHECK(va[i].doc_id == vb[i].doc_id);
                CHECK(va[i].score == vb[i].score);
            }
        }
    }

    SUBCASE("changing the corpus rebuilds") {
        tmp.write("c.jsonl", small_corpus_jsonl() +
                                 R"({"doc_id":"d4","title":"","text":"omega"})"
                                 "\n");
        IngestResult rebuilt = write_index(corpus_path, tmp.file("idx"), std::nullopt, embedder);
        CHECK_FALSE(rebuilt.up_to_date);
        CHECK(rebuilt.manifest.doc_count == 4);
    }
}

TEST_CASE("embedding sidecar flows into the stored vector index") {
    TempDir tmp("idx_sidecar");
    std::string corpus_path = tmp.write("c.jsonl", small_corpus_jsonl());

    std::vector<double> spike(256, 0.0);
    spike[7] = 1.0;
    nlohmann::json row{{"doc_id", "d2"}, {"vector", spike}};
    std::string sidecar = tmp.write("emb.jsonl", row.dump() + "\n");

    HashedBowEmbedder embedder;
    write_index(corpus_path, tmp.file("idx"), sidecar, embedder);
    SearchIndex loaded = load_index(tmp.file("idx"));
    CHECK(loaded.vectors->document_vector("d2").values[7] == 1.0);
    CHECK(loaded.vectors->document_vector("d1").values ==
          embedder.embed("alpha beta gamma").values);

    SUBCASE("dimension mismatch is rejected") {
        nlohmann::json bad{{"doc_id", "d1"}, {"vector", std::vector<double>(128, 0.5)}};
        std::string bad_sidecar = tmp.write("bad.jsonl", bad.dump() + "\n");
        CHECK_THROWS_WITH_AS(
            write_index(corpus_path, tmp.file("idx2"), bad_sidecar, embedder),
            doctest::Contains("dimension"), DataError);
    }
    SUBCASE("mixed dimensions within the sidecar are rejected") {
        nlohmann::json a{{"doc_id", "d1"}, {"vector", std::vector<double>(256, 0.5)}};
        nlohmann::json b{{"doc_id", "d2"}, {"vector", std::vector<double>(100, 0.5)}};
        std::string bad_sidecar = tmp.write("mixed.jsonl", a.dump() + "\n" + b.dump() + "\n");
        CHECK_THROWS_AS(load_embedding_sidecar(bad_sidecar), DataError);
    }
    SUBCASE("unknown doc_id in the sidecar is rejected") {
        nlohmann::json ghost{{"doc_id", "ghost"}, {"vector", std::vector<double>(256, 0.5)}};
        std::string bad_sidecar = tmp.write("ghost.jsonl", ghost.dump() + "\n");
        CHECK_THROWS_AS(write_index(corpus_path, tmp.file("idx3"), bad_sidecar, embedder),
                        DataError);
    }
}

TEST_CASE("load_index on a synthetic corpus preserves pipeline behavior") {
    TempDir tmp("idx_synth");
    SynthSpec spec;
    spec.num_queries = 5;
    spec.distractors_per_query = 2;
    spec.seed = 11;
    SynthData data = generate(spec);
    write_corpus_jsonl(data.corpus, tmp.file("c.jsonl"));

    HashedBowEmbedder embedder;
    write_index(tmp.file("c.jsonl"), tmp.file("idx"), std::nullopt, embedder);
    SearchIndex loaded = load_index(tmp.file("idx"));

    auto fresh = build_search_index(std::make_shared<CorpusHandle>(data.corpus));
    for (const QueryRecord& q : data.dataset) {
        auto a = loaded.vectors->retrieve(q.text, 4);
        auto b = fresh.vectors->retrieve(q.text, 4);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].doc_id == b[i].doc_id);
    }
}
