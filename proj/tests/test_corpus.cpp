#include <doctest.h>

#include <random>

#include <json.hpp>

#include "drrag/corpus.hpp"
#include "drrag/errors.hpp"
#include "drrag/util.hpp"
#include "test_support.hpp"

using namespace drrag;
using drrag::test::TempDir;

TEST_CASE("tokenize follows the engine-wide rule") {
    CHECK(tokenize("The Green performer!") == std::vector<std::string>{"the", "green", "performer"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("Peter Andreas Heiberg's son") ==
          std::vector<std::string>{"peter", "andreas", "heiberg", "s", "son"});
    CHECK(tokenize("a1-b2_c3") == std::vector<std::string>{"a1", "b2", "c3"});
}

TEST_CASE("tokenize keeps multi-byte UTF-8 sequences intact") {
    auto tokens = tokenize("caf\xc3\xa9 au lait");
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "caf\xc3\xa9");
}

TEST_CASE("tokenize is idempotent on its own joined output") {
    std::mt19937_64 rng(11);
    const std::string alphabet = "abc XYZ0,.'!-\n\t(9)";
    for (int round = 0; round < 200; ++round) {
        std::string s;
        std::size_t len = uniform_below(rng, 30);
        for (std::size_t i = 0; i < len; ++i) {
            s.push_back(alphabet[uniform_below(rng, alphabet.size())]);
        }
        auto once = tokenize(s);
        std::string joined;
        for (const auto& t : once) {
            if (!joined.empty()) joined.push_back(' ');
            joined += t;
        }
        CHECK(tokenize(joined) == once);
    }
}

TEST_CASE("ingest_corpus loads every record and computes stats") {
    TempDir tmp("corpus");
    std::string path = tmp.write("c.jsonl",
                                 R"({"doc_id":"d1","title":"A","text":"one two three"})"
                                 "\n"
                                 R"({"doc_id":"d2","title":"","text":"four"})"
                                 "\n"
                                 R"({"doc_id":"d3","text":"five six","extra":42})"
                                 "\n");
    CorpusHandle corpus = ingest_corpus(path);
    CHECK(corpus.size() == 3);
    CHECK(corpus.stats().doc_count == 3);
    CHECK(corpus.stats().mean_token_length == doctest::Approx(2.0));
    CHECK(corpus.at("d1").title == "A");
    CHECK(corpus.at("d3").text == "five six");  // unknown fields ignored
    CHECK(corpus.find("nope") == nullptr);
}

TEST_CASE("ingest round-trips every field byte-exactly") {
    TempDir tmp("corpus_rt");
    std::string text = "weird \\\" bytes\\n \xc3\xa9 \\u0001 end";
    nlohmann::json j{{"doc_id", "d1"}, {"title", "t \"quoted\""}, {"text", text}};
    std::string path = tmp.write("c.jsonl", j.dump() + "\n");
    CorpusHandle corpus = ingest_corpus(path);
    CHECK(corpus.at("d1").text == text);
    CHECK(corpus.at("d1").title == "t \"quoted\"");
}

TEST_CASE("corpus stats recomputed from the handle match the stored stats") {
    std::vector<Document> docs{{"a", "", "one two"}, {"b", "T", "three four five"}};
    CorpusHandle corpus(docs);
    double total = 0.0;
    for (const Document& d : corpus.documents()) {
        total += static_cast<double>(tokenize(d.text).size());
    }
    CHECK(corpus.stats().mean_token_length ==
          total / static_cast<double>(corpus.stats().doc_count));
}

TEST_CASE("ingest errors carry line numbers") {
    TempDir tmp("corpus_err");

    SUBCASE("missing file") {
        CHECK_THROWS_AS(ingest_corpus(tmp.file("absent.jsonl")), DataError);
    }
    SUBCASE("malformed line") {
        std::string path = tmp.write("bad.jsonl",
                                     R"({"doc_id":"d1","text":"ok"})"
                                     "\nnot json\n");
        CHECK_THROWS_WITH_AS(ingest_corpus(path), doctest::Contains(":2: malformed"), DataError);
    }
    SUBCASE("duplicate doc_id names the id and line") {
        std::string path = tmp.write("dup.jsonl",
                                     R"({"doc_id":"d1","text":"a"})"
                                     "\n"
                                     R"({"doc_id":"d2","text":"b"})"
                                     "\n"
                                     R"({"doc_id":"d3","text":"c"})"
                                     "\n"
                                     R"({"doc_id":"d1","text":"d"})"
                                     "\n");
        CHECK_THROWS_WITH_AS(ingest_corpus(path), doctest::Contains("duplicate doc_id \"d1\""),
                             DataError);
        CHECK_THROWS_WITH_AS(ingest_corpus(path), doctest::Contains(":4:"), DataError);
    }
    SUBCASE("empty text") {
        std::string path = tmp.write("empty.jsonl", R"({"doc_id":"d1","text":""})"
                                                    "\n");
        CHECK_THROWS_WITH_AS(ingest_corpus(path), doctest::Contains("empty text"), DataError);
    }
}

TEST_CASE("empty corpus is legal") {
    TempDir tmp("corpus_empty");
    CorpusHandle corpus = ingest_corpus(tmp.write("e.jsonl", ""));
    CHECK(corpus.size() == 0);
    CHECK(corpus.stats().mean_token_length == 0.0);
}

TEST_CASE("document_payload joins title and text with one newline") {
    CHECK(document_payload({"d", "T", "body"}) == "T\nbody");
    CHECK(document_payload({"d", "", "body"}) == "body");
}
