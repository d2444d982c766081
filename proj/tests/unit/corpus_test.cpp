#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "ipeval/corpus.hpp"
#include "ipeval/text.hpp"
#include "test_support.hpp"

using namespace ipeval;

namespace {

std::string manifest_line(const std::string& doc_id, const std::string& path) {
  return "{\"doc_id\": \"" + doc_id + "\", \"path\": \"" + path + "\"}\n";
}

Document make_doc(const std::string& id, std::string text) {
  Document d;
  d.doc_id = id;
  d.source_path = "memory:" + id;
  d.text = std::move(text);
  return d;
}

std::string words_doc(size_t n, ipeval::DeterministicRng& rng) {
  std::string text;
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) {
      // vary the separators so slicing has to preserve them
      switch (rng.below(4)) {
        case 0: text += ' '; break;
        case 1: text += "  "; break;
        case 2: text += '\n'; break;
        default: text += " \t"; break;
      }
    }
    text += "w" + std::to_string(i);
  }
  return text;
}

}  // namespace

TEST_CASE("load_corpus loads good rows and itemizes bad ones") {
  testing::TempDir tmp;
  tmp.file("a.txt", "Alpha document text here.\n");
  tmp.file("b.txt", "   \n\t  ");  // whitespace only
  std::string manifest = manifest_line("doc-a", "a.txt") +
                         manifest_line("doc-b", "b.txt") +
                         manifest_line("doc-c", "missing.txt") +
                         manifest_line("doc-a", "a.txt") +
                         "{\"path\": \"a.txt\"}\n";
  auto manifest_path = tmp.file("manifest.jsonl", manifest);

  auto result = load_corpus(manifest_path);
  REQUIRE(result.documents.size() == 1);
  CHECK(result.documents[0].doc_id == "doc-a");
  CHECK(result.documents[0].text == "Alpha document text here.\n");

  REQUIRE(result.errors.size() == 4);
  CHECK(result.errors[0].doc_id == "doc-b");
  CHECK(result.errors[0].message == "empty document");
  CHECK(result.errors[1].doc_id == "doc-c");
  CHECK(result.errors[1].message.find("missing.txt") != std::string::npos);
  CHECK(result.errors[2].message == "duplicate doc_id");
  CHECK(result.errors[3].message == "manifest row needs doc_id and path");
}

TEST_CASE("load_corpus reads titles and the synthetic flag") {
  testing::TempDir tmp;
  tmp.file("a.txt", "some words\n");
  auto manifest_path = tmp.file(
      "manifest.jsonl",
      "{\"doc_id\": \"d\", \"path\": \"a.txt\", \"title\": \"T\", \"synthetic\": true}\n");
  auto result = load_corpus(manifest_path);
  REQUIRE(result.documents.size() == 1);
  CHECK(result.documents[0].title == "T");
  CHECK(result.documents[0].synthetic);
}

TEST_CASE("chunk_document splits on exact word counts") {
  DeterministicRng rng(11);
  auto doc = make_doc("d", words_doc(4500, rng));
  auto chunks = chunk_document(doc, 2000);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].word_count == 2000);
  CHECK(chunks[1].word_count == 2000);
  CHECK(chunks[2].word_count == 500);
  CHECK(chunks[0].chunk_id == "d:c0");
  CHECK(chunks[2].chunk_id == "d:c2");
  CHECK(chunks[2].ordinal == 2);
  for (const auto& c : chunks) CHECK(count_words(c.text) == c.word_count);
}

TEST_CASE("chunk_document edge sizes") {
  DeterministicRng rng(12);
  auto exact = make_doc("d", words_doc(2000, rng));
  CHECK(chunk_document(exact, 2000).size() == 1);

  auto tiny = make_doc("d", "word");
  auto chunks = chunk_document(tiny, 2000);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].word_count == 1);
  CHECK(chunks[0].text == "word");

  CHECK_THROWS_AS(chunk_document(tiny, 0), std::invalid_argument);
}

TEST_CASE("chunking is a lossless partition of the token sequence") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    DeterministicRng rng(seed);
    size_t n = 1 + rng.below(300);
    size_t chunk_words = 1 + rng.below(40);
    auto doc = make_doc("d", words_doc(n, rng));
    auto chunks = chunk_document(doc, chunk_words);

    std::vector<std::string> rejoined;
    for (size_t i = 0; i < chunks.size(); ++i) {
      auto toks = whitespace_tokens(chunks[i].text);
      CHECK(toks.size() == chunks[i].word_count);
      if (i + 1 < chunks.size()) CHECK(toks.size() == chunk_words);
      rejoined.insert(rejoined.end(), toks.begin(), toks.end());
    }
    CHECK(rejoined == whitespace_tokens(doc.text));
  }
}

TEST_CASE("chunking is deterministic") {
  DeterministicRng rng(33);
  auto doc = make_doc("d", words_doc(500, rng));
  CHECK(chunk_document(doc, 64) == chunk_document(doc, 64));
}

TEST_CASE("chunks round-trip through JSONL") {
  testing::TempDir tmp;
  DeterministicRng rng(5);
  auto doc = make_doc("d", words_doc(90, rng));
  auto chunks = chunk_document(doc, 40);
  auto path = tmp.path / "chunks.jsonl";
  write_chunks(path, chunks);
  CHECK(read_chunks(path) == chunks);
}
