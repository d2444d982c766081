#include <doctest.h>

#include <memory>
#include <set>
#include <string>

#include "ipeval/baseline_synth.hpp"
#include "ipeval/providers.hpp"
#include "ipeval/text.hpp"
#include "test_support.hpp"

using namespace ipeval;

namespace {

const char* kPromptDir = IPEVAL_SOURCE_DIR "/resources/prompts/v1";

ProviderConfig mock_config() {
  ProviderConfig c;
  c.name = "mock";
  c.type = "mock";
  c.max_concurrency = 4;
  c.max_retries = 0;
  c.replay_path = "unused";
  return c;
}

CompletionRequest gen_request() {
  CompletionRequest r;
  r.model_id = "gen-model";
  r.max_tokens = 2048;
  return r;
}

}  // namespace

TEST_CASE("parse_subtopics reads the numbered list") {
  std::string raw =
      "1) Historical foundations\n"
      "2) Core methods\n"
      "3) Applications\n"
      "4) Open problems\n"
      "5) Future directions\n"
      "<end>";
  auto topic = parse_subtopics("Some topic", raw);
  CHECK(topic.topic == "Some topic");
  CHECK(topic.subtopics[0] == "Historical foundations");
  CHECK(topic.subtopics[4] == "Future directions");
}

TEST_CASE("parse_subtopics tolerates a missing terminator and inline end tag") {
  auto a = parse_subtopics("T", "1) one\n2) two\n3) three\n4) four\n5) five");
  CHECK(a.subtopics[4] == "five");

  auto b = parse_subtopics("T", "1) one\n2) two\n3) three\n4) four\n5) five <end>");
  CHECK(b.subtopics[4] == "five");
}

TEST_CASE("parse_subtopics rejects short or repeated lists") {
  try {
    parse_subtopics("T", "1) one\n2) two\n3) three");
    FAIL("expected SubtopicParseError");
  } catch (const SubtopicParseError& e) {
    CHECK(std::string(e.what()).find("expected 5 subtopics") != std::string::npos);
    CHECK(e.raw == "1) one\n2) two\n3) three");
  }

  CHECK_THROWS_AS(parse_subtopics("T", "1) same\n2) same\n3) a\n4) b\n5) c"),
                  SubtopicParseError);
}

TEST_CASE("generate_subtopics drives the prompt and parses the reply") {
  nlohmann::json replay = {
      {"rules",
       {{{"when_tag", "baseline_subtopics"}, {"behavior", "subtopics"}}}},
  };
  LlmGateway gw(make_mock_provider_from_json(replay), mock_config(), "");
  auto lib = PromptLibrary::load(kPromptDir);

  auto topic = generate_subtopics(lib, "Glacier dynamics", gen_request(), gw);
  CHECK(topic.topic == "Glacier dynamics");
  std::set<std::string> distinct(topic.subtopics.begin(), topic.subtopics.end());
  CHECK(distinct.size() == 5);
}

TEST_CASE("generate_chapter returns a synthetic document of about the asked size") {
  nlohmann::json replay = {
      {"rules",
       {{{"when_tag", "baseline_chapter"},
         {"behavior", "chapter"},
         {"params", {{"words", 600}}}}}},
  };
  LlmGateway gw(make_mock_provider_from_json(replay), mock_config(), "");
  auto lib = PromptLibrary::load(kPromptDir);

  auto doc = generate_chapter(lib, "Glacier dynamics", "Core methods", "glacier-t0-s1",
                              gen_request(), gw);
  CHECK(doc.doc_id == "glacier-t0-s1");
  CHECK(doc.synthetic);
  CHECK(doc.source_path == "synthetic:glacier-t0-s1");
  REQUIRE(doc.title.has_value());
  CHECK(doc.title->find("Glacier dynamics") != std::string::npos);
  CHECK(doc.title->find("Core methods") != std::string::npos);
  CHECK(count_words(doc.text) == 600);

  // a different subtopic yields different text
  auto other = generate_chapter(lib, "Glacier dynamics", "Applications", "glacier-t0-s2",
                                gen_request(), gw);
  CHECK(other.text != doc.text);
}

TEST_CASE("generate_chapter rejects a whitespace-only completion") {
  nlohmann::json replay = {
      {"rules",
       {{{"when_tag", "baseline_chapter"},
         {"behavior", "fixed"},
         {"params", {{"text", " \n \t "}}}}}},
  };
  LlmGateway gw(make_mock_provider_from_json(replay), mock_config(), "");
  auto lib = PromptLibrary::load(kPromptDir);
  CHECK_THROWS_AS(
      generate_chapter(lib, "T", "S", "d0", gen_request(), gw),
      std::runtime_error);
}
