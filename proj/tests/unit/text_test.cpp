#include <doctest.h>

#include <string>
#include <vector>

#include "ipeval/text.hpp"
#include "test_support.hpp"

using namespace ipeval;

TEST_CASE("unify_newlines folds CRLF and lone CR") {
  CHECK(unify_newlines("a\r\nb\rc\nd") == "a\nb\nc\nd");
  CHECK(unify_newlines("\r\n\r\n") == "\n\n");
  CHECK(unify_newlines("plain") == "plain");
}

TEST_CASE("nfc_normalize composes and passes through invalid bytes") {
  // e + combining acute composes to the precomposed character
  std::string decomposed = "caf\x65\xcc\x81";
  std::string composed = "caf\xc3\xa9";
  CHECK(nfc_normalize(decomposed) == composed);
  CHECK(nfc_normalize(composed) == composed);

  std::string invalid = "ok\xff\xfe then";
  CHECK(nfc_normalize(invalid) == invalid);
}

TEST_CASE("normalize_text combines newline and NFC passes") {
  CHECK(normalize_text("a\r\nb\x65\xcc\x81") == "a\nb\xc3\xa9");
}

TEST_CASE("whitespace tokenization") {
  auto toks = whitespace_tokens("  one\ttwo\nthree  ");
  CHECK(toks == std::vector<std::string>{"one", "two", "three"});
  CHECK(count_words("  one\ttwo\nthree  ") == 3);
  CHECK(count_words("") == 0);
  CHECK(count_words("   \n\t ") == 0);

  // U+2003 EM SPACE delimits like ASCII space
  std::string em = "a\xe2\x80\x83z";
  CHECK(whitespace_tokens(em) == std::vector<std::string>{"a", "z"});
}

TEST_CASE("token_spans cover the exact token bytes") {
  std::string s = " ab  cde ";
  auto spans = token_spans(s);
  REQUIRE(spans.size() == 2);
  CHECK(s.substr(spans[0].begin, spans[0].end - spans[0].begin) == "ab");
  CHECK(s.substr(spans[1].begin, spans[1].end - spans[1].begin) == "cde");
}

TEST_CASE("metric_tokens lowercase and strip punctuation") {
  CHECK(metric_tokens("The cat, sat-on 3 mats!") ==
        std::vector<std::string>{"the", "cat", "sat", "on", "3", "mats"});
  CHECK(metric_tokens("...") == std::vector<std::string>{});
  CHECK(metric_tokens("Don't") == std::vector<std::string>{"don", "t"});
}
