#pragma once

#include <array>
#include <string>
#include <vector>

#include "ipeval/corpus.hpp"
#include "ipeval/llm_gateway.hpp"
#include "ipeval/prompts.hpp"

namespace ipeval {

struct SyntheticTopic {
  std::string topic;
  std::array<std::string, 5> subtopics;
};

struct SubtopicParseError : std::runtime_error {
  SubtopicParseError(const std::string& message, std::string raw_arg)
      : std::runtime_error(message), raw(std::move(raw_arg)) {}
  std::string raw;  // verbatim provider output, for audit
};

// Parses the numbered "1) ... 5)" list; the "<end>" terminator is
// optional. Fewer than 5 distinct items is a SubtopicParseError.
SyntheticTopic parse_subtopics(const std::string& topic, const std::string& raw);

// base carries model_id and sampling parameters; prompt and tag are
// filled in here.
SyntheticTopic generate_subtopics(const PromptLibrary& prompts, const std::string& topic,
                                  const CompletionRequest& base, LlmGateway& gateway);

// One synthetic Document per (topic, subtopic), chunkable like any
// ingested text.
Document generate_chapter(const PromptLibrary& prompts, const std::string& title,
                          const std::string& subtopic, const std::string& doc_id,
                          const CompletionRequest& base, LlmGateway& gateway);

}  // namespace ipeval
