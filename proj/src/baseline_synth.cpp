#include "ipeval/baseline_synth.hpp"

#include <set>
#include <sstream>

#include "ipeval/text.hpp"
#include "ipeval/util.hpp"

namespace ipeval {

SyntheticTopic parse_subtopics(const std::string& topic, const std::string& raw) {
  std::array<std::string, 5> items;
  std::set<std::string> seen;
  size_t found = 0;

  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line) && found < 5) {
    std::string t = trim(line);
    std::string expected = std::to_string(found + 1) + ")";
    if (t.compare(0, expected.size(), expected) != 0) continue;
    std::string item = trim(t.substr(expected.size()));
    size_t end_mark = item.find("<end>");
    if (end_mark != std::string::npos) item = trim(item.substr(0, end_mark));
    if (item.empty()) continue;
    if (!seen.insert(item).second) {
      throw SubtopicParseError("subtopics for '" + topic + "' are not distinct", raw);
    }
    items[found++] = item;
  }
  if (found < 5) {
    throw SubtopicParseError("expected 5 subtopics for '" + topic + "', parsed " +
                                 std::to_string(found),
                             raw);
  }
  SyntheticTopic result;
  result.topic = topic;
  result.subtopics = items;
  return result;
}

SyntheticTopic generate_subtopics(const PromptLibrary& prompts, const std::string& topic,
                                  const CompletionRequest& base, LlmGateway& gateway) {
  if (trim(topic).empty()) throw std::invalid_argument("topic is empty");
  CompletionRequest req = base;
  req.prompt = prompts.render(PromptKind::baseline_subtopics, {{"TOPIC_HERE", topic}});
  req.request_tag = "baseline_subtopics";
  return parse_subtopics(topic, gateway.complete(req));
}

Document generate_chapter(const PromptLibrary& prompts, const std::string& title,
                          const std::string& subtopic, const std::string& doc_id,
                          const CompletionRequest& base, LlmGateway& gateway) {
  if (trim(title).empty()) throw std::invalid_argument("title is empty");
  if (trim(subtopic).empty()) throw std::invalid_argument("subtopic is empty");
  CompletionRequest req = base;
  req.prompt = prompts.render(PromptKind::baseline_chapter, {{"MANUSCRIPT_TITLE_HERE", title},
                                                             {"SUBTOPIC_HERE", subtopic}});
  req.request_tag = "baseline_chapter";
  std::string text = normalize_text(gateway.complete(req));
  if (trim(text).empty()) {
    throw std::runtime_error("empty chapter completion for '" + title + "' / '" + subtopic +
                             "'");
  }
  Document doc;
  doc.doc_id = doc_id;
  doc.source_path = "synthetic:" + doc_id;
  doc.title = title + " / " + subtopic;
  doc.text = text;
  doc.synthetic = true;
  return doc;
}

}  // namespace ipeval
