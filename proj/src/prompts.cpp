#include "ipeval/prompts.hpp"

#include <array>
#include <stdexcept>

#include "ipeval/util.hpp"

namespace ipeval {

const char* prompt_file_name(PromptKind kind) {
  switch (kind) {
    case PromptKind::mcq_generation: return "mcq_generation.txt";
    case PromptKind::answer_direct: return "answer_direct.txt";
    case PromptKind::answer_with_context: return "answer_with_context.txt";
    case PromptKind::baseline_subtopics: return "baseline_subtopics.txt";
    case PromptKind::baseline_chapter: return "baseline_chapter.txt";
  }
  return "";
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  static constexpr std::array<PromptKind, 5> kinds = {
      PromptKind::mcq_generation,      PromptKind::answer_direct,
      PromptKind::answer_with_context, PromptKind::baseline_subtopics,
      PromptKind::baseline_chapter,
  };
  PromptLibrary lib;
  lib.dir_ = dir;
  for (PromptKind kind : kinds) {
    std::filesystem::path file = dir / prompt_file_name(kind);
    if (!std::filesystem::exists(file)) {
      throw std::runtime_error("prompt template missing: " + file.string());
    }
    std::string text = read_text_file(file);
    // trailing newline is an artifact of the file, not the template
    if (!text.empty() && text.back() == '\n') text.pop_back();
    lib.templates_[kind] = std::move(text);
  }
  return lib;
}

const std::string& PromptLibrary::raw(PromptKind kind) const {
  return templates_.at(kind);
}

std::string PromptLibrary::render(
    PromptKind kind, const std::map<std::string, std::string>& substitutions) const {
  std::string out = raw(kind);
  for (const auto& [name, value] : substitutions) {
    size_t pos = 0;
    while ((pos = out.find(name, pos)) != std::string::npos) {
      out.replace(pos, name.size(), value);
      pos += value.size();
    }
  }
  return out;
}

}  // namespace ipeval
