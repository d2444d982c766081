#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace ipeval {

enum class PromptKind {
  mcq_generation,
  answer_direct,
  answer_with_context,
  baseline_subtopics,
  baseline_chapter,
};

const char* prompt_file_name(PromptKind kind);

// Loads the five task templates from a versioned directory
// (resources/prompts/v1 by default). Missing files fail at load time,
// never mid-run.
class PromptLibrary {
 public:
  static PromptLibrary load(const std::filesystem::path& dir);

  const std::string& raw(PromptKind kind) const;

  // Replaces every occurrence of each placeholder token (e.g. TEXT_HERE)
  // with its value. Placeholder names follow the templates themselves.
  std::string render(PromptKind kind,
                     const std::map<std::string, std::string>& substitutions) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<PromptKind, std::string> templates_;
};

}  // namespace ipeval
