#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipeval/corpus.hpp"
#include "ipeval/prompts.hpp"

namespace ipeval {

struct Mcq {
  std::string mcq_id;
  std::string chunk_id;
  std::string question;
  std::array<std::string, 4> options;  // canonical order as generated
  int correct_index = 0;               // 0..3 into options
  char gen_letter = 'A';               // letter the generator emitted

  bool operator==(const Mcq&) const = default;
};

struct McqReject {
  std::string chunk_id;
  std::string fragment;  // offending block, verbatim
  std::string reason;
};

struct GenerationBatch {
  std::string chunk_id;
  std::string raw_text;
  std::vector<Mcq> parsed;
  std::vector<McqReject> rejects;
  // set when raw contains no question blocks at all
  std::optional<std::string> batch_error;
};

std::string make_mcq_id(const std::string& chunk_id, size_t seq);

std::string build_generation_prompt(const PromptLibrary& prompts, const Chunk& chunk,
                                    int mcqs_per_chunk);

// Splits raw on "[QUESTION]" markers. Option markers are tolerant:
// "A)" or "A.", any case, leading whitespace. Each block either parses
// into an Mcq or lands in rejects with a reason naming the first
// violation found ("missing option D", "duplicate option B",
// "no correct-answer line", "correct letter outside A-D",
// "empty question").
GenerationBatch parse_generation_output(const std::string& chunk_id, const std::string& raw);

// Structural checks beyond the parser: non-empty stem and options,
// pairwise-distinct options after trimming, no option equal to the
// stem. Returns the reason when invalid.
std::optional<std::string> validate_mcq(const Mcq& m);

// Canonical textual form, the same shape the generator is asked for.
// parse_generation_output(render_mcq(m)) round-trips.
std::string render_mcq(const Mcq& m);

// Question text as shown to an evaluator model: stem, then one
// "X) option" line per letter. option_order[i] is the index into
// m.options shown at letter position i.
std::string render_question_text(const Mcq& m, const std::array<int, 4>& option_order);

void write_mcqs(const std::filesystem::path& path, const std::vector<Mcq>& mcqs);
std::vector<Mcq> read_mcqs(const std::filesystem::path& path);

void write_mcq_rejects(const std::filesystem::path& path, const std::vector<McqReject>& rejects);

}  // namespace ipeval
