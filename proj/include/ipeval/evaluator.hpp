#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ipeval/llm_gateway.hpp"
#include "ipeval/mcq.hpp"
#include "ipeval/prompts.hpp"

namespace ipeval {

enum class Condition { direct, with_context };

const char* condition_name(Condition c);

struct RotationPlan {
  std::string mcq_id;
  int rotation_index = 0;         // 0..3
  char letter_of_correct = 'A';   // 'A' + rotation_index
  std::array<int, 4> option_order{};  // letter position -> option index
  uint64_t seed = 0;              // distractor shuffle seed

  bool operator==(const RotationPlan&) const = default;
};

// Four plans that rotate the correct option through A..D; the three
// distractors are shuffled per rotation, seeded by (run_seed, mcq_id,
// rotation), so plans reproduce across runs and machines.
std::array<RotationPlan, 4> plan_rotations(const Mcq& m, uint64_t run_seed);

struct RotationRecord {
  std::string mcq_id;
  Condition condition = Condition::direct;
  int rotation_index = 0;
  char asked_letter_of_correct = 'A';
  std::optional<char> answered_letter;  // nullopt = unparseable reply
  bool is_correct = false;
  std::string raw_response;
};

struct QuestionVerdict {
  std::string mcq_id;
  bool direct_4x = false;
  bool context_4x = false;

  bool operator==(const QuestionVerdict&) const = default;
};

std::string build_eval_prompt(const PromptLibrary& prompts, const Mcq& m,
                              const RotationPlan& plan, Condition condition,
                              const std::optional<std::string>& chunk_text);

// Scans for the requested "Correct answer: X" shape first, then falls
// back to a reply whose first word is a lone option letter.
std::optional<char> parse_answer_letter(const std::string& raw);

struct EvalFailure {
  Condition condition = Condition::direct;
  int rotation_index = 0;
  std::string message;
};

struct EvalOutcome {
  std::vector<RotationRecord> records;
  // set only when all 8 rotations completed; an incomplete question is
  // excluded from scoring and itemized instead
  std::optional<QuestionVerdict> verdict;
  std::vector<EvalFailure> failures;
};

using CompleteFn = std::function<std::string(const CompletionRequest&)>;

// Runs 4 rotations x {direct, with_context}, reusing the same plans in
// both conditions so they differ only in the supplied context. Gateway
// errors become failures, not exceptions.
EvalOutcome evaluate_question(const PromptLibrary& prompts, const Mcq& m,
                              const std::string& chunk_text, const CompletionRequest& base,
                              uint64_t run_seed, const CompleteFn& complete);

QuestionVerdict fold_verdict(const std::string& mcq_id,
                             const std::vector<RotationRecord>& records);

void write_rotation_records(const std::filesystem::path& path,
                            const std::vector<RotationRecord>& records);
std::vector<RotationRecord> read_rotation_records(const std::filesystem::path& path);

void write_verdicts(const std::filesystem::path& path,
                    const std::vector<QuestionVerdict>& verdicts);
std::vector<QuestionVerdict> read_verdicts(const std::filesystem::path& path);

}  // namespace ipeval
