#include "ipeval/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "ipeval/jsonl.hpp"
#include "ipeval/util.hpp"

namespace ipeval {

const char* condition_name(Condition c) {
  return c == Condition::direct ? "direct" : "with_context";
}

namespace {

Condition condition_from_name(const std::string& name) {
  if (name == "direct") return Condition::direct;
  if (name == "with_context") return Condition::with_context;
  throw std::runtime_error("unknown condition '" + name + "'");
}

uint64_t rotation_seed(uint64_t run_seed, const std::string& mcq_id, int rotation) {
  // distinct per (run, question, rotation); the multiplier separates
  // rotations further than xor alone would
  return run_seed ^ fnv1a64(mcq_id) ^
         (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(rotation + 1));
}

}  // namespace

std::array<RotationPlan, 4> plan_rotations(const Mcq& m, uint64_t run_seed) {
  std::array<RotationPlan, 4> plans;
  for (int r = 0; r < 4; ++r) {
    RotationPlan& plan = plans[r];
    plan.mcq_id = m.mcq_id;
    plan.rotation_index = r;
    plan.letter_of_correct = static_cast<char>('A' + r);
    plan.seed = rotation_seed(run_seed, m.mcq_id, r);

    std::vector<int> distractors;
    for (int i = 0; i < 4; ++i) {
      if (i != m.correct_index) distractors.push_back(i);
    }
    DeterministicRng rng(plan.seed);
    deterministic_shuffle(distractors, rng);

    size_t d = 0;
    for (int position = 0; position < 4; ++position) {
      plan.option_order[position] = position == r ? m.correct_index : distractors[d++];
    }
  }
  return plans;
}

std::string build_eval_prompt(const PromptLibrary& prompts, const Mcq& m,
                              const RotationPlan& plan, Condition condition,
                              const std::optional<std::string>& chunk_text) {
  std::string question = render_question_text(m, plan.option_order);
  if (condition == Condition::direct) {
    return prompts.render(PromptKind::answer_direct, {{"QUESTION_TEXT_HERE", question}});
  }
  if (!chunk_text.has_value()) {
    throw std::invalid_argument("with_context evaluation needs the source chunk for " +
                                m.mcq_id);
  }
  return prompts.render(PromptKind::answer_with_context,
                        {{"PASSAGE_TEXT_HERE", *chunk_text}, {"QUESTION_TEXT_HERE", question}});
}

std::optional<char> parse_answer_letter(const std::string& raw) {
  static const std::string phrase = "correct answer";
  std::string lowered = to_lower_ascii(raw);
  size_t at = lowered.find(phrase);
  if (at != std::string::npos) {
    size_t i = at + phrase.size();
    auto skip_filler = [&] {
      while (i < raw.size() && (raw[i] == ':' || raw[i] == ' ' || raw[i] == '\t' ||
                                raw[i] == '*' || raw[i] == '\'' || raw[i] == '"' ||
                                raw[i] == '(')) {
        ++i;
      }
    };
    skip_filler();
    if (i + 1 < raw.size() && lowered.compare(i, 2, "is") == 0 &&
        (i + 2 >= raw.size() || !std::isalnum(static_cast<unsigned char>(raw[i + 2])))) {
      i += 2;
      skip_filler();
    }
    if (i < raw.size()) {
      char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(raw[i])));
      if (letter >= 'A' && letter <= 'D') return letter;
    }
    return std::nullopt;
  }

  // lone leading letter, e.g. "B", "b)", "C. because ..."
  std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
  if (letter < 'A' || letter > 'D') return std::nullopt;
  if (t.size() == 1) return letter;
  char next = t[1];
  if (next == ')' || next == '.' || next == ':' || next == ',' || next == ' ' ||
      next == '\t' || next == '\n') {
    return letter;
  }
  return std::nullopt;
}

QuestionVerdict fold_verdict(const std::string& mcq_id,
                             const std::vector<RotationRecord>& records) {
  QuestionVerdict v;
  v.mcq_id = mcq_id;
  v.direct_4x = true;
  v.context_4x = true;
  int direct_seen = 0, context_seen = 0;
  for (const RotationRecord& r : records) {
    if (r.mcq_id != mcq_id) continue;
    if (r.condition == Condition::direct) {
      ++direct_seen;
      v.direct_4x = v.direct_4x && r.is_correct;
    } else {
      ++context_seen;
      v.context_4x = v.context_4x && r.is_correct;
    }
  }
  if (direct_seen != 4 || context_seen != 4) {
    throw std::invalid_argument("verdict for " + mcq_id + " needs 4 records per condition");
  }
  return v;
}

EvalOutcome evaluate_question(const PromptLibrary& prompts, const Mcq& m,
                              const std::string& chunk_text, const CompletionRequest& base,
                              uint64_t run_seed, const CompleteFn& complete) {
  EvalOutcome out;
  auto plans = plan_rotations(m, run_seed);
  for (Condition condition : {Condition::direct, Condition::with_context}) {
    for (const RotationPlan& plan : plans) {
      CompletionRequest req = base;
      req.request_tag = condition == Condition::direct ? "eval_direct" : "eval_context";
      req.prompt = build_eval_prompt(
          prompts, m, plan, condition,
          condition == Condition::with_context ? std::optional<std::string>(chunk_text)
                                               : std::nullopt);
      std::string response;
      try {
        response = complete(req);
      } catch (const GatewayError& e) {
        out.failures.push_back({condition, plan.rotation_index, e.what()});
        continue;
      }
      RotationRecord record;
      record.mcq_id = m.mcq_id;
      record.condition = condition;
      record.rotation_index = plan.rotation_index;
      record.asked_letter_of_correct = plan.letter_of_correct;
      record.answered_letter = parse_answer_letter(response);
      record.is_correct = record.answered_letter.has_value() &&
                          *record.answered_letter == plan.letter_of_correct;
      record.raw_response = response;
      out.records.push_back(std::move(record));
    }
  }
  if (out.failures.empty()) {
    out.verdict = fold_verdict(m.mcq_id, out.records);
  }
  return out;
}

void write_rotation_records(const std::filesystem::path& path,
                            const std::vector<RotationRecord>& records) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const RotationRecord& r : records) {
    nlohmann::json row = {
        {"schema", "rotation_record.v1"},
        {"mcq_id", r.mcq_id},
        {"condition", condition_name(r.condition)},
        {"rotation_index", r.rotation_index},
        {"asked_letter_of_correct", std::string(1, r.asked_letter_of_correct)},
        {"is_correct", r.is_correct},
        {"raw_response", r.raw_response},
    };
    row["answered_letter"] = r.answered_letter.has_value()
                                 ? nlohmann::json(std::string(1, *r.answered_letter))
                                 : nlohmann::json();
    rows.push_back(std::move(row));
  }
  write_jsonl(path, rows);
}

std::vector<RotationRecord> read_rotation_records(const std::filesystem::path& path) {
  std::vector<RotationRecord> records;
  for (const nlohmann::json& row : read_jsonl(path)) {
    RotationRecord r;
    r.mcq_id = row.at("mcq_id").get<std::string>();
    r.condition = condition_from_name(row.at("condition").get<std::string>());
    r.rotation_index = row.at("rotation_index").get<int>();
    r.asked_letter_of_correct = row.at("asked_letter_of_correct").get<std::string>().at(0);
    if (!row.at("answered_letter").is_null()) {
      r.answered_letter = row.at("answered_letter").get<std::string>().at(0);
    }
    r.is_correct = row.at("is_correct").get<bool>();
    r.raw_response = row.at("raw_response").get<std::string>();
    records.push_back(std::move(r));
  }
  return records;
}

void write_verdicts(const std::filesystem::path& path,
                    const std::vector<QuestionVerdict>& verdicts) {
  std::vector<nlohmann::json> rows;
  rows.reserve(verdicts.size());
  for (const QuestionVerdict& v : verdicts) {
    rows.push_back({{"schema", "verdict.v1"},
                    {"mcq_id", v.mcq_id},
                    {"direct_4x", v.direct_4x},
                    {"context_4x", v.context_4x}});
  }
  write_jsonl(path, rows);
}

std::vector<QuestionVerdict> read_verdicts(const std::filesystem::path& path) {
  std::vector<QuestionVerdict> verdicts;
  for (const nlohmann::json& row : read_jsonl(path)) {
    QuestionVerdict v;
    v.mcq_id = row.at("mcq_id").get<std::string>();
    v.direct_4x = row.at("direct_4x").get<bool>();
    v.context_4x = row.at("context_4x").get<bool>();
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

}  // namespace ipeval
