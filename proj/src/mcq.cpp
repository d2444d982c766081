#include "ipeval/mcq.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "ipeval/jsonl.hpp"
#include "ipeval/util.hpp"

namespace ipeval {

namespace {

constexpr const char* kQuestionMarker = "[QUESTION]";

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= s.size()) {
    size_t nl = s.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(s.substr(start));
      break;
    }
    lines.push_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

// "A)" or "a." after optional whitespace, with the option text following.
std::optional<std::pair<int, std::string>> match_option_line(const std::string& line) {
  size_t i = line.find_first_not_of(" \t");
  if (i == std::string::npos || i + 1 >= line.size()) return std::nullopt;
  char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
  if (letter < 'A' || letter > 'D') return std::nullopt;
  char mark = line[i + 1];
  if (mark != ')' && mark != '.') return std::nullopt;
  return std::make_pair(letter - 'A', trim(line.substr(i + 2)));
}

// "Correct answer: X" with tolerant case, punctuation, and spacing.
// Returns the raw character found after the phrase, which may be
// outside A-D.
std::optional<char> match_correct_line(const std::string& line) {
  static const std::string phrase = "correct answer";
  std::string lowered = to_lower_ascii(line);
  size_t at = lowered.find(phrase);
  if (at == std::string::npos) return std::nullopt;
  if (!trim(line.substr(0, at)).empty()) return std::nullopt;
  size_t i = at + phrase.size();
  while (i < line.size() && (line[i] == ':' || line[i] == ' ' || line[i] == '\t' ||
                             line[i] == '*' || line[i] == '\'' || line[i] == '"')) {
    ++i;
  }
  if (i >= line.size()) return std::nullopt;
  return static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
}

struct BlockParse {
  std::optional<Mcq> mcq;  // without mcq_id
  std::string reason;      // set when mcq is empty
};

BlockParse parse_block(const std::string& chunk_id, const std::string& block) {
  std::array<std::optional<std::string>, 4> options;
  std::optional<char> correct_raw;
  std::vector<std::string> stem_lines;
  bool seen_option = false;

  for (const std::string& line : split_lines(block)) {
    if (auto correct = match_correct_line(line); correct && !correct_raw) {
      correct_raw = *correct;
      continue;
    }
    if (auto opt = match_option_line(line)) {
      auto [index, text] = *opt;
      if (options[index].has_value()) {
        return {std::nullopt, std::string("duplicate option ") +
                                  static_cast<char>('A' + index)};
      }
      options[index] = text;
      seen_option = true;
      continue;
    }
    if (!seen_option && !trim(line).empty()) stem_lines.push_back(trim(line));
  }

  for (int i = 0; i < 4; ++i) {
    if (!options[i].has_value()) {
      return {std::nullopt, std::string("missing option ") + static_cast<char>('A' + i)};
    }
  }
  if (!correct_raw.has_value()) return {std::nullopt, "no correct-answer line"};
  if (*correct_raw < 'A' || *correct_raw > 'D') {
    return {std::nullopt, "correct letter outside A-D"};
  }

  std::string question;
  for (const std::string& part : stem_lines) {
    if (!question.empty()) question += ' ';
    question += part;
  }
  if (question.empty()) return {std::nullopt, "empty question"};

  Mcq m;
  m.chunk_id = chunk_id;
  m.question = question;
  for (int i = 0; i < 4; ++i) m.options[i] = *options[i];
  m.gen_letter = *correct_raw;
  m.correct_index = *correct_raw - 'A';
  return {m, ""};
}

}  // namespace

std::string make_mcq_id(const std::string& chunk_id, size_t seq) {
  return chunk_id + ":q" + std::to_string(seq);
}

std::string build_generation_prompt(const PromptLibrary& prompts, const Chunk& chunk,
                                    int mcqs_per_chunk) {
  if (chunk.text.empty()) throw std::invalid_argument("chunk text is empty");
  if (mcqs_per_chunk < 1) throw std::invalid_argument("mcqs_per_chunk must be >= 1");
  std::string prompt = prompts.render(PromptKind::mcq_generation, {{"TEXT_HERE", chunk.text}});
  if (mcqs_per_chunk != 10) {
    static const std::string stock = "a total of 10 MCQs";
    size_t at = prompt.find(stock);
    if (at != std::string::npos) {
      prompt.replace(at, stock.size(),
                     "a total of " + std::to_string(mcqs_per_chunk) + " MCQs");
    }
  }
  return prompt;
}

GenerationBatch parse_generation_output(const std::string& chunk_id, const std::string& raw) {
  GenerationBatch batch;
  batch.chunk_id = chunk_id;
  batch.raw_text = raw;

  std::vector<std::string> blocks;
  size_t at = raw.find(kQuestionMarker);
  if (at == std::string::npos) {
    batch.batch_error = "no question blocks found";
    return batch;
  }
  while (at != std::string::npos) {
    size_t body = at + std::string(kQuestionMarker).size();
    size_t next = raw.find(kQuestionMarker, body);
    size_t end = next == std::string::npos ? raw.size() : next;
    blocks.push_back(raw.substr(body, end - body));
    at = next;
  }

  for (size_t i = 0; i < blocks.size(); ++i) {
    BlockParse result = parse_block(chunk_id, blocks[i]);
    if (result.mcq.has_value()) {
      result.mcq->mcq_id = make_mcq_id(chunk_id, i);
      batch.parsed.push_back(std::move(*result.mcq));
    } else {
      batch.rejects.push_back(
          {chunk_id, std::string(kQuestionMarker) + blocks[i], result.reason});
    }
  }
  return batch;
}

std::optional<std::string> validate_mcq(const Mcq& m) {
  if (trim(m.question).empty()) return "empty question";
  if (m.correct_index < 0 || m.correct_index > 3) return "correct index out of range";
  std::array<std::string, 4> trimmed;
  for (int i = 0; i < 4; ++i) {
    trimmed[i] = trim(m.options[i]);
    if (trimmed[i].empty()) return "empty option";
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (trimmed[i] == trimmed[j]) return "duplicate options";
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (m.options[i] == m.question) return "option equals question";
  }
  return std::nullopt;
}

std::string render_mcq(const Mcq& m) {
  std::ostringstream out;
  out << kQuestionMarker << ' ' << m.question << '\n';
  for (int i = 0; i < 4; ++i) {
    out << static_cast<char>('A' + i) << ") " << m.options[i] << '\n';
  }
  out << "Correct answer: " << static_cast<char>('A' + m.correct_index) << ") "
      << m.options[m.correct_index];
  return out.str();
}

std::string render_question_text(const Mcq& m, const std::array<int, 4>& option_order) {
  std::ostringstream out;
  out << m.question << '\n';
  for (int i = 0; i < 4; ++i) {
    out << static_cast<char>('A' + i) << ") " << m.options[option_order[i]];
    if (i < 3) out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json mcq_to_json(const Mcq& m) {
  return {
      {"schema", "mcq.v1"},
      {"mcq_id", m.mcq_id},
      {"chunk_id", m.chunk_id},
      {"question", m.question},
      {"options", m.options},
      {"correct_index", m.correct_index},
      {"gen_letter", std::string(1, m.gen_letter)},
  };
}

Mcq mcq_from_json(const nlohmann::json& j) {
  Mcq m;
  m.mcq_id = j.at("mcq_id").get<std::string>();
  m.chunk_id = j.at("chunk_id").get<std::string>();
  m.question = j.at("question").get<std::string>();
  auto options = j.at("options").get<std::vector<std::string>>();
  if (options.size() != 4) throw std::runtime_error("mcq record needs exactly 4 options");
  std::copy(options.begin(), options.end(), m.options.begin());
  m.correct_index = j.at("correct_index").get<int>();
  if (m.correct_index < 0 || m.correct_index > 3) {
    throw std::runtime_error("mcq record correct_index out of range");
  }
  auto letter = j.at("gen_letter").get<std::string>();
  if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'D') {
    throw std::runtime_error("mcq record gen_letter out of range");
  }
  m.gen_letter = letter[0];
  return m;
}

}  // namespace

void write_mcqs(const std::filesystem::path& path, const std::vector<Mcq>& mcqs) {
  std::vector<nlohmann::json> rows;
  rows.reserve(mcqs.size());
  for (const Mcq& m : mcqs) rows.push_back(mcq_to_json(m));
  write_jsonl(path, rows);
}

std::vector<Mcq> read_mcqs(const std::filesystem::path& path) {
  std::vector<Mcq> mcqs;
  for (const nlohmann::json& row : read_jsonl(path)) {
    mcqs.push_back(mcq_from_json(row));
  }
  return mcqs;
}

void write_mcq_rejects(const std::filesystem::path& path,
                       const std::vector<McqReject>& rejects) {
  std::vector<nlohmann::json> rows;
  rows.reserve(rejects.size());
  for (const McqReject& r : rejects) {
    rows.push_back({{"schema", "mcq_reject.v1"},
                    {"chunk_id", r.chunk_id},
                    {"fragment", r.fragment},
                    {"reason", r.reason}});
  }
  write_jsonl(path, rows);
}

}  // namespace ipeval
