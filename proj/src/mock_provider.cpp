#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "ipeval/providers.hpp"
#include "ipeval/text.hpp"
#include "ipeval/util.hpp"

namespace ipeval {

namespace {

struct MockRule {
  std::optional<std::string> when_tag;
  std::optional<std::string> when_contains;
  std::string behavior;
  nlohmann::json params;
};

std::vector<std::string> prompt_lines(const std::string& prompt) {
  std::vector<std::string> lines;
  std::istringstream in(prompt);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Option lines rendered as "A) text" .. "D) text".
std::map<char, std::string> extract_options(const std::string& prompt) {
  std::map<char, std::string> options;
  for (const std::string& line : prompt_lines(prompt)) {
    std::string t = trim(line);
    if (t.size() >= 2 && t[0] >= 'A' && t[0] <= 'D' && t[1] == ')') {
      options.emplace(t[0], trim(t.substr(2)));
    }
  }
  return options;
}

// The synthetic MCQs tag every option with "<id>-key" / "<id>-alt<i>";
// the marker survives rotation and identifies the question. Prompt
// templates may quote the option block, so surrounding punctuation is
// stripped before matching (and from the returned word, which seeds the
// answer coin and must not vary across rotations).
std::optional<std::string> find_marker_word(const std::string& text, const std::string& suffix) {
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  for (const std::string& raw : whitespace_tokens(text)) {
    size_t b = 0, e = raw.size();
    while (b < e && !alnum(raw[b])) ++b;
    while (e > b && !alnum(raw[e - 1])) --e;
    std::string word = raw.substr(b, e - b);
    if (word.size() > suffix.size() &&
        word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return word;
    }
  }
  return std::nullopt;
}

std::string join_range(const std::vector<std::string>& tokens, size_t begin, size_t len) {
  std::string out;
  for (size_t i = begin; i < std::min(begin + len, tokens.size()); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

class MockProvider : public Provider {
 public:
  explicit MockProvider(const nlohmann::json& replay) {
    embedding_dim_ = replay.value("embedding_dim", 16);
    if (embedding_dim_ < 1) {
      throw GatewayError(GatewayErrorKind::config, "mock: embedding_dim must be >= 1");
    }
    if (replay.contains("responses")) {
      for (const auto& [hash, text] : replay.at("responses").items()) {
        responses_[hash] = text.get<std::string>();
      }
    }
    if (replay.contains("embeddings")) {
      for (const auto& entry : replay.at("embeddings")) {
        embeddings_[entry.at("text").get<std::string>()] =
            entry.at("values").get<std::vector<double>>();
      }
    }
    if (replay.contains("rules")) {
      for (const auto& r : replay.at("rules")) {
        MockRule rule;
        if (r.contains("when_tag")) rule.when_tag = r.at("when_tag").get<std::string>();
        if (r.contains("when_contains"))
          rule.when_contains = r.at("when_contains").get<std::string>();
        rule.behavior = r.value("behavior", "fixed");
        rule.params = r.value("params", nlohmann::json::object());
        rules_.push_back(std::move(rule));
      }
    }
    if (replay.contains("default")) {
      MockRule rule;
      rule.behavior = replay.at("default").value("behavior", "fixed");
      rule.params = replay.at("default").value("params", nlohmann::json::object());
      default_rule_ = std::move(rule);
    }
  }

  bool offline() const override { return true; }

  std::string complete(const CompletionRequest& req) override {
    auto hit = responses_.find(req.cache_key());
    if (hit != responses_.end()) return hit->second;
    for (const MockRule& rule : rules_) {
      if (rule.when_tag && *rule.when_tag != req.request_tag) continue;
      if (rule.when_contains && req.prompt.find(*rule.when_contains) == std::string::npos)
        continue;
      return run_behavior(rule, req);
    }
    if (default_rule_) return run_behavior(*default_rule_, req);
    throw GatewayError(GatewayErrorKind::content,
                       "mock provider has no rule for request (tag '" + req.request_tag + "')",
                       req.request_tag);
  }

  std::vector<std::vector<double>> embed(const std::string& model_id,
                                         const std::vector<std::string>& texts) override {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
      auto hit = embeddings_.find(text);
      if (hit != embeddings_.end()) {
        out.push_back(hit->second);
        continue;
      }
      out.push_back(derived_embedding(model_id, text));
    }
    return out;
  }

 private:
  std::string run_behavior(const MockRule& rule, const CompletionRequest& req) const {
    if (rule.behavior == "fixed") {
      if (!rule.params.contains("text")) {
        throw GatewayError(GatewayErrorKind::config, "mock rule 'fixed' needs params.text");
      }
      return rule.params.at("text").get<std::string>();
    }
    if (rule.behavior == "echo") return req.prompt;
    if (rule.behavior == "synth_mcqs") return synth_mcqs(req, rule.params.value("count", 10));
    if (rule.behavior == "answer_marker")
      return answer_marker(req, rule.params.value("known_fraction", 1.0));
    if (rule.behavior == "answer_fixed") {
      std::string letter = rule.params.value("letter", "A");
      return "Correct answer: " + letter + ".";
    }
    if (rule.behavior == "subtopics") return subtopics(req);
    if (rule.behavior == "chapter") return chapter(req, rule.params.value("words", 600));
    throw GatewayError(GatewayErrorKind::config,
                       "mock: unknown behavior '" + rule.behavior + "'");
  }

  std::string synth_mcqs(const CompletionRequest& req, int count) const {
    const std::string h8 = sha256_hex(req.prompt).substr(0, 8);
    // the prompt's format scaffold contains the block marker; splicing it
    // into an option would corrupt the output framing
    std::vector<std::string> tokens;
    for (std::string& word : whitespace_tokens(req.prompt)) {
      if (word.find("[QUESTION]") == std::string::npos) tokens.push_back(std::move(word));
    }
    std::ostringstream out;
    for (int k = 0; k < count; ++k) {
      const std::string qid = h8 + "q" + std::to_string(k);
      DeterministicRng rng(fnv1a64(qid));
      // generation-side positional bias: mostly B and C, like a raw
      // generator before any mitigation
      size_t r = rng.below(100);
      char letter = r < 6 ? 'A' : r < 46 ? 'B' : r < 93 ? 'C' : 'D';
      std::string texts[4];
      for (int opt = 0; opt < 4; ++opt) {
        size_t span_len = 4 + rng.below(5);
        size_t start = tokens.empty() ? 0 : rng.below(std::max<size_t>(tokens.size(), 1));
        std::string span = join_range(tokens, start, span_len);
        texts[opt] = span.empty() ? qid : span;
      }
      int correct = letter - 'A';
      for (int opt = 0; opt < 4; ++opt) {
        texts[opt] += " " + qid + (opt == correct ? "-key" : "-alt" + std::to_string(opt));
      }
      if (k > 0) out << "\n\n";
      out << "[QUESTION] Which statement about segment " << qid
          << " is supported by the source?\n";
      for (int opt = 0; opt < 4; ++opt) {
        out << static_cast<char>('A' + opt) << ") " << texts[opt] << "\n";
      }
      out << "Correct answer: " << letter << ") " << texts[correct];
    }
    return out.str();
  }

  std::string answer_marker(const CompletionRequest& req, double known_fraction) const {
    std::map<char, std::string> options = extract_options(req.prompt);
    char correct_letter = 0;
    std::string marker;
    for (const auto& [letter, text] : options) {
      if (auto word = find_marker_word(text, "-key")) {
        correct_letter = letter;
        marker = *word;
        break;
      }
    }
    if (correct_letter == 0) {
      // unrecognized question: deterministic guess
      char letter = static_cast<char>('A' + fnv1a64(req.prompt) % 4);
      return std::string("Correct answer: ") + letter + ".";
    }
    // salted with the tag so direct/context outcomes are independent
    double coin =
        static_cast<double>(fnv1a64(marker + "|" + req.request_tag) % 100000) / 100000.0;
    if (coin < known_fraction) {
      return std::string("Correct answer: ") + correct_letter + ".";
    }
    // consistently picks the same wrong option content on every rotation
    for (const auto& [letter, text] : options) {
      if (letter != correct_letter && find_marker_word(text, "-alt1")) {
        return std::string("Correct answer: ") + letter + ".";
      }
    }
    for (const auto& [letter, text] : options) {
      if (letter != correct_letter) {
        return std::string("Correct answer: ") + letter + ".";
      }
    }
    return "Correct answer: A.";
  }

  std::string subtopics(const CompletionRequest& req) const {
    const std::string h8 = sha256_hex(req.prompt).substr(0, 8);
    static const char* facets[] = {"Foundations", "Methods", "Applications",
                                   "Open problems", "Case studies"};
    std::ostringstream out;
    for (int i = 0; i < 5; ++i) {
      out << (i + 1) << ") " << facets[i] << " of subject " << h8 << "\n";
    }
    out << "<end>";
    return out.str();
  }

  std::string chapter(const CompletionRequest& req, int words) const {
    DeterministicRng rng(fnv1a64(sha256_hex(req.prompt)));
    static const char* stems[] = {"measurement", "catalyst", "gradient", "archive",
                                  "lattice",     "protocol", "specimen", "basin",
                                  "estimate",    "housing",  "index",    "margin"};
    std::ostringstream out;
    for (int i = 0; i < words; ++i) {
      if (i > 0) out << (i % 13 == 0 ? ".\n" : " ");
      out << stems[rng.below(12)] << rng.below(100);
    }
    out << ".";
    return out.str();
  }

  std::vector<double> derived_embedding(const std::string& model_id,
                                        const std::string& text) const {
    std::vector<double> values(static_cast<size_t>(embedding_dim_));
    const std::string seed = sha256_hex(model_id + "\x1f" + text);
    for (size_t i = 0; i < values.size(); ++i) {
      const std::string h = sha256_hex(seed + ":" + std::to_string(i));
      uint64_t u = std::stoull(h.substr(0, 16), nullptr, 16);
      values[i] = static_cast<double>(u) / static_cast<double>(UINT64_MAX) * 2.0 - 1.0;
    }
    return values;
  }

  int embedding_dim_ = 16;
  std::map<std::string, std::string> responses_;
  std::map<std::string, std::vector<double>> embeddings_;
  std::vector<MockRule> rules_;
  std::optional<MockRule> default_rule_;
};

}  // namespace

std::unique_ptr<Provider> make_mock_provider_from_json(const nlohmann::json& replay) {
  return std::make_unique<MockProvider>(replay);
}

std::unique_ptr<Provider> make_mock_provider(const ProviderConfig& config) {
  nlohmann::json replay;
  try {
    replay = nlohmann::json::parse(read_text_file(config.replay_path));
  } catch (const std::exception& e) {
    throw GatewayError(GatewayErrorKind::config,
                       "mock replay file '" + config.replay_path.string() +
                           "': " + e.what());
  }
  return std::make_unique<MockProvider>(replay);
}

}  // namespace ipeval
