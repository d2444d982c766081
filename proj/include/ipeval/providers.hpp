#pragma once

#include <memory>

#include <json.hpp>

#include "ipeval/llm_gateway.hpp"

namespace ipeval {

// Deterministic scripted provider for offline runs and tests.
//
// Replay file schema:
//   {
//     "embedding_dim": 16,
//     "responses": {"<sha256 of canonical request>": "verbatim text", ...},
//     "embeddings": [{"text": "...", "values": [..]}, ...],
//     "rules": [
//       {"when_tag": "mcq_generation", "behavior": "synth_mcqs",
//        "params": {"count": 10}},
//       {"when_tag": "eval_direct", "behavior": "answer_marker",
//        "params": {"known_fraction": 0.6}},
//       {"when_contains": "substring", "behavior": "fixed",
//        "params": {"text": "..."}}
//     ],
//     "default": {"behavior": "fixed", "params": {"text": "..."}}
//   }
//
// Resolution order: exact hash table, then first matching rule, then
// default. No match is a content error.
//
// Behaviors:
//   fixed          params.text verbatim
//   echo           the prompt itself
//   synth_mcqs     params.count well-formed MCQ blocks derived from the
//                  prompt; correct options carry a "-key" marker and
//                  quote words from the prompt so filter scores vary
//   answer_marker  finds the option line whose text carries "-key"; a
//                  per-question deterministic coin with params.known_fraction
//                  (default 1.0) decides correct vs a fixed wrong letter
//   answer_fixed   params.letter, always
//   subtopics      five numbered subtopics derived from the topic
//   chapter        params.words (default 600) deterministic words
//
// Mock embeddings (when not listed in "embeddings") are derived from
// sha256(model_id, text), so equal texts always embed equally.
std::unique_ptr<Provider> make_mock_provider(const ProviderConfig& config);
std::unique_ptr<Provider> make_mock_provider_from_json(const nlohmann::json& replay);

// OpenAI-compatible chat-completion + embeddings endpoints over HTTPS.
std::unique_ptr<Provider> make_http_provider(const ProviderConfig& config);

}  // namespace ipeval
