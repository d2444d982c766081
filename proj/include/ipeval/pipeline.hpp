#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipeval/config.hpp"
#include "ipeval/prompts.hpp"

namespace ipeval {

struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stage orchestration over one output directory. Stages are idempotent:
// a stage whose input fingerprint and output hashes match the run
// manifest is skipped. Artifacts are written atomically, so an
// interrupted stage reruns cleanly.
//
// Layout under output_dir:
//   manifest.json                          run manifest
//   synth/{topics.jsonl,manifest.jsonl,docs/*.txt}
//   chunks.jsonl, corpus_errors.jsonl
//   mcqs.jsonl, mcq_rejects.jsonl
//   filter_scores.jsonl, filter_decisions.jsonl, filter_thresholds.json
//   eval/<model>/{records.jsonl,verdicts.jsonl,incomplete.jsonl}
//   report/<model>.json
//   sweep/<model>.csv
//   cache/                                 provider response cache
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);
  ~Pipeline();

  // Stage commands. Each requires its predecessor's artifacts and
  // throws PipelineError naming the missing stage otherwise.
  void run_synth();
  void run_chunk();
  void run_generate();
  void run_filter();
  void run_evaluate();
  void run_score();
  void run_sweep(const std::optional<std::vector<int>>& percentiles_override = std::nullopt);

  // All stages in order; the sweep runs only when percentiles are
  // configured or overridden.
  void run_all(const std::optional<std::vector<int>>& percentiles_override = std::nullopt);

  const RunConfig& config() const { return config_; }
  const std::string& run_id() const { return run_id_; }

  // One line per completed or skipped stage, for CLI logging.
  const std::vector<std::string>& stage_log() const { return stage_log_; }

 private:
  class GatewayPool;

  bool stage_fresh(const std::string& stage, const std::string& fingerprint) const;
  void record_stage(const std::string& stage, const std::string& fingerprint,
                    const std::map<std::string, std::string>& outputs);
  void note(const std::string& line);
  std::string artifact_hash(const std::filesystem::path& relative) const;
  std::filesystem::path out(const std::string& relative) const;
  void require_artifact(const std::string& relative, const std::string& producing_stage) const;
  LlmGateway& gateway(const std::string& provider_name);

  void evaluate_one_model(const std::string& model_id);
  void score_one_model(const std::string& model_id);
  void sweep_one_model(const std::string& model_id, const std::vector<int>& percentiles);

  std::filesystem::path corpus_manifest_path() const;
  bool evaluate_full_pool() const;

  RunConfig config_;
  PromptLibrary prompts_;
  std::string run_id_;
  nlohmann::json manifest_;
  std::unique_ptr<GatewayPool> gateways_;
  std::vector<std::string> stage_log_;
};

std::string compute_run_id(const RunConfig& config, const std::string& tool_version);

std::string tool_version();

// "report" command support: human-readable per-model summary of the
// reports found under run_dir.
std::string summarize_run(const std::filesystem::path& run_dir);

}  // namespace ipeval
