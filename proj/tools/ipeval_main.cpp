#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipeval/baseline_synth.hpp"
#include "ipeval/config.hpp"
#include "ipeval/pipeline.hpp"

namespace {

// Failures leave one machine-readable line on stderr; stdout stays
// clean for the stage log.
int fail(const std::string& kind, const std::string& message) {
  nlohmann::json err = {{"error", message}, {"kind", kind}};
  std::cerr << err.dump() << "\n";
  return 1;
}

void print_log(const ipeval::Pipeline& pipeline) {
  for (const std::string& line : pipeline.stage_log()) {
    std::cout << line << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus information-potential evaluation pipeline"};
  app.set_version_flag("--version", ipeval::tool_version());
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  std::string provider;
  std::vector<int> percentiles;
  std::string run_dir;

  app.add_option("--config", config_path, "run configuration JSON");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--provider", provider,
                 "override both provider roles with this configured provider");

  struct Command {
    const char* name;
    const char* description;
  };
  const Command stage_commands[] = {
      {"chunk", "slice corpus documents into fixed-size word chunks"},
      {"synth-baseline", "synthesize the lower-bound baseline corpus"},
      {"generate", "generate MCQs from chunks"},
      {"filter", "score and filter MCQs by alignment and plausibility"},
      {"evaluate", "evaluate questions under rotation, with and without context"},
      {"score", "aggregate verdicts into reports"},
      {"run", "all stages in order"},
  };
  for (const Command& c : stage_commands) {
    app.add_subcommand(c.name, c.description)->fallthrough();
  }
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "re-filter at several percentiles and tabulate metrics");
  sweep_cmd->fallthrough();
  CLI::Option* percentiles_opt =
      sweep_cmd->add_option("--percentiles", percentiles, "percentiles to sweep, e.g. 0,10,20")
          ->delimiter(',');
  CLI::App* run_cmd = app.get_subcommand("run");
  CLI::Option* run_percentiles_opt =
      run_cmd->add_option("--percentiles", percentiles, "percentiles to sweep, e.g. 0,10,20")
          ->delimiter(',');
  CLI::App* report_cmd = app.add_subcommand("report", "print a summary of a scored run");
  report_cmd->fallthrough();
  report_cmd->add_option("--run-dir", run_dir, "run output directory");

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  try {
    if (command == "report") {
      std::filesystem::path dir = run_dir;
      if (dir.empty()) {
        if (config_path.empty()) {
          return fail("config", "report needs --run-dir or --config");
        }
        dir = ipeval::RunConfig::from_file(config_path).output_dir;
      }
      std::cout << ipeval::summarize_run(dir);
      return 0;
    }

    if (config_path.empty()) return fail("config", "--config is required");
    ipeval::ConfigOverrides overrides;
    if (seed_opt->count() > 0) overrides.seed = seed;
    if (!provider.empty()) overrides.provider = provider;
    ipeval::RunConfig config = ipeval::RunConfig::from_file(config_path, overrides);
    ipeval::Pipeline pipeline(std::move(config));

    std::optional<std::vector<int>> sweep_override;
    if (percentiles_opt->count() > 0 || run_percentiles_opt->count() > 0) {
      sweep_override = percentiles;
    }

    if (command == "chunk") {
      pipeline.run_chunk();
    } else if (command == "synth-baseline") {
      pipeline.run_synth();
    } else if (command == "generate") {
      pipeline.run_generate();
    } else if (command == "filter") {
      pipeline.run_filter();
    } else if (command == "evaluate") {
      pipeline.run_evaluate();
    } else if (command == "score") {
      pipeline.run_score();
    } else if (command == "sweep") {
      pipeline.run_sweep(sweep_override);
    } else if (command == "run") {
      pipeline.run_all(sweep_override);
    }
    print_log(pipeline);
    std::cout << "run " << pipeline.run_id() << " at "
              << pipeline.config().output_dir.string() << "\n";
    return 0;
  } catch (const ipeval::ConfigError& e) {
    return fail("config", e.what());
  } catch (const ipeval::PipelineError& e) {
    return fail("pipeline", e.what());
  } catch (const ipeval::SubtopicParseError& e) {
    return fail("parse", e.what());
  } catch (const ipeval::GatewayError& e) {
    return fail("gateway", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
