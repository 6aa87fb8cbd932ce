#include <CLI11.hpp>

#include <iostream>

#include "harbench/config.hpp"
#include "harbench/manifest.hpp"
#include "harbench/pipeline.hpp"
#include "harbench/util.hpp"

// hargpt-bench: stage-per-command benchmark driver. Stages read the previous
// stage's artifacts under the configured output directory, so the slow LLM
// inference step stays decoupled from training and evaluation.

namespace {

struct CommonOpts {
  std::string config_path;
  size_t max_windows = 0;
  bool balanced = false;
  bool dry_run = false;
};

harbench::RunConfig load_config(const CommonOpts& opts) {
  harbench::RunConfig config = harbench::RunConfig::from_file(opts.config_path);
  if (opts.max_windows > 0) config.max_windows = opts.max_windows;
  if (opts.balanced) config.balanced = true;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot IMU activity-recognition benchmark harness"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string stage_name;
  for (const char* name : {"ingest", "split", "prompt", "infer", "train", "eval", "report",
                           "verify-manifest"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "run config file")->required();
    sub->add_option("--max-windows", opts.max_windows,
                    "cap on windows sent to the backend (0 = all)");
    sub->add_flag("--balanced", opts.balanced, "per-class balanced window sampling");
    if (std::string(name) == "prompt") {
      sub->add_flag("--dry-run", opts.dry_run, "print one rendered prompt and exit");
    }
    sub->callback([name, &stage_name]() { stage_name = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    harbench::RunConfig config = load_config(opts);
    if (stage_name == "ingest") {
      harbench::cmd_ingest(config);
    } else if (stage_name == "split") {
      harbench::cmd_split(config);
    } else if (stage_name == "prompt") {
      harbench::cmd_prompt(config, opts.dry_run);
    } else if (stage_name == "infer") {
      harbench::cmd_infer(config);
    } else if (stage_name == "train") {
      harbench::cmd_train(config);
    } else if (stage_name == "eval") {
      harbench::cmd_eval(config);
    } else if (stage_name == "report") {
      harbench::cmd_report(config);
    } else if (stage_name == "verify-manifest") {
      auto manifest = harbench::RunManifest::load_or_create(config.out_dir);
      manifest.verify_artifacts(config.out_dir);
      std::cout << "manifest: " << manifest.artifact_digests.size()
                << " artifacts verified\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
