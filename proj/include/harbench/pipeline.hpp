#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "harbench/config.hpp"
#include "harbench/dataset.hpp"
#include "harbench/eval.hpp"
#include "harbench/parse.hpp"
#include "harbench/preprocess.hpp"
#include "harbench/prompt.hpp"

namespace harbench {

/// One scored prompt/response exchange, persisted by cmd_infer.
struct InferOutcome {
  WindowRef ref;
  std::string variant;
  std::string content_hash;
  ParsedAnswer answer;
  std::string model;
  std::string backend;
};

std::string outcome_to_jsonl(const InferOutcome& o);
InferOutcome outcome_from_jsonl(const std::string& line, const LabelSchema& schema);

/// Builds (or loads) the configured dataset directly, without artifacts.
Dataset acquire_dataset(const RunConfig& config);

// Stage commands. Each reads its inputs from earlier stage artifacts under
// config.out_dir, writes its own outputs and updates manifest.json.
void cmd_ingest(const RunConfig& config);
void cmd_split(const RunConfig& config);
void cmd_prompt(const RunConfig& config, bool dry_run);
void cmd_infer(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_report(const RunConfig& config);

// Shared plumbing, exposed for tests.
Dataset load_ingested(const RunConfig& config);
std::vector<SensorWindow> windows_for_partition(const RunConfig& config,
                                                const Dataset& dataset,
                                                const SplitAssignment& split,
                                                Partition partition);

}  // namespace harbench
