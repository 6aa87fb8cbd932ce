#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "harbench/llm.hpp"

namespace harbench {

/// Key/value config file: [section] headers, `key = value` lines, `#`
/// comments; values are quoted strings, integers, reals, booleans, or
/// bracketed integer arrays.
class KvConfig {
 public:
  static KvConfig parse(const std::string& text);
  static KvConfig parse_file(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  double get_real(const std::string& section, const std::string& key,
                  double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<long> get_int_array(const std::string& section, const std::string& key,
                                  const std::vector<long>& fallback) const;

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> raw token
};

struct RunConfig {
  // dataset
  std::string dataset_name = "synth4";  // capture24 | hhar | synth4 | synth2
  std::string dataset_path;             // loader root, unused by synth
  // synth
  size_t synth_users = 8;
  double synth_seconds_per_label = 120.0;
  double synth_rate_hz = 50.0;
  uint64_t synth_seed = 7;
  // preprocess
  double target_hz = 10.0;
  double window_s = 10.0;
  double stride_s = 10.0;
  std::array<int, 4> split_ratios = {4, 1, 1, 2};
  uint64_t split_seed = 7;
  // prompt
  std::string prompt_variant = "cot";
  int prompt_decimals = 3;
  std::string prompt_template_path;
  bool prompt_shuffle_candidates = false;  // ablation knob; schema order otherwise
  // backend
  std::string backend_name = "heuristic";  // heuristic | http | replay
  std::string backend_model = "heuristic-v1";
  BackendConfig backend_http;
  std::string replay_path;  // cache served by the replay backend
  double temperature = 0.0;
  int max_tokens = 1024;
  // infer
  std::string infer_partition = "test_unseen";
  size_t max_windows = 0;  // 0 = all
  bool balanced = false;
  // train
  uint64_t train_seed = 1;
  std::vector<std::string> train_models = {"rf", "svm", "dcnn", "lstm"};
  int rf_trees = 100;
  double svm_c = 1.0;
  double svm_gamma = 0.0;
  int net_epochs = 30;
  int net_batch = 32;
  int net_patience = 5;
  double net_lr = 1e-3;
  size_t lstm_hidden = 64;
  bool class_weights = false;
  // eval
  std::string eval_mode = "both";  // abstain | strict | both
  // output
  std::filesystem::path out_dir = "out";

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_kv(const KvConfig& kv);
  void validate() const;
  /// Every resolved value, re-parseable by from_file.
  std::string resolved_text() const;
};

}  // namespace harbench
