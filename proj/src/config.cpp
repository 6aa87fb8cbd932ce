#include "harbench/config.hpp"

#include <charconv>

#include "harbench/baselines.hpp"
#include "harbench/preprocess.hpp"
#include "harbench/prompt.hpp"
#include "harbench/util.hpp"

namespace harbench {

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig cfg;
  std::string section;
  size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) {
      // keep # inside quotes
      size_t q1 = line.find('"');
      if (q1 == std::string::npos || hash < q1) line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("config line " + std::to_string(line_no) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail("config line " + std::to_string(line_no) + ": empty key or value");
    }
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

KvConfig KvConfig::parse_file(const std::filesystem::path& path) {
  return parse(read_file(path));
}

bool KvConfig::has(const std::string& section, const std::string& key) const {
  return values_.count(section + "." + key) > 0;
}

std::string KvConfig::get_string(const std::string& section, const std::string& key,
                                 const std::string& fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

long KvConfig::get_int(const std::string& section, const std::string& key,
                       long fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  long v = 0;
  const std::string& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail("config: " + section + "." + key + " is not an integer: " + s);
  }
  return v;
}

double KvConfig::get_real(const std::string& section, const std::string& key,
                          double fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  const std::string& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail("config: " + section + "." + key + " is not a number: " + s);
  }
  return v;
}

bool KvConfig::get_bool(const std::string& section, const std::string& key,
                        bool fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  fail("config: " + section + "." + key + " must be true or false");
}

std::vector<long> KvConfig::get_int_array(const std::string& section, const std::string& key,
                                          const std::vector<long>& fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    fail("config: " + section + "." + key + " must be a [..] array");
  }
  std::vector<long> out;
  for (auto& part : split(v.substr(1, v.size() - 2), ',')) {
    std::string p = trim(part);
    if (p.empty()) continue;
    long x = 0;
    auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), x);
    if (ec != std::errc{} || ptr != p.data() + p.size()) {
      fail("config: " + section + "." + key + " has a non-integer element: " + p);
    }
    out.push_back(x);
  }
  return out;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  return from_kv(KvConfig::parse_file(path));
}

RunConfig RunConfig::from_kv(const KvConfig& kv) {
  RunConfig c;
  c.dataset_name = kv.get_string("dataset", "name", c.dataset_name);
  c.dataset_path = kv.get_string("dataset", "path", c.dataset_path);

  c.synth_users = static_cast<size_t>(kv.get_int("synth", "users",
                                                 static_cast<long>(c.synth_users)));
  c.synth_seconds_per_label =
      kv.get_real("synth", "seconds_per_label", c.synth_seconds_per_label);
  c.synth_rate_hz = kv.get_real("synth", "sample_rate_hz", c.synth_rate_hz);
  c.synth_seed = static_cast<uint64_t>(kv.get_int("synth", "seed",
                                                  static_cast<long>(c.synth_seed)));

  c.target_hz = kv.get_real("preprocess", "target_hz", c.target_hz);
  c.window_s = kv.get_real("preprocess", "window_s", c.window_s);
  c.stride_s = kv.get_real("preprocess", "stride_s", c.stride_s);
  auto ratios = kv.get_int_array("preprocess", "ratios",
                                 {c.split_ratios[0], c.split_ratios[1], c.split_ratios[2],
                                  c.split_ratios[3]});
  if (ratios.size() != 4) fail("config: preprocess.ratios needs exactly 4 integers");
  for (size_t i = 0; i < 4; ++i) c.split_ratios[i] = static_cast<int>(ratios[i]);
  c.split_seed = static_cast<uint64_t>(kv.get_int("preprocess", "seed",
                                                  static_cast<long>(c.split_seed)));

  c.prompt_variant = kv.get_string("prompt", "variant", c.prompt_variant);
  c.prompt_decimals = static_cast<int>(kv.get_int("prompt", "decimals", c.prompt_decimals));
  c.prompt_template_path = kv.get_string("prompt", "template_path", c.prompt_template_path);
  c.prompt_shuffle_candidates =
      kv.get_bool("prompt", "shuffle_candidates", c.prompt_shuffle_candidates);

  c.backend_name = kv.get_string("backend", "name", c.backend_name);
  c.backend_model = kv.get_string("backend", "model", c.backend_model);
  c.backend_http.base_url = kv.get_string("backend", "base_url", c.backend_http.base_url);
  c.backend_http.api_key_env_var =
      kv.get_string("backend", "api_key_env", c.backend_http.api_key_env_var);
  c.backend_http.max_concurrency = static_cast<int>(
      kv.get_int("backend", "max_concurrency", c.backend_http.max_concurrency));
  c.backend_http.retry_max_attempts = static_cast<int>(
      kv.get_int("backend", "retry_max_attempts", c.backend_http.retry_max_attempts));
  c.backend_http.retry_base_backoff_ms = static_cast<int>(kv.get_int(
      "backend", "retry_base_backoff_ms", c.backend_http.retry_base_backoff_ms));
  c.backend_http.timeout_ms =
      static_cast<int>(kv.get_int("backend", "timeout_ms", c.backend_http.timeout_ms));
  c.replay_path = kv.get_string("backend", "replay_path", c.replay_path);
  c.temperature = kv.get_real("backend", "temperature", c.temperature);
  c.max_tokens = static_cast<int>(kv.get_int("backend", "max_tokens", c.max_tokens));

  c.infer_partition = kv.get_string("infer", "partition", c.infer_partition);
  c.max_windows = static_cast<size_t>(kv.get_int("infer", "max_windows",
                                                 static_cast<long>(c.max_windows)));
  c.balanced = kv.get_bool("infer", "balanced", c.balanced);

  c.train_seed = static_cast<uint64_t>(kv.get_int("train", "seed",
                                                  static_cast<long>(c.train_seed)));
  std::string models = kv.get_string("train", "models", "");
  if (!models.empty()) {
    c.train_models.clear();
    for (auto& m : split(models, ',')) {
      std::string name = trim(m);
      if (!name.empty()) c.train_models.push_back(name);
    }
  }
  c.rf_trees = static_cast<int>(kv.get_int("train", "rf_trees", c.rf_trees));
  c.svm_c = kv.get_real("train", "svm_c", c.svm_c);
  c.svm_gamma = kv.get_real("train", "svm_gamma", c.svm_gamma);
  c.net_epochs = static_cast<int>(kv.get_int("train", "epochs", c.net_epochs));
  c.net_batch = static_cast<int>(kv.get_int("train", "batch_size", c.net_batch));
  c.net_patience = static_cast<int>(kv.get_int("train", "patience", c.net_patience));
  c.net_lr = kv.get_real("train", "learning_rate", c.net_lr);
  c.lstm_hidden = static_cast<size_t>(kv.get_int("train", "lstm_hidden",
                                                 static_cast<long>(c.lstm_hidden)));
  c.class_weights = kv.get_bool("train", "class_weights", c.class_weights);

  c.eval_mode = kv.get_string("eval", "mode", c.eval_mode);
  c.out_dir = kv.get_string("output", "dir", c.out_dir.string());
  c.validate();
  return c;
}

void RunConfig::validate() const {
  static const std::vector<std::string> known_datasets = {"capture24", "hhar", "synth4",
                                                          "synth2"};
  bool known = false;
  for (const auto& n : known_datasets) known = known || n == dataset_name;
  if (!known) fail("config: unknown dataset name '" + dataset_name + "'");
  if (dataset_name == "capture24" || dataset_name == "hhar") {
    if (dataset_path.empty()) fail("config: dataset.path is required for " + dataset_name);
    if (!std::filesystem::exists(dataset_path)) {
      fail("config: dataset.path does not exist: " + dataset_path);
    }
  }
  if (!prompt_template_path.empty() && !std::filesystem::exists(prompt_template_path)) {
    fail("config: prompt.template_path does not exist: " + prompt_template_path);
  }
  long ratio_sum = 0;
  for (int r : split_ratios) {
    if (r < 0) fail("config: negative split ratio");
    ratio_sum += r;
  }
  if (ratio_sum == 0) fail("config: split ratios must not all be zero");
  if (target_hz <= 0) fail("config: target_hz must be positive");
  if (window_s <= 0 || stride_s <= 0) fail("config: window_s and stride_s must be positive");
  if (prompt_decimals < 0 || prompt_decimals > 6) fail("config: decimals must be in 0..6");
  prompt_variant_from_name(prompt_variant);
  partition_from_name(infer_partition);
  if (backend_name != "heuristic" && backend_name != "http" && backend_name != "replay") {
    fail("config: unknown backend '" + backend_name + "'");
  }
  if (backend_name == "http" && backend_http.base_url.empty()) {
    fail("config: backend.base_url is required for the http backend");
  }
  if (backend_name == "replay" && replay_path.empty()) {
    fail("config: backend.replay_path is required for the replay backend");
  }
  if (eval_mode != "abstain" && eval_mode != "strict" && eval_mode != "both") {
    fail("config: eval.mode must be abstain, strict or both");
  }
  for (const auto& m : train_models) model_kind_from_name(m);
  if (out_dir.empty()) fail("config: output.dir must not be empty");
}

std::string RunConfig::resolved_text() const {
  std::string models;
  for (size_t i = 0; i < train_models.size(); ++i) {
    if (i > 0) models += ",";
    models += train_models[i];
  }
  std::string s;
  s += "[dataset]\n";
  s += "name = \"" + dataset_name + "\"\n";
  s += "path = \"" + dataset_path + "\"\n";
  s += "[synth]\n";
  s += "users = " + std::to_string(synth_users) + "\n";
  s += "seconds_per_label = " + format_fixed(synth_seconds_per_label, 3) + "\n";
  s += "sample_rate_hz = " + format_fixed(synth_rate_hz, 3) + "\n";
  s += "seed = " + std::to_string(synth_seed) + "\n";
  s += "[preprocess]\n";
  s += "target_hz = " + format_fixed(target_hz, 3) + "\n";
  s += "window_s = " + format_fixed(window_s, 3) + "\n";
  s += "stride_s = " + format_fixed(stride_s, 3) + "\n";
  s += "ratios = [" + std::to_string(split_ratios[0]) + ", " +
       std::to_string(split_ratios[1]) + ", " + std::to_string(split_ratios[2]) + ", " +
       std::to_string(split_ratios[3]) + "]\n";
  s += "seed = " + std::to_string(split_seed) + "\n";
  s += "[prompt]\n";
  s += "variant = \"" + prompt_variant + "\"\n";
  s += "decimals = " + std::to_string(prompt_decimals) + "\n";
  s += "template_path = \"" + prompt_template_path + "\"\n";
  s += std::string("shuffle_candidates = ") + (prompt_shuffle_candidates ? "true" : "false") +
       "\n";
  s += "[backend]\n";
  s += "name = \"" + backend_name + "\"\n";
  s += "model = \"" + backend_model + "\"\n";
  s += "base_url = \"" + backend_http.base_url + "\"\n";
  s += "api_key_env = \"" + backend_http.api_key_env_var + "\"\n";
  s += "max_concurrency = " + std::to_string(backend_http.max_concurrency) + "\n";
  s += "retry_max_attempts = " + std::to_string(backend_http.retry_max_attempts) + "\n";
  s += "retry_base_backoff_ms = " + std::to_string(backend_http.retry_base_backoff_ms) +
       "\n";
  s += "timeout_ms = " + std::to_string(backend_http.timeout_ms) + "\n";
  s += "replay_path = \"" + replay_path + "\"\n";
  s += "temperature = " + format_fixed(temperature, 3) + "\n";
  s += "max_tokens = " + std::to_string(max_tokens) + "\n";
  s += "[infer]\n";
  s += "partition = \"" + infer_partition + "\"\n";
  s += "max_windows = " + std::to_string(max_windows) + "\n";
  s += std::string("balanced = ") + (balanced ? "true" : "false") + "\n";
  s += "[train]\n";
  s += "seed = " + std::to_string(train_seed) + "\n";
  s += "models = \"" + models + "\"\n";
  s += "rf_trees = " + std::to_string(rf_trees) + "\n";
  s += "svm_c = " + format_fixed(svm_c, 6) + "\n";
  s += "svm_gamma = " + format_fixed(svm_gamma, 6) + "\n";
  s += "epochs = " + std::to_string(net_epochs) + "\n";
  s += "batch_size = " + std::to_string(net_batch) + "\n";
  s += "patience = " + std::to_string(net_patience) + "\n";
  s += "learning_rate = " + format_fixed(net_lr, 6) + "\n";
  s += "lstm_hidden = " + std::to_string(lstm_hidden) + "\n";
  s += std::string("class_weights = ") + (class_weights ? "true" : "false") + "\n";
  s += "[eval]\n";
  s += "mode = \"" + eval_mode + "\"\n";
  s += "[output]\n";
  s += "dir = \"" + out_dir.string() + "\"\n";
  return s;
}

}  // namespace harbench
