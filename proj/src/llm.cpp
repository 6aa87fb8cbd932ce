#include "harbench/llm.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "harbench/dataset.hpp"
#include "harbench/features.hpp"
#include "harbench/prompt.hpp"
#include "harbench/util.hpp"

namespace harbench {

using json = nlohmann::json;

const std::string& ChatRequest::user_content() const {
  const std::string* found = nullptr;
  for (const auto& m : messages) {
    if (m.role == "user") {
      if (found) fail("chat request must carry exactly one user message");
      found = &m.content;
    }
  }
  if (!found) fail("chat request must carry exactly one user message");
  return *found;
}

std::string record_to_jsonl(const InferenceRecord& r) {
  json j;
  j["content_hash"] = r.content_hash;
  j["model"] = r.model;
  j["temperature"] = r.temperature;
  j["max_tokens"] = r.max_tokens;
  j["response_text"] = r.response_text;
  j["empty_response"] = r.empty_response;
  j["latency_ms"] = r.latency_ms;
  j["timestamp"] = r.timestamp;
  j["backend_name"] = r.backend_name;
  j["attempts"] = r.attempts;
  return j.dump();
}

InferenceRecord record_from_jsonl(const std::string& line) {
  json j = json::parse(line);
  InferenceRecord r;
  r.content_hash = j.at("content_hash").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.max_tokens = j.at("max_tokens").get<int>();
  r.response_text = j.at("response_text").get<std::string>();
  r.empty_response = j.value("empty_response", false);
  r.latency_ms = j.value("latency_ms", 0.0);
  r.timestamp = j.value("timestamp", std::string());
  r.backend_name = j.value("backend_name", std::string());
  r.attempts = j.value("attempts", 1);
  if (r.response_text.empty() && !r.empty_response) {
    fail("inference record with empty response lacks the empty-response marker");
  }
  return r;
}

// ---------------------------------------------------------------------------
// ResponseCache

std::string ResponseCache::key(const std::string& hash, const std::string& model,
                               double temperature, int max_tokens) {
  return hash + "|" + model + "|" + format_fixed(temperature, 6) + "|" +
         std::to_string(max_tokens);
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      InferenceRecord r = record_from_jsonl(line);
      records_[key(r.content_hash, r.model, r.temperature, r.max_tokens)] = r;  // last wins
    }
  } else if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
}

std::optional<InferenceRecord> ResponseCache::lookup(const std::string& content_hash,
                                                     const std::string& model,
                                                     double temperature,
                                                     int max_tokens) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = records_.find(key(content_hash, model, temperature, max_tokens));
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::append(const InferenceRecord& record) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) fail("cannot append to cache: " + path_.string());
  out << record_to_jsonl(record) << '\n';
  out.flush();
  if (!out) fail("cache write failed: " + path_.string());
  records_[key(record.content_hash, record.model, record.temperature, record.max_tokens)] =
      record;
}

size_t ResponseCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return records_.size();
}

// ---------------------------------------------------------------------------
// HttpBackend

struct HttpBackend::Impl {
  BackendConfig config;
  std::string host;         // scheme://host[:port] for the client
  std::string path_prefix;  // anything after the authority
  std::string api_key;
  std::counting_semaphore<1 << 20> slots;

  explicit Impl(BackendConfig cfg)
      : config(std::move(cfg)), slots(std::max(1, config.max_concurrency)) {
    std::string url = config.base_url;
    size_t scheme = url.find("://");
    if (scheme == std::string::npos) fail("backend base_url needs a scheme: " + url);
    size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) {
      host = url;
    } else {
      host = url.substr(0, path);
      path_prefix = url.substr(path);
      while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();
    }
    if (!config.api_key_env_var.empty()) {
      const char* v = std::getenv(config.api_key_env_var.c_str());
      if (v) api_key = v;
    }
  }
};

HttpBackend::HttpBackend(BackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

CompletionResult HttpBackend::complete(const ChatRequest& request) {
  request.user_content();  // enforces the one-user-message invariant

  json body;
  body["model"] = request.model;
  body["messages"] = json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  std::string payload = body.dump();

  impl_->slots.acquire();
  struct Release {
    std::counting_semaphore<1 << 20>* s;
    ~Release() { s->release(); }
  } release{&impl_->slots};

  auto start = std::chrono::steady_clock::now();
  const int max_attempts = std::max(1, impl_->config.retry_max_attempts);
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    httplib::Client cli(impl_->host);
    cli.set_connection_timeout(0, impl_->config.timeout_ms * 1000LL);
    cli.set_read_timeout(0, impl_->config.timeout_ms * 1000LL);
    cli.set_write_timeout(0, impl_->config.timeout_ms * 1000LL);
    httplib::Headers headers;
    if (!impl_->api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + impl_->api_key);
    }
    auto res = cli.Post(impl_->path_prefix + "/v1/chat/completions", headers, payload,
                        "application/json");
    bool retryable = false;
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      retryable = true;
    } else if (res->status == 200) {
      std::string text;
      try {
        json reply = json::parse(res->body);
        text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const std::exception& e) {
        fail(std::string("malformed response body: ") + e.what());
      }
      auto elapsed = std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - start);
      return {text, attempt, elapsed.count(), false};
    } else if (res->status == 401 || res->status == 403) {
      fail("auth failure (HTTP " + std::to_string(res->status) + ")");
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      retryable = true;
    } else {
      fail("backend error (HTTP " + std::to_string(res->status) + "): " + res->body);
    }
    if (retryable && attempt < max_attempts) {
      long delay = impl_->config.retry_base_backoff_ms * (1L << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
  }
  fail("exhausted " + std::to_string(max_attempts) + " attempts; last error: " + last_error);
}

// ---------------------------------------------------------------------------
// ReplayBackend

CompletionResult ReplayBackend::complete(const ChatRequest& request) {
  std::string hash = sha256_hex(request.user_content());
  auto hit = cache_->lookup(hash, request.model, request.temperature, request.max_tokens);
  if (!hit) fail("replay: prompt not recorded (hash " + hash.substr(0, 12) + "...)");
  return {hit->response_text, 1, 0.0, true};
}

// ---------------------------------------------------------------------------
// HeuristicBackend

namespace {

struct PromptFacts {
  std::vector<std::vector<double>> accel;  // 3 channels when present
  double rate_hz = 10.0;
  std::vector<std::string> candidates;  // canonical
  bool direct = false;
};

std::vector<double> parse_number_list(std::string_view tail) {
  std::vector<double> out;
  std::string token;
  auto flush = [&]() {
    std::string t = trim(token);
    token.clear();
    if (t.empty()) return;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc{} && ptr == t.data() + t.size()) out.push_back(v);
  };
  for (char c : tail) {
    if (c == ',') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

PromptFacts read_prompt(const std::string& prompt_text) {
  PromptFacts facts;
  std::string lower = to_lower(prompt_text);

  static const char* stream_keys[3] = {"x-axis accelerometer:", "y-axis accelerometer:",
                                       "z-axis accelerometer:"};
  for (const char* keyword : stream_keys) {
    size_t pos = lower.find(keyword);
    if (pos == std::string::npos) continue;
    size_t begin = pos + std::strlen(keyword);
    size_t end = lower.find('\n', begin);
    if (end == std::string::npos) end = lower.size();
    auto values = parse_number_list(std::string_view(prompt_text).substr(begin, end - begin));
    if (!values.empty()) facts.accel.push_back(std::move(values));
  }
  if (facts.accel.empty()) fail("heuristic: no numeric block found in prompt");

  size_t rate_pos = lower.find("sampled at ");
  if (rate_pos != std::string::npos) {
    std::string_view tail = std::string_view(lower).substr(rate_pos + 11);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), v);
    if (ec == std::errc{} && v > 0.0) facts.rate_hz = v;
    (void)ptr;
  }

  size_t cat_pos = lower.find("categories:");
  if (cat_pos != std::string::npos) {
    size_t begin = cat_pos + 11;
    size_t end = lower.find_first_of(".\n?", begin);
    if (end == std::string::npos) end = lower.size();
    for (auto& part : split(lower.substr(begin, end - begin), ',')) {
      std::string label = canonical_label(part);
      if (!label.empty()) facts.candidates.push_back(label);
    }
  }
  facts.direct = lower.find(to_lower(kDirectClosing)) != std::string::npos;
  return facts;
}

double variance_of(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

double mean_of(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  return m / static_cast<double>(x.size());
}

// largest jump between means of consecutive eighths, over all channels
double step_change_score(const std::vector<std::vector<double>>& chans) {
  double best = 0.0;
  for (const auto& x : chans) {
    size_t seg = std::max<size_t>(1, x.size() / 8);
    double prev = 0.0;
    bool have_prev = false;
    for (size_t s = 0; s + seg <= x.size(); s += seg) {
      double m = 0.0;
      for (size_t i = s; i < s + seg; ++i) m += x[i];
      m /= static_cast<double>(seg);
      if (have_prev) best = std::max(best, std::fabs(m - prev));
      prev = m;
      have_prev = true;
    }
  }
  return best;
}

// fraction of non-DC spectral energy held by the strongest bin
double spectral_peak_ratio(const std::vector<double>& x) {
  size_t n = x.size();
  size_t half = n / 2;
  if (half < 2) return 0.0;
  double total = 0.0, peak = 0.0;
  for (size_t k = 1; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    for (size_t t = 0; t < n; ++t) {
      re += x[t] * std::cos(w * static_cast<double>(t));
      im -= x[t] * std::sin(w * static_cast<double>(t));
    }
    double mag2 = re * re + im * im;
    total += mag2;
    peak = std::max(peak, mag2);
  }
  return total > 0.0 ? peak / total : 0.0;
}

bool has_candidate(const PromptFacts& f, const std::string& label) {
  return std::find(f.candidates.begin(), f.candidates.end(), label) != f.candidates.end();
}

const char* signature_sentence(const std::string& label) {
  if (label == "sleep") return "an almost flat, low-variance signal indicates sleep";
  if (label == "sit-stand")
    return "abrupt shifts between otherwise stable plateaus indicate sit-stand";
  if (label == "walking") return "rhythmic oscillation around 1-2 Hz indicates walking";
  if (label == "bicycling")
    return "smooth, faster periodicity above 2 Hz indicates bicycling";
  if (label == "upstairs")
    return "a sustained positive vertical bias with a stepping rhythm indicates upstairs";
  if (label == "downstairs")
    return "a sustained negative vertical bias with a stepping rhythm indicates downstairs";
  return "no stock signature is available for this activity";
}

}  // namespace

std::string heuristic_classify(const std::string& prompt_text) {
  PromptFacts facts = read_prompt(prompt_text);

  double mean_var = 0.0;
  for (const auto& x : facts.accel) mean_var += variance_of(x);
  mean_var /= static_cast<double>(facts.accel.size());

  // the vertical channel is the last accelerometer axis in the block order
  const std::vector<double>& vertical = facts.accel.back();
  double vertical_drift = mean_of(vertical) - 1.0;  // rest level is 1 g

  // the most energetic channel carries the motion signature
  size_t lead = 0;
  for (size_t c = 1; c < facts.accel.size(); ++c) {
    if (variance_of(facts.accel[c]) > variance_of(facts.accel[lead])) lead = c;
  }
  double dom_freq = dominant_frequency(facts.accel[lead], facts.rate_hz);
  double peak_ratio = spectral_peak_ratio(facts.accel[lead]);
  double step_score = step_change_score(facts.accel);

  bool stairs_problem = !facts.candidates.empty() &&
                        std::all_of(facts.candidates.begin(), facts.candidates.end(),
                                    [](const std::string& l) {
                                      return l == "upstairs" || l == "downstairs";
                                    });

  std::string choice;
  if (facts.candidates.empty()) {
    // nothing to choose from: deterministic perfunctory reply, no label
    return "The recording shows structured motion, but the question does not list the "
           "possible activities, so no category can be chosen. Consider re-asking with "
           "explicit options.";
  }

  if (facts.direct) {
    // direct output: coarse amplitude statistics only, no spectral or trend
    // analysis behind the answer
    if (stairs_problem) {
      choice = mean_var > 0.25 ? "upstairs" : "downstairs";
    } else if (mean_var < 0.01 && has_candidate(facts, "sleep")) {
      choice = "sleep";
    } else if (mean_var < 0.3 && has_candidate(facts, "bicycling")) {
      choice = "bicycling";
    } else if (has_candidate(facts, "walking")) {
      choice = "walking";
    } else {
      choice = facts.candidates.front();
    }
    return "The activity is " + choice + ".";
  }

  if (stairs_problem) {
    choice = vertical_drift > 0.0 ? "upstairs" : "downstairs";
  } else if (mean_var < 0.01 && has_candidate(facts, "sleep")) {
    choice = "sleep";
  } else if (peak_ratio > 0.25 && dom_freq >= 0.8) {  // gait-band periodicity
    if (dom_freq > 2.0 && has_candidate(facts, "bicycling")) {
      choice = "bicycling";
    } else if (has_candidate(facts, "walking")) {
      choice = "walking";
    } else if (has_candidate(facts, "bicycling")) {
      choice = "bicycling";
    } else {
      choice = facts.candidates.front();
    }
  } else if (has_candidate(facts, "sit-stand")) {
    choice = "sit-stand";
  } else {
    choice = facts.candidates.front();
  }

  std::string part2;
  for (size_t i = 0; i < facts.candidates.size(); ++i) {
    if (i > 0) part2 += "; ";
    part2 += signature_sentence(facts.candidates[i]);
  }

  std::string text;
  text += "Part 1: The question provides raw accelerometer readings sampled at " +
          format_fixed(facts.rate_hz, 0) + " Hz and asks which of the listed activities "
          "generated them.\n";
  text += "Part 2: Typical signatures: " + part2 + ".\n";
  text += "Part 3: Measured statistics: mean per-axis variance " +
          format_fixed(mean_var, 3) + ", strongest spectral peak at " +
          format_fixed(dom_freq, 2) + " Hz holding " + format_fixed(peak_ratio, 2) +
          " of the non-DC energy, largest plateau shift " + format_fixed(step_score, 3) +
          ", vertical drift " + format_fixed(vertical_drift, 3) + ".\n";
  text += "Part 4: Combining the measured statistics with the signatures above, "
          "the person is most likely " + choice + ".";
  return text;
}

CompletionResult HeuristicBackend::complete(const ChatRequest& request) {
  auto start = std::chrono::steady_clock::now();
  std::string text = heuristic_classify(request.user_content());
  auto elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
  return {text, 1, elapsed.count(), false};
}

// ---------------------------------------------------------------------------

CompletionResult complete_cached(Backend& backend, ResponseCache& cache,
                                 const ChatRequest& request,
                                 const std::string& content_hash) {
  auto hit = cache.lookup(content_hash, request.model, request.temperature,
                          request.max_tokens);
  if (hit) return {hit->response_text, 0, 0.0, true};

  CompletionResult result = backend.complete(request);
  InferenceRecord record;
  record.content_hash = content_hash;
  record.model = request.model;
  record.temperature = request.temperature;
  record.max_tokens = request.max_tokens;
  record.response_text = result.text;
  record.empty_response = result.text.empty();
  record.latency_ms = result.latency_ms;
  record.timestamp = iso8601_utc_now();
  record.backend_name = backend.name();
  record.attempts = result.attempts;
  cache.append(record);
  return result;
}

}  // namespace harbench
