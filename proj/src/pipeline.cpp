#include "harbench/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "harbench/baselines.hpp"
#include "harbench/llm.hpp"
#include "harbench/manifest.hpp"
#include "harbench/rng.hpp"
#include "harbench/util.hpp"

namespace harbench {

using json = nlohmann::ordered_json;

namespace {

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void finish_stage(const RunConfig& config, const std::string& stage, const StageTimer& timer,
                  const std::vector<std::filesystem::path>& artifacts,
                  const std::string& dataset_fingerprint = "") {
  RunManifest manifest = RunManifest::load_or_create(config.out_dir);
  manifest.resolved_config = config.resolved_text();
  if (!dataset_fingerprint.empty()) manifest.dataset_fingerprint = dataset_fingerprint;
  manifest.record_stage(config.out_dir, stage, timer.elapsed_ms(), artifacts);
  manifest.save(config.out_dir);
}

std::vector<std::filesystem::path> files_under(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Dataset acquire_dataset(const RunConfig& config) {
  if (config.dataset_name == "capture24") {
    return load_capture24(config.dataset_path, capture24_schema());
  }
  if (config.dataset_name == "hhar") {
    return load_hhar(config.dataset_path, hhar_schema());
  }
  if (config.dataset_name == "synth4") {
    return synth_corpus(synth_spec_capture24_like(config.synth_users,
                                                  config.synth_seconds_per_label,
                                                  config.synth_rate_hz),
                        config.synth_seed);
  }
  return synth_corpus(synth_spec_hhar_like(config.synth_users,
                                           config.synth_seconds_per_label,
                                           config.synth_rate_hz),
                      config.synth_seed);
}

Dataset load_ingested(const RunConfig& config) {
  auto meta_path = config.out_dir / "ingest" / "meta.json";
  if (!std::filesystem::exists(meta_path)) {
    fail("ingest artifacts not found; run the ingest stage first");
  }
  json meta = json::parse(read_file(meta_path));
  bool gyro = meta.at("has_gyro").get<bool>();
  LabelSchema schema;
  schema.dataset_name = meta.at("schema").get<std::string>();
  for (const auto& l : meta.at("labels")) schema.labels.push_back(l.get<std::string>());
  auto dir = config.out_dir / "ingest" / "recordings";
  Dataset ds = gyro ? load_hhar(dir, schema) : load_capture24(dir, schema);
  ds.accel_unit = meta.value("accel_unit", "unspecified");
  return ds;
}

void cmd_ingest(const RunConfig& config) {
  StageTimer timer;
  Dataset source = acquire_dataset(config);

  auto rec_dir = config.out_dir / "ingest" / "recordings";
  std::filesystem::remove_all(rec_dir);
  save_dataset_csv(source, rec_dir);

  // the canonical dataset is the written form; fingerprint what later
  // stages will actually read
  Dataset canonical = source.recordings.front().has_gyro
                          ? load_hhar(rec_dir, source.schema)
                          : load_capture24(rec_dir, source.schema);
  std::string fingerprint = canonical.fingerprint();

  json meta;
  meta["schema"] = source.schema.dataset_name;
  meta["labels"] = source.schema.labels;
  meta["has_gyro"] = source.recordings.front().has_gyro;
  meta["accel_unit"] = source.accel_unit;
  meta["n_recordings"] = source.recordings.size();
  meta["fingerprint"] = fingerprint;
  json dropped = json::object();
  for (const auto& [label, count] : source.dropped_rows) dropped[label] = count;
  meta["dropped_rows"] = dropped;
  write_file(config.out_dir / "ingest" / "meta.json", meta.dump(2) + "\n");

  auto artifacts = files_under(config.out_dir / "ingest");
  finish_stage(config, "ingest", timer, artifacts, fingerprint);
  std::cout << "ingest: " << source.recordings.size() << " recordings, fingerprint "
            << fingerprint.substr(0, 12) << "\n";
}

void cmd_split(const RunConfig& config) {
  StageTimer timer;
  Dataset ds = load_ingested(config);
  SplitSpec spec;
  spec.ratios = config.split_ratios;
  spec.seed = config.split_seed;
  SplitAssignment split = split_users(ds, spec);
  auto path = config.out_dir / "split" / "split.json";
  write_file(path, split_to_json(split));
  {
    RunManifest manifest = RunManifest::load_or_create(config.out_dir);
    manifest.split_assignment.clear();
    for (const auto& [user, p] : split.by_user) {
      manifest.split_assignment[user] = partition_name(p);
    }
    manifest.save(config.out_dir);
  }
  finish_stage(config, "split", timer, {path});
  auto sizes = split.sizes();
  std::cout << "split: train=" << sizes[0] << " val=" << sizes[1]
            << " test_seen=" << sizes[2] << " test_unseen=" << sizes[3] << "\n";
}

namespace {

SplitAssignment load_split(const RunConfig& config) {
  auto path = config.out_dir / "split" / "split.json";
  if (!std::filesystem::exists(path)) {
    fail("split artifacts not found; run the split stage first");
  }
  return split_from_json(read_file(path));
}

PromptTemplate template_for(const RunConfig& config) {
  PromptVariant variant = prompt_variant_from_name(config.prompt_variant);
  if (config.prompt_template_path.empty()) return default_template(variant);
  return load_template(read_file(config.prompt_template_path), variant);
}

PromptMetadata metadata_for(const RunConfig& config, const Dataset& ds,
                            const SensorWindow& w) {
  PromptMetadata md;
  md.placement = placement_name(ds.recordings[w.origin.recording_index].placement);
  md.rate_hz = w.rate_hz;
  md.duration_s = static_cast<double>(w.n) / w.rate_hz;
  md.candidate_labels = ds.schema.labels;
  if (config.prompt_shuffle_candidates) {
    // per-window seeded order so the ablation stays reproducible
    std::mt19937_64 gen(seed_for(config.split_seed,
                                 w.user_id + "/" + std::to_string(w.origin.start_index)));
    shuffle_deterministic(md.candidate_labels, gen);
  }
  return md;
}

// seeded per-class cap; keeps chronological order inside each class
std::vector<SensorWindow> balanced_sample(std::vector<SensorWindow> windows,
                                          const LabelSchema& schema, size_t max_windows,
                                          uint64_t seed) {
  if (max_windows == 0 || windows.size() <= max_windows) return windows;
  size_t per_class = std::max<size_t>(1, max_windows / schema.size());
  std::vector<std::vector<size_t>> by_class(schema.size());
  for (size_t i = 0; i < windows.size(); ++i) {
    by_class[static_cast<size_t>(windows[i].label_id)].push_back(i);
  }
  std::vector<size_t> keep;
  for (size_t k = 0; k < by_class.size(); ++k) {
    auto& idx = by_class[k];
    std::mt19937_64 gen(seed_for(seed, "balanced-" + std::to_string(k)));
    shuffle_deterministic(idx, gen);
    size_t take = std::min(per_class, idx.size());
    idx.resize(take);
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  std::vector<SensorWindow> out;
  out.reserve(keep.size());
  for (size_t i : keep) out.push_back(std::move(windows[i]));
  return out;
}

std::unique_ptr<Backend> make_backend(const RunConfig& config,
                                      std::shared_ptr<ResponseCache> replay_cache) {
  if (config.backend_name == "heuristic") return std::make_unique<HeuristicBackend>();
  if (config.backend_name == "http") return std::make_unique<HttpBackend>(config.backend_http);
  return std::make_unique<ReplayBackend>(std::move(replay_cache));
}

}  // namespace

std::vector<SensorWindow> windows_for_partition(const RunConfig& config,
                                                const Dataset& dataset,
                                                const SplitAssignment& split,
                                                Partition partition) {
  std::vector<SensorWindow> out;
  for (size_t r = 0; r < dataset.recordings.size(); ++r) {
    const Recording& rec = dataset.recordings[r];
    if (split.partition_of(rec.user_id) != partition) continue;
    Recording low = resample(rec, config.target_hz);
    auto ws = make_windows(low, dataset.schema, r, config.window_s, config.stride_s);
    out.insert(out.end(), std::make_move_iterator(ws.begin()),
               std::make_move_iterator(ws.end()));
  }
  return out;
}

void cmd_prompt(const RunConfig& config, bool dry_run) {
  StageTimer timer;
  Dataset ds = load_ingested(config);
  SplitAssignment split = load_split(config);
  PromptTemplate tmpl = template_for(config);
  auto windows = windows_for_partition(config, ds, split,
                                       partition_from_name(config.infer_partition));
  if (windows.empty()) fail("prompt: no windows in partition " + config.infer_partition);
  if (config.balanced) {
    windows = balanced_sample(std::move(windows), ds.schema, config.max_windows,
                              config.split_seed);
  } else if (config.max_windows > 0 && windows.size() > config.max_windows) {
    windows.resize(config.max_windows);
  }

  if (dry_run) {
    RenderedPrompt rp = render_prompt(tmpl, windows.front(), metadata_for(config, ds, windows.front()),
                                      config.prompt_decimals);
    std::cout << rp.text << "\n";
    return;
  }

  std::string out;
  for (const auto& w : windows) {
    RenderedPrompt rp = render_prompt(tmpl, w, metadata_for(config, ds, w),
                                      config.prompt_decimals);
    json j;
    j["user"] = rp.window_ref.user_id;
    j["recording_index"] = rp.window_ref.recording_index;
    j["start_index"] = rp.window_ref.start_index;
    j["truth"] = rp.window_ref.truth_label;
    j["variant"] = prompt_variant_name(rp.variant);
    j["content_hash"] = rp.content_hash;
    j["text"] = rp.text;
    out += j.dump() + "\n";
  }
  auto path = config.out_dir / "prompt" / "prompts.jsonl";
  write_file(path, out);
  finish_stage(config, "prompt", timer, {path});
  std::cout << "prompt: rendered " << windows.size() << " prompts\n";
}

std::string outcome_to_jsonl(const InferOutcome& o) {
  json j;
  j["user"] = o.ref.user_id;
  j["recording_index"] = o.ref.recording_index;
  j["start_index"] = o.ref.start_index;
  j["truth"] = o.ref.truth_label;
  j["variant"] = o.variant;
  j["content_hash"] = o.content_hash;
  switch (o.answer.kind) {
    case AnswerKind::label:
      j["kind"] = "label";
      j["label"] = o.answer.label;
      break;
    case AnswerKind::ambiguous:
      j["kind"] = "ambiguous";
      j["candidates"] = o.answer.candidates;
      break;
    case AnswerKind::no_answer:
      j["kind"] = "no_answer";
      break;
  }
  j["evidence"] = {o.answer.evidence_begin, o.answer.evidence_end};
  j["model"] = o.model;
  j["backend"] = o.backend;
  return j.dump();
}

InferOutcome outcome_from_jsonl(const std::string& line, const LabelSchema& schema) {
  json j = json::parse(line);
  InferOutcome o;
  o.ref.user_id = j.at("user").get<std::string>();
  o.ref.recording_index = j.at("recording_index").get<size_t>();
  o.ref.start_index = j.at("start_index").get<size_t>();
  o.ref.truth_label = j.at("truth").get<std::string>();
  o.variant = j.at("variant").get<std::string>();
  o.content_hash = j.at("content_hash").get<std::string>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "label") {
    o.answer.kind = AnswerKind::label;
    o.answer.label = j.at("label").get<std::string>();
    if (!schema.contains(o.answer.label)) fail("outcome label outside schema");
  } else if (kind == "ambiguous") {
    o.answer.kind = AnswerKind::ambiguous;
    for (const auto& c : j.at("candidates")) {
      o.answer.candidates.push_back(c.get<std::string>());
    }
  } else {
    o.answer.kind = AnswerKind::no_answer;
  }
  o.answer.evidence_begin = j.at("evidence")[0].get<size_t>();
  o.answer.evidence_end = j.at("evidence")[1].get<size_t>();
  o.model = j.value("model", std::string());
  o.backend = j.value("backend", std::string());
  return o;
}

void cmd_infer(const RunConfig& config) {
  StageTimer timer;
  Dataset ds = load_ingested(config);
  SplitAssignment split = load_split(config);
  PromptTemplate tmpl = template_for(config);
  auto windows = windows_for_partition(config, ds, split,
                                       partition_from_name(config.infer_partition));
  if (windows.empty()) fail("infer: no windows in partition " + config.infer_partition);
  if (config.balanced) {
    windows = balanced_sample(std::move(windows), ds.schema, config.max_windows,
                              config.split_seed);
  } else if (config.max_windows > 0 && windows.size() > config.max_windows) {
    windows.resize(config.max_windows);
  }

  auto cache_path = config.out_dir / "infer" / "records.jsonl";
  auto cache = std::make_shared<ResponseCache>(cache_path);
  std::shared_ptr<ResponseCache> replay_cache;
  if (config.backend_name == "replay") {
    if (!std::filesystem::exists(config.replay_path)) {
      fail("replay cache not found: " + config.replay_path);
    }
    replay_cache = std::make_shared<ResponseCache>(config.replay_path);
  }
  auto backend = make_backend(config, replay_cache);

  // render everything first (cheap), then complete with bounded concurrency
  std::vector<RenderedPrompt> prompts;
  prompts.reserve(windows.size());
  for (const auto& w : windows) {
    prompts.push_back(render_prompt(tmpl, w, metadata_for(config, ds, w),
                                    config.prompt_decimals));
  }

  std::vector<InferOutcome> outcomes(prompts.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= prompts.size() || failed.load()) break;
      try {
        const RenderedPrompt& rp = prompts[i];
        ChatRequest req;
        req.model = config.backend_model;
        req.messages = {{"user", rp.text}};
        req.temperature = config.temperature;
        req.max_tokens = config.max_tokens;
        CompletionResult res = complete_cached(*backend, *cache, req, rp.content_hash);
        InferOutcome o;
        o.ref = rp.window_ref;
        o.variant = prompt_variant_name(rp.variant);
        o.content_hash = rp.content_hash;
        o.answer = parse_answer(res.text, ds.schema);
        o.model = config.backend_model;
        o.backend = backend->name();
        outcomes[i] = std::move(o);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
      }
    }
  };

  size_t n_threads = std::min<size_t>(std::max(1, config.backend_http.max_concurrency),
                                      prompts.size());
  std::vector<std::thread> pool;
  for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) fail("infer: " + first_error);

  std::string out;
  for (const auto& o : outcomes) out += outcome_to_jsonl(o) + "\n";
  auto outcome_path = config.out_dir / "infer" / "outcomes.jsonl";
  write_file(outcome_path, out);
  finish_stage(config, "infer", timer, {outcome_path, cache_path});
  std::cout << "infer: " << outcomes.size() << " windows via " << backend->name()
            << " backend (" << cache->size() << " cached records)\n";
}

void cmd_train(const RunConfig& config) {
  StageTimer timer;
  Dataset ds = load_ingested(config);
  SplitAssignment split = load_split(config);
  auto train = windows_for_partition(config, ds, split, Partition::train);
  auto val = windows_for_partition(config, ds, split, Partition::val);
  if (train.empty() || val.empty()) fail("train: empty train or val partition");

  BaselineTrainOptions opts;
  opts.seed = config.train_seed;
  opts.class_weights = config.class_weights;
  opts.rf.n_trees = config.rf_trees;
  opts.svm.c = config.svm_c;
  opts.svm.gamma = config.svm_gamma;
  opts.net.adam.lr = config.net_lr;
  opts.net.batch_size = config.net_batch;
  opts.net.max_epochs = config.net_epochs;
  opts.net.patience = config.net_patience;
  opts.lstm_hidden = config.lstm_hidden;

  RunManifest manifest = RunManifest::load_or_create(config.out_dir);
  std::string fingerprint = manifest.dataset_fingerprint;

  std::vector<std::filesystem::path> artifacts;
  json log = json::object();
  for (const auto& name : config.train_models) {
    ModelKind kind = model_kind_from_name(name);
    BaselineModel model = train_baseline(kind, train, val, ds.schema, opts, fingerprint);
    auto path = config.out_dir / "train" / (name + ".bin");
    save_model(model, path);
    artifacts.push_back(path);
    EvalReport val_report = evaluate_baseline(model, val, "val");
    log[name] = {{"val_macro_f1", val_report.macro_f1},
                 {"converged", model.converged},
                 {"train_windows", train.size()}};
    std::cout << "train: " << name << " val macro-F1 " << format_fixed(val_report.macro_f1, 3)
              << "\n";
  }
  auto log_path = config.out_dir / "train" / "train_log.json";
  write_file(log_path, log.dump(2) + "\n");
  artifacts.push_back(log_path);
  finish_stage(config, "train", timer, artifacts);
}

namespace {

std::vector<ScoringMode> modes_for(const RunConfig& config) {
  if (config.eval_mode == "abstain") return {ScoringMode::abstain};
  if (config.eval_mode == "strict") return {ScoringMode::strict};
  return {ScoringMode::abstain, ScoringMode::strict};
}

json report_to_json(const EvalReport& r) {
  json j;
  j["method"] = r.method;
  j["partition"] = r.partition;
  j["mode"] = scoring_mode_name(r.mode);
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f1"] = r.macro_f1;
  j["scored"] = r.scored;
  j["abstained"] = r.abstained;
  json per = json::array();
  for (const auto& c : r.per_class) {
    per.push_back({{"label", c.label},
                   {"precision", c.precision},
                   {"recall", c.recall},
                   {"f1", c.f1},
                   {"zero_denominator", c.zero_denominator}});
  }
  j["per_class"] = per;
  return j;
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.partition = j.at("partition").get<std::string>();
  r.mode = j.at("mode").get<std::string>() == "strict" ? ScoringMode::strict
                                                       : ScoringMode::abstain;
  r.macro_precision = j.at("macro_precision").get<double>();
  r.macro_recall = j.at("macro_recall").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.scored = j.at("scored").get<size_t>();
  r.abstained = j.at("abstained").get<size_t>();
  for (const auto& c : j.at("per_class")) {
    ClassMetrics cm;
    cm.label = c.at("label").get<std::string>();
    cm.precision = c.at("precision").get<double>();
    cm.recall = c.at("recall").get<double>();
    cm.f1 = c.at("f1").get<double>();
    cm.zero_denominator = c.value("zero_denominator", false);
    r.per_class.push_back(cm);
  }
  return r;
}

}  // namespace

void cmd_eval(const RunConfig& config) {
  StageTimer timer;
  Dataset ds = load_ingested(config);
  SplitAssignment assignment = load_split(config);
  std::vector<EvalReport> reports;

  // trained baselines, when the train stage ran
  auto train_dir = config.out_dir / "train";
  if (std::filesystem::exists(train_dir)) {
    for (const auto& name : config.train_models) {
      auto path = train_dir / (name + ".bin");
      if (!std::filesystem::exists(path)) continue;
      BaselineModel model = load_model(path);
      for (Partition p : {Partition::test_seen, Partition::test_unseen}) {
        auto windows = windows_for_partition(config, ds, assignment, p);
        if (windows.empty()) continue;
        std::string pname = p == Partition::test_seen ? "seen" : "unseen";
        reports.push_back(evaluate_baseline(model, windows, pname));
      }
    }
  }

  // LLM outcomes, when the infer stage ran
  auto outcome_path = config.out_dir / "infer" / "outcomes.jsonl";
  if (std::filesystem::exists(outcome_path)) {
    std::vector<InferOutcome> outcomes;
    for (const auto& line : split(read_file(outcome_path), '\n')) {
      if (trim(line).empty()) continue;
      outcomes.push_back(outcome_from_jsonl(line, ds.schema));
    }
    if (!outcomes.empty()) {
      ConfusionMatrix matrix(ds.schema);
      for (const auto& o : outcomes) {
        int truth = ds.schema.index_of(o.ref.truth_label);
        if (o.answer.kind == AnswerKind::label) {
          matrix.add_prediction(truth, ds.schema.index_of(o.answer.label));
        } else {
          matrix.add_abstain(truth);
        }
      }
      std::string variant = outcomes.front().variant == "cot" ? "CoT" : "DO";
      std::string method = outcomes.front().model + "-" + variant;
      std::string pname = config.infer_partition == "test_seen"
                              ? "seen"
                              : config.infer_partition == "test_unseen"
                                    ? "unseen"
                                    : config.infer_partition;
      for (ScoringMode mode : modes_for(config)) {
        reports.push_back(make_report(matrix, mode, method, pname));
      }
    }
  }

  if (reports.empty()) fail("eval: nothing to evaluate (run train and/or infer first)");
  json out = json::array();
  for (const auto& r : reports) out.push_back(report_to_json(r));
  auto path = config.out_dir / "eval" / "reports.json";
  write_file(path, out.dump(2) + "\n");
  finish_stage(config, "eval", timer, {path});
  std::cout << "eval: " << reports.size() << " reports\n";
}

void cmd_report(const RunConfig& config) {
  StageTimer timer;
  auto reports_path = config.out_dir / "eval" / "reports.json";
  if (!std::filesystem::exists(reports_path)) {
    fail("eval artifacts not found; run the eval stage first");
  }
  std::vector<EvalReport> reports;
  for (const auto& j : json::parse(read_file(reports_path))) {
    reports.push_back(report_from_json(j));
  }
  RenderedTables tables = render_report(reports);
  auto dir = config.out_dir / "report";
  write_file(dir / "overall.csv", tables.overall_csv);
  write_file(dir / "overall.txt", tables.overall_txt);
  write_file(dir / "per_class.csv", tables.per_class_csv);
  write_file(dir / "per_class.txt", tables.per_class_txt);
  finish_stage(config, "report", timer,
               {dir / "overall.csv", dir / "overall.txt", dir / "per_class.csv",
                dir / "per_class.txt"});
  std::cout << tables.overall_txt;
}

}  // namespace harbench
