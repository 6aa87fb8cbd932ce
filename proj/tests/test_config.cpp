#include <doctest.h>

#include "harbench/config.hpp"
#include "harbench/util.hpp"

using namespace harbench;

namespace {

const char* kSample = R"(
# run description
[dataset]
name = "synth2"
[synth]
users = 6
seconds_per_label = 90.5
sample_rate_hz = 50
seed = 13
[preprocess]
ratios = [4, 1, 1, 2]
seed = 99
[prompt]
variant = "do"
decimals = 2
[backend]
name = "heuristic"
model = "stub-model"
max_concurrency = 2
[infer]
partition = "test_seen"
balanced = true
max_windows = 40
[train]
models = "rf,svm"
rf_trees = 25
[eval]
mode = "strict"
[output]
dir = "runs/exp1"
)";

}  // namespace

TEST_CASE("config parsing: sections, types, comments") {
  RunConfig c = RunConfig::from_kv(KvConfig::parse(kSample));
  CHECK(c.dataset_name == "synth2");
  CHECK(c.synth_users == 6);
  CHECK(c.synth_seconds_per_label == doctest::Approx(90.5));
  CHECK(c.synth_seed == 13);
  CHECK(c.split_seed == 99);
  CHECK(c.prompt_variant == "do");
  CHECK(c.prompt_decimals == 2);
  CHECK(c.backend_model == "stub-model");
  CHECK(c.backend_http.max_concurrency == 2);
  CHECK(c.infer_partition == "test_seen");
  CHECK(c.balanced);
  CHECK(c.max_windows == 40);
  CHECK(c.train_models == std::vector<std::string>{"rf", "svm"});
  CHECK(c.rf_trees == 25);
  CHECK(c.eval_mode == "strict");
  CHECK(c.out_dir == std::filesystem::path("runs/exp1"));
}

TEST_CASE("config defaults survive an empty file") {
  RunConfig c = RunConfig::from_kv(KvConfig::parse(""));
  CHECK(c.dataset_name == "synth4");
  CHECK(c.target_hz == 10.0);
  CHECK(c.window_s == 10.0);
  CHECK(c.split_ratios == std::array<int, 4>{4, 1, 1, 2});
  CHECK(c.prompt_variant == "cot");
  CHECK(c.eval_mode == "both");
}

TEST_CASE("config validation failures happen before any work") {
  CHECK_THROWS_WITH_AS(RunConfig::from_kv(KvConfig::parse("[preprocess]\nratios = [0, 0, 0, 0]\n")),
                       doctest::Contains("ratios"), Error);
  CHECK_THROWS_AS(RunConfig::from_kv(KvConfig::parse("[dataset]\nname = \"imaginary\"\n")),
                  Error);
  CHECK_THROWS_AS(RunConfig::from_kv(KvConfig::parse("[dataset]\nname = \"capture24\"\n")),
                  Error);  // loader path missing
  CHECK_THROWS_AS(RunConfig::from_kv(KvConfig::parse("[backend]\nname = \"http\"\n")),
                  Error);  // base_url missing
  CHECK_THROWS_AS(RunConfig::from_kv(KvConfig::parse("[prompt]\ndecimals = 9\n")), Error);
  CHECK_THROWS_AS(RunConfig::from_kv(KvConfig::parse("[eval]\nmode = \"maybe\"\n")), Error);
  CHECK_THROWS_AS(KvConfig::parse("[dataset\nname = \"x\"\n"), Error);
  CHECK_THROWS_AS(KvConfig::parse("[dataset]\njust a line\n"), Error);
}

TEST_CASE("resolved config text re-parses to the same configuration") {
  RunConfig c = RunConfig::from_kv(KvConfig::parse(kSample));
  RunConfig back = RunConfig::from_kv(KvConfig::parse(c.resolved_text()));
  CHECK(back.resolved_text() == c.resolved_text());
}
