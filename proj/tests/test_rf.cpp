#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "harbench/baselines.hpp"
#include "harbench/rf.hpp"
#include "harbench/rng.hpp"
#include "harbench/util.hpp"

using namespace harbench;

namespace {

// three well-separated gaussian clusters in 2D
void clusters(std::mt19937_64& gen, size_t per_class, std::vector<std::vector<double>>& x,
              std::vector<int>& y) {
  NormalSampler normal;
  const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
  for (int c = 0; c < 3; ++c) {
    for (size_t i = 0; i < per_class; ++i) {
      x.push_back({centers[c][0] + normal(gen, 0, 0.5),
                   centers[c][1] + normal(gen, 0, 0.5)});
      y.push_back(c);
    }
  }
}

}  // namespace

TEST_CASE("rf: three separated clusters train to >= 0.99 accuracy") {
  std::mt19937_64 gen(42);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  clusters(gen, 50, x, y);

  RfConfig cfg;
  cfg.n_trees = 50;
  cfg.seed = 3;
  RandomForest rf;
  rf.fit(x, y, 3, cfg);
  size_t correct = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (rf.predict(x[i]).first == y[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / x.size() >= 0.99);
}

TEST_CASE("rf: a single unbootstrapped tree memorizes distinct points") {
  std::mt19937_64 gen(7);
  NormalSampler normal;
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({normal(gen), normal(gen), normal(gen)});
    y.push_back(static_cast<int>(uniform_index(gen, 3)));
  }
  RfConfig cfg;
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  RandomForest rf;
  rf.fit(x, y, 3, cfg);
  for (size_t i = 0; i < x.size(); ++i) {
    REQUIRE(rf.predict(x[i]).first == y[i]);
  }
}

TEST_CASE("rf: same seed gives identical forests") {
  std::mt19937_64 gen(9);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  clusters(gen, 20, x, y);
  RfConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = 11;
  RandomForest a, b;
  a.fit(x, y, 3, cfg);
  b.fit(x, y, 3, cfg);
  REQUIRE(a.trees().size() == b.trees().size());
  for (size_t t = 0; t < a.trees().size(); ++t) {
    REQUIRE(a.trees()[t].size() == b.trees()[t].size());
    for (size_t n = 0; n < a.trees()[t].size(); ++n) {
      REQUIRE(a.trees()[t][n].feature == b.trees()[t][n].feature);
      REQUIRE(a.trees()[t][n].threshold == b.trees()[t][n].threshold);
      REQUIRE(a.trees()[t][n].label == b.trees()[t][n].label);
    }
  }
}

TEST_CASE("rf: single-class training set rejected; vote scores sum to one") {
  std::vector<std::vector<double>> x = {{0.0}, {1.0}};
  std::vector<int> y = {0, 0};
  RandomForest rf;
  CHECK_THROWS_WITH_AS(rf.fit(x, y, 2, RfConfig{}), doctest::Contains("single class"),
                       Error);

  std::mt19937_64 gen(13);
  std::vector<std::vector<double>> x2;
  std::vector<int> y2;
  clusters(gen, 15, x2, y2);
  rf.fit(x2, y2, 3, RfConfig{});
  auto [label, votes] = rf.predict(x2[0]);
  double sum = 0;
  for (double v : votes) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rf.predict(x2[0]).first == label);  // prediction is pure
}

TEST_CASE("rf: input dimension contract enforced") {
  std::mt19937_64 gen(15);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  clusters(gen, 10, x, y);
  RandomForest rf;
  rf.fit(x, y, 3, RfConfig{});
  CHECK_THROWS_AS(rf.predict({1.0, 2.0, 3.0}), Error);
}

TEST_CASE("rf model file round trip preserves predictions") {
  std::mt19937_64 gen(21);
  NormalSampler normal;
  Dataset ds = synth_corpus(synth_spec_capture24_like(4, 60.0, 10.0), 5);
  auto windows = make_windows(ds, 10.0, 10.0);
  std::vector<SensorWindow> train(windows.begin(), windows.begin() + windows.size() / 2);
  std::vector<SensorWindow> val(windows.begin() + windows.size() / 2, windows.end());

  BaselineTrainOptions opts;
  opts.seed = 2;
  opts.rf.n_trees = 20;
  BaselineModel model = train_baseline(ModelKind::rf, train, val, ds.schema, opts, "fp");

  auto path = std::filesystem::temp_directory_path() / "harbench_rf_model.bin";
  save_model(model, path);
  BaselineModel back = load_model(path);
  CHECK(back.kind == ModelKind::rf);
  CHECK(back.provenance.data_fingerprint == "fp");
  CHECK(back.schema.labels == ds.schema.labels);
  for (const auto& w : val) {
    auto [a, sa] = model.predict_window(w);
    auto [b, sb] = back.predict_window(w);
    REQUIRE(a == b);
    REQUIRE(sa == sb);
  }
}
