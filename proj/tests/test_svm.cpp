#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "harbench/baselines.hpp"
#include "harbench/rng.hpp"
#include "harbench/svm.hpp"
#include "harbench/util.hpp"

using namespace harbench;

namespace {

// XOR layout: two classes, four gaussian clusters
void xor_clusters(std::mt19937_64& gen, size_t per_cluster,
                  std::vector<std::vector<double>>& x, std::vector<int>& y) {
  NormalSampler normal;
  const double centers[4][2] = {{0, 0}, {4, 4}, {0, 4}, {4, 0}};
  for (int c = 0; c < 4; ++c) {
    for (size_t i = 0; i < per_cluster; ++i) {
      x.push_back({centers[c][0] + normal(gen, 0, 0.3),
                   centers[c][1] + normal(gen, 0, 0.3)});
      y.push_back(c < 2 ? 0 : 1);
    }
  }
}

}  // namespace

TEST_CASE("svm: rbf separates the xor layout perfectly") {
  std::mt19937_64 gen(50);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  xor_clusters(gen, 25, x, y);

  SvmConfig cfg;
  cfg.c = 10.0;
  cfg.gamma = 1.0;
  SvmOvr svm;
  svm.fit(x, y, 2, cfg);
  CHECK(svm.converged());
  size_t correct = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (svm.predict(x[i]).first == y[i]) ++correct;
  }
  CHECK(correct == x.size());
}

TEST_CASE("svm: two points give a zero decision value at the midpoint") {
  std::vector<std::vector<double>> x = {{0.0, 0.0}, {1.0, 0.0}};
  std::vector<int> y = {1, -1};
  SvmConfig cfg;
  cfg.c = 10.0;
  cfg.gamma = 1.0;
  BinarySvm m = SvmOvr::train_binary(x, y, cfg, cfg.gamma);
  CHECK(std::fabs(m.decision({0.5, 0.0})) < 1e-6);
  CHECK(m.decision({0.0, 0.0}) > 0.0);
  CHECK(m.decision({1.0, 0.0}) < 0.0);
}

TEST_CASE("svm: kkt conditions hold within tol; sum(alpha*y) vanishes; box respected") {
  std::mt19937_64 gen(51);
  std::vector<std::vector<double>> x;
  std::vector<int> y01;
  xor_clusters(gen, 20, x, y01);
  std::vector<int> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = y01[i] == 0 ? 1 : -1;

  SvmConfig cfg;
  cfg.c = 5.0;
  cfg.gamma = 0.8;
  std::vector<double> alphas;
  BinarySvm m = SvmOvr::train_binary(x, y, cfg, cfg.gamma, &alphas);
  CHECK(m.converged);
  auto diag = SvmOvr::check_kkt(x, y, alphas, m.bias, cfg.gamma, cfg.c);
  CHECK(diag.max_kkt_violation <= cfg.tol * 1.01);
  CHECK(std::fabs(diag.alpha_dot_y) <= 1e-8);
  CHECK(diag.box_respected);
}

TEST_CASE("svm: duplicated training set keeps the same decision function within tol") {
  std::mt19937_64 gen(52);
  std::vector<std::vector<double>> x;
  std::vector<int> y01;
  xor_clusters(gen, 12, x, y01);
  std::vector<int> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = y01[i] == 0 ? 1 : -1;

  SvmConfig cfg;
  cfg.c = 5.0;
  cfg.gamma = 0.7;
  BinarySvm base = SvmOvr::train_binary(x, y, cfg, cfg.gamma);

  auto x2 = x;
  auto y2 = y;
  x2.insert(x2.end(), x.begin(), x.end());
  y2.insert(y2.end(), y.begin(), y.end());
  // duplicates each carry half the constraint pressure
  SvmConfig cfg2 = cfg;
  BinarySvm doubled = SvmOvr::train_binary(x2, y2, cfg2, cfg2.gamma);

  std::mt19937_64 probe_gen(53);
  for (int probe = 0; probe < 64; ++probe) {
    std::vector<double> p = {uniform(probe_gen, -1.0, 5.0), uniform(probe_gen, -1.0, 5.0)};
    CHECK(std::fabs(base.decision(p) - doubled.decision(p)) < 5e-3);
  }
}

TEST_CASE("svm: argmax prediction is invariant under positive rescaling of decisions") {
  std::mt19937_64 gen(54);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  xor_clusters(gen, 15, x, y);
  SvmConfig cfg;
  cfg.c = 10.0;
  cfg.gamma = 1.0;
  SvmOvr svm;
  svm.fit(x, y, 2, cfg);
  auto [label, scores] = svm.predict(x[0]);
  size_t best = 0;
  for (size_t k = 1; k < scores.size(); ++k) {
    if (3.0 * scores[k] > 3.0 * scores[best]) best = k;  // positive rescale
  }
  CHECK(static_cast<int>(best) == label);
}

TEST_CASE("svm: auto gamma is 1/(D*var) of the training features") {
  std::mt19937_64 gen(55);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  xor_clusters(gen, 10, x, y);
  SvmOvr svm;
  SvmConfig cfg;  // gamma 0 -> auto
  svm.fit(x, y, 2, cfg);

  double var = 0.0;
  for (int d = 0; d < 2; ++d) {
    double m = 0;
    for (const auto& row : x) m += row[d];
    m /= x.size();
    double s = 0;
    for (const auto& row : x) s += (row[d] - m) * (row[d] - m);
    var += s / x.size();
  }
  var /= 2.0;
  CHECK(svm.effective_gamma() == doctest::Approx(1.0 / (2.0 * var)).epsilon(1e-12));
}

TEST_CASE("svm: smo training is deterministic") {
  std::mt19937_64 gen(56);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  xor_clusters(gen, 15, x, y);
  SvmConfig cfg;
  cfg.c = 2.0;
  SvmOvr a, b;
  a.fit(x, y, 2, cfg);
  b.fit(x, y, 2, cfg);
  REQUIRE(a.machines().size() == b.machines().size());
  for (size_t k = 0; k < a.machines().size(); ++k) {
    REQUIRE(a.machines()[k].bias == b.machines()[k].bias);
    REQUIRE(a.machines()[k].coefficients == b.machines()[k].coefficients);
  }
}

TEST_CASE("svm model file round trip preserves decision values") {
  Dataset ds = synth_corpus(synth_spec_hhar_like(4, 60.0, 10.0), 6);
  auto windows = make_windows(ds, 10.0, 10.0);
  std::vector<SensorWindow> train(windows.begin(), windows.begin() + windows.size() / 2);
  std::vector<SensorWindow> val(windows.begin() + windows.size() / 2, windows.end());

  BaselineTrainOptions opts;
  opts.seed = 3;
  opts.svm.c = 1.0;
  BaselineModel model = train_baseline(ModelKind::svm, train, val, ds.schema, opts, "fp2");
  auto path = std::filesystem::temp_directory_path() / "harbench_svm_model.bin";
  save_model(model, path);
  BaselineModel back = load_model(path);
  CHECK(back.kind == ModelKind::svm);
  for (const auto& w : val) {
    auto [a, sa] = model.predict_window(w);
    auto [b, sb] = back.predict_window(w);
    REQUIRE(a == b);
    for (size_t k = 0; k < sa.size(); ++k) {
      REQUIRE(sa[k] == doctest::Approx(sb[k]).epsilon(1e-12));
    }
  }
}
