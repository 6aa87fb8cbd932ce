#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "harbench/baselines.hpp"
#include "harbench/nn.hpp"
#include "harbench/rng.hpp"
#include "harbench/util.hpp"

using namespace harbench;
using nn::Signal;

namespace {

Signal random_signal(std::mt19937_64& gen, size_t channels, size_t n) {
  Signal s(channels, n);
  NormalSampler normal;
  for (double& v : s.data) v = normal(gen);
  return s;
}

// weighted batch loss for the finite-difference probe
double batch_loss(nn::SequentialNet& net, const std::vector<Signal>& xs,
                  const std::vector<int>& ys) {
  double total = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    Signal out = net.forward(xs[i]);
    total += nn::softmax_cross_entropy(out.data, ys[i], 1.0 / xs.size()).loss;
  }
  return total;
}

void accumulate_grads(nn::SequentialNet& net, const std::vector<Signal>& xs,
                      const std::vector<int>& ys) {
  net.zero_grad();
  for (size_t i = 0; i < xs.size(); ++i) {
    Signal out = net.forward(xs[i]);
    auto sr = nn::softmax_cross_entropy(out.data, ys[i], 1.0 / xs.size());
    Signal dloss(out.channels, out.n);
    dloss.data = sr.dlogits;
    net.backward(dloss);
  }
}

// max relative error between analytic and central-difference gradients
double grad_check(nn::SequentialNet& net, const std::vector<Signal>& xs,
                  const std::vector<int>& ys) {
  accumulate_grads(net, xs, ys);
  std::vector<std::vector<double>> analytic;
  for (auto* p : net.params()) analytic.push_back(p->grad);

  const double h = 1e-5;
  double worst = 0.0;
  auto params = net.params();
  for (size_t b = 0; b < params.size(); ++b) {
    for (size_t i = 0; i < params[b]->size(); ++i) {
      double saved = params[b]->value[i];
      params[b]->value[i] = saved + h;
      double up = batch_loss(net, xs, ys);
      params[b]->value[i] = saved - h;
      double down = batch_loss(net, xs, ys);
      params[b]->value[i] = saved;
      double numeric = (up - down) / (2 * h);
      double a = analytic[b][i];
      double rel = std::fabs(a - numeric) / std::max(std::fabs(a) + std::fabs(numeric), 1e-8);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// 2-class separable task: sine versus constant-with-noise
void separable_task(std::mt19937_64& gen, size_t per_class, size_t n, size_t channels,
                    std::vector<Signal>& xs, std::vector<int>& ys) {
  NormalSampler normal;
  for (size_t i = 0; i < per_class; ++i) {
    Signal sine(channels, n);
    double f = uniform(gen, 1.0, 2.0);
    double phase = uniform(gen, 0.0, 2 * M_PI);
    for (size_t c = 0; c < channels; ++c) {
      for (size_t t = 0; t < n; ++t) {
        sine.at(c, t) = std::sin(2 * M_PI * f * t / 10.0 + phase + c) +
                        normal(gen, 0.0, 0.1);
      }
    }
    xs.push_back(std::move(sine));
    ys.push_back(0);

    Signal flat(channels, n);
    double level = uniform(gen, -0.5, 0.5);
    for (double& v : flat.data) v = level + normal(gen, 0.0, 0.1);
    xs.push_back(std::move(flat));
    ys.push_back(1);
  }
}

}  // namespace

TEST_CASE("dcnn gradients match central finite differences") {
  nn::SequentialNet net = nn::build_dcnn(2, 20, 3, 99);
  std::mt19937_64 gen(4);
  std::vector<Signal> xs = {random_signal(gen, 2, 20), random_signal(gen, 2, 20),
                            random_signal(gen, 2, 20)};
  std::vector<int> ys = {0, 1, 2};
  CHECK(grad_check(net, xs, ys) < 1e-4);
}

TEST_CASE("lstm gradients match central finite differences") {
  nn::SequentialNet net = nn::build_lstm(3, 3, 6, 123);
  std::mt19937_64 gen(5);
  std::vector<Signal> xs = {random_signal(gen, 3, 12), random_signal(gen, 3, 12)};
  std::vector<int> ys = {0, 2};
  CHECK(grad_check(net, xs, ys) < 1e-4);
}

TEST_CASE("untrained softmax outputs are unsaturated on random input") {
  nn::SequentialNet net = nn::build_dcnn(3, 100, 4, 7);
  std::mt19937_64 gen(6);
  std::vector<double> probs;
  for (int trial = 0; trial < 10; ++trial) {
    nn::net_predict(net, random_signal(gen, 3, 100), probs);
    for (double p : probs) {
      CHECK(p > 0.1);
      CHECK(p < 0.9);
    }
  }
}

TEST_CASE("initial loss is about ln(num_classes)") {
  nn::SequentialNet net = nn::build_dcnn(3, 40, 4, 11);
  std::mt19937_64 gen(12);
  std::vector<Signal> xs;
  std::vector<int> ys;
  for (int i = 0; i < 16; ++i) {
    xs.push_back(random_signal(gen, 3, 40));
    ys.push_back(static_cast<int>(uniform_index(gen, 4)));
  }
  CHECK(batch_loss(net, xs, ys) == doctest::Approx(std::log(4.0)).epsilon(0.15));
}

TEST_CASE("dcnn rejects windows too short for two pool stages") {
  CHECK_THROWS_WITH_AS(nn::build_dcnn(3, 19, 4, 1), doctest::Contains("20"), Error);
  CHECK_NOTHROW(nn::build_dcnn(3, 20, 4, 1));
}

TEST_CASE("lstm rejects zero-length input") {
  nn::SequentialNet net = nn::build_lstm(3, 2, 4, 1);
  Signal empty(3, 0);
  CHECK_THROWS_AS(net.forward(empty), Error);
}

TEST_CASE("reversing input time order changes lstm logits") {
  nn::SequentialNet net = nn::build_lstm(2, 3, 8, 77);
  std::mt19937_64 gen(13);
  Signal x = random_signal(gen, 2, 15);
  Signal rev(2, 15);
  for (size_t c = 0; c < 2; ++c) {
    for (size_t t = 0; t < 15; ++t) rev.at(c, t) = x.at(c, 14 - t);
  }
  Signal a = net.forward(x);
  Signal b = net.forward(rev);
  double diff = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) diff += std::fabs(a.data[i] - b.data[i]);
  CHECK(diff > 1e-9);
}

TEST_CASE("softmax probabilities sum to one") {
  std::mt19937_64 gen(14);
  NormalSampler normal;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(5);
    for (double& v : logits) v = normal(gen, 0.0, 3.0);
    auto p = nn::softmax(logits);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::fabs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("dcnn reaches 0.95 validation accuracy on sine-vs-constant within 30 epochs") {
  std::mt19937_64 gen(2026);
  std::vector<Signal> train_x, val_x;
  std::vector<int> train_y, val_y;
  separable_task(gen, 100, 50, 3, train_x, train_y);
  separable_task(gen, 30, 50, 3, val_x, val_y);

  nn::SequentialNet net = nn::build_dcnn(3, 50, 2, 1);
  nn::NetTrainConfig cfg;
  cfg.seed = 1;
  cfg.max_epochs = 30;
  auto result = nn::train_net(net, train_x, train_y, val_x, val_y, 2, cfg);
  CHECK(result.best_val_macro_f1 >= 0.95);

  std::vector<double> probs;
  size_t correct = 0;
  for (size_t i = 0; i < val_x.size(); ++i) {
    if (nn::net_predict(net, val_x[i], probs) == val_y[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / val_x.size() >= 0.95);
}

TEST_CASE("lstm reaches 0.95 validation accuracy on the same task within 30 epochs") {
  std::mt19937_64 gen(2027);
  std::vector<Signal> train_x, val_x;
  std::vector<int> train_y, val_y;
  separable_task(gen, 100, 50, 3, train_x, train_y);
  separable_task(gen, 30, 50, 3, val_x, val_y);

  nn::SequentialNet net = nn::build_lstm(3, 2, 32, 1);
  nn::NetTrainConfig cfg;
  cfg.seed = 1;
  cfg.max_epochs = 30;
  auto result = nn::train_net(net, train_x, train_y, val_x, val_y, 2, cfg);
  CHECK(result.best_val_macro_f1 >= 0.95);
}

TEST_CASE("net model files reload to bit-identical predictions") {
  std::mt19937_64 gen(88);
  std::vector<Signal> xs, vxs;
  std::vector<int> ys, vys;
  separable_task(gen, 15, 24, 2, xs, ys);
  separable_task(gen, 5, 24, 2, vxs, vys);

  // wrap the signals as windows so the baseline layer owns the round trip
  auto to_windows = [](const std::vector<Signal>& sigs, const std::vector<int>& labels) {
    std::vector<harbench::SensorWindow> out;
    for (size_t i = 0; i < sigs.size(); ++i) {
      harbench::SensorWindow w;
      w.user_id = "u";
      w.label_id = static_cast<int16_t>(labels[i]);
      w.label = labels[i] == 0 ? "rhythmic" : "flat";
      w.rate_hz = 10.0;
      w.n = sigs[i].n;
      w.accel.resize(w.n * 3);
      for (size_t t = 0; t < w.n; ++t) {
        for (int a = 0; a < 3; ++a) {
          w.accel[t * 3 + a] = a < 2 ? sigs[i].at(a, t) : 0.0;
        }
      }
      out.push_back(std::move(w));
    }
    return out;
  };
  harbench::LabelSchema schema{"sep", {"rhythmic", "flat"}};
  auto train = to_windows(xs, ys);
  auto val = to_windows(vxs, vys);

  for (auto kind : {harbench::ModelKind::dcnn, harbench::ModelKind::lstm}) {
    harbench::BaselineTrainOptions opts;
    opts.seed = 4;
    opts.net.max_epochs = 2;
    opts.lstm_hidden = 8;
    harbench::BaselineModel model =
        harbench::train_baseline(kind, train, val, schema, opts, "fp-net");
    auto path = std::filesystem::temp_directory_path() /
                ("harbench_net_" + harbench::model_kind_name(kind) + ".bin");
    harbench::save_model(model, path);
    harbench::BaselineModel back = harbench::load_model(path);
    CHECK(back.kind == kind);
    CHECK(back.contract.channels == 3);
    for (const auto& w : val) {
      auto [a, sa] = model.predict_window(w);
      auto [b, sb] = back.predict_window(w);
      REQUIRE(a == b);
      REQUIRE(sa == sb);  // bitwise: parameters serialize exactly
    }
    // contract violations rejected after reload too
    harbench::SensorWindow bad = val.front();
    bad.gyro.assign(bad.n * 3, 0.0);
    CHECK_THROWS_AS(back.predict_window(bad), harbench::Error);
  }
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  auto run = [](uint64_t seed) {
    std::mt19937_64 gen(31);
    std::vector<Signal> xs, vxs;
    std::vector<int> ys, vys;
    separable_task(gen, 20, 24, 2, xs, ys);
    separable_task(gen, 6, 24, 2, vxs, vys);
    nn::SequentialNet net = nn::build_dcnn(2, 24, 2, seed);
    nn::NetTrainConfig cfg;
    cfg.seed = seed;
    cfg.max_epochs = 3;
    nn::train_net(net, xs, ys, vxs, vys, 2, cfg);
    std::vector<double> flat;
    for (auto* p : net.params()) {
      flat.insert(flat.end(), p->value.begin(), p->value.end());
    }
    return flat;
  };
  auto a = run(5);
  auto b = run(5);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}
