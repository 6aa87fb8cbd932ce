#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "harbench/dataset.hpp"
#include "harbench/preprocess.hpp"

// Reverse-mode gradient machinery scoped to exactly the layers the two
// sequence classifiers need: 1-D convolution, max-pool, dense, LSTM cell,
// ReLU and softmax cross-entropy. No general autodiff.

namespace harbench::nn {

/// Channel-major buffer: data[c*n + t]. Dense activations use n == 1.
struct Signal {
  size_t channels = 0;
  size_t n = 0;
  std::vector<double> data;

  Signal() = default;
  Signal(size_t c, size_t len) : channels(c), n(len), data(c * len, 0.0) {}
  double& at(size_t c, size_t t) { return data[c * n + t]; }
  double at(size_t c, size_t t) const { return data[c * n + t]; }
};

Signal window_to_signal(const SensorWindow& w);

struct ParamBlock {
  std::string name;
  std::vector<size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> adam_m;
  std::vector<double> adam_v;

  void init(std::string n, std::vector<size_t> s);
  size_t size() const { return value.size(); }
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Signal forward(const Signal& x) = 0;
  virtual Signal backward(const Signal& dy) = 0;
  virtual std::vector<ParamBlock*> params() { return {}; }
};

/// 'same' zero padding, stride 1.
class Conv1d : public Layer {
 public:
  Conv1d(size_t in_ch, size_t out_ch, size_t kernel, std::mt19937_64& gen);
  Signal forward(const Signal& x) override;
  Signal backward(const Signal& dy) override;
  std::vector<ParamBlock*> params() override { return {&w_, &b_}; }

 private:
  size_t in_ch_, out_ch_, kernel_, pad_;
  ParamBlock w_, b_;
  Signal x_;
};

class Relu : public Layer {
 public:
  Signal forward(const Signal& x) override;
  Signal backward(const Signal& dy) override;

 private:
  Signal x_;
};

/// Non-overlapping width-2 windows; an odd trailing sample is dropped.
class MaxPool2 : public Layer {
 public:
  Signal forward(const Signal& x) override;
  Signal backward(const Signal& dy) override;

 private:
  size_t in_n_ = 0;
  std::vector<size_t> argmax_;
};

class Flatten : public Layer {
 public:
  Signal forward(const Signal& x) override;
  Signal backward(const Signal& dy) override;

 private:
  size_t channels_ = 0, n_ = 0;
};

class Dense : public Layer {
 public:
  Dense(size_t in_dim, size_t out_dim, std::mt19937_64& gen);
  Signal forward(const Signal& x) override;
  Signal backward(const Signal& dy) override;
  std::vector<ParamBlock*> params() override { return {&w_, &b_}; }

 private:
  size_t in_dim_, out_dim_;
  ParamBlock w_, b_;
  Signal x_;
};

/// Single-layer LSTM consuming timesteps in order; emits the final hidden
/// state. Backward runs truncated-free BPTT over the whole window.
class LstmLast : public Layer {
 public:
  LstmLast(size_t in_ch, size_t hidden, std::mt19937_64& gen);
  Signal forward(const Signal& x) override;
  Signal backward(const Signal& dy) override;
  std::vector<ParamBlock*> params() override { return {&wx_, &wh_, &b_}; }
  size_t hidden() const { return hidden_; }

 private:
  size_t in_ch_, hidden_;
  ParamBlock wx_, wh_, b_;  // gate order: input, forget, cell, output
  Signal x_;
  std::vector<double> gates_;  // per step: 4H post-activation
  std::vector<double> cells_;  // per step: c_t
  std::vector<double> hs_;     // per step: h_t
};

class SequentialNet {
 public:
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  Signal forward(const Signal& x);
  void backward(const Signal& dloss);
  std::vector<ParamBlock*> params();
  void zero_grad();
  size_t param_count();

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

struct SoftmaxResult {
  double loss = 0.0;
  std::vector<double> probs;
  std::vector<double> dlogits;
};

SoftmaxResult softmax_cross_entropy(const std::vector<double>& logits, int target,
                                    double weight);
std::vector<double> softmax(const std::vector<double>& logits);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}
  void step(const std::vector<ParamBlock*>& params);

 private:
  AdamConfig cfg_;
  long t_ = 0;
};

/// Two conv/pool blocks then a dense head; requires window length >= 20 so
/// both pool stages keep temporal extent.
SequentialNet build_dcnn(size_t in_channels, size_t window_len, size_t n_classes,
                         uint64_t seed);
SequentialNet build_lstm(size_t in_channels, size_t n_classes, size_t hidden,
                         uint64_t seed);

struct NetTrainConfig {
  uint64_t seed = 1;
  AdamConfig adam;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;
  bool class_weights = false;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
};

struct NetTrainResult {
  std::vector<EpochLog> log;
  double best_val_macro_f1 = 0.0;
  int best_epoch = -1;
};

/// Mini-batch training with early stopping on validation macro-F1; the
/// parameters left in `net` are the best-epoch snapshot.
NetTrainResult train_net(SequentialNet& net, const std::vector<Signal>& train_x,
                         const std::vector<int>& train_y,
                         const std::vector<Signal>& val_x, const std::vector<int>& val_y,
                         size_t n_classes, const NetTrainConfig& cfg);

int net_predict(SequentialNet& net, const Signal& x, std::vector<double>& probs);

}  // namespace harbench::nn
