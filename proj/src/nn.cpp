#include "harbench/nn.hpp"

#include <algorithm>
#include <cmath>

#include "harbench/rng.hpp"
#include "harbench/util.hpp"

namespace harbench::nn {

Signal window_to_signal(const SensorWindow& w) {
  Signal s(w.channel_count(), w.n);
  for (size_t c = 0; c < s.channels; ++c) {
    for (size_t t = 0; t < w.n; ++t) s.at(c, t) = w.channel_at(t, c);
  }
  return s;
}

void ParamBlock::init(std::string n, std::vector<size_t> s) {
  name = std::move(n);
  shape = std::move(s);
  size_t total = 1;
  for (size_t d : shape) total *= d;
  value.assign(total, 0.0);
  grad.assign(total, 0.0);
  adam_m.assign(total, 0.0);
  adam_v.assign(total, 0.0);
}

namespace {

void glorot_fill(ParamBlock& p, size_t fan_in, size_t fan_out, std::mt19937_64& gen) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : p.value) v = uniform(gen, -limit, limit);
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(size_t in_ch, size_t out_ch, size_t kernel, std::mt19937_64& gen)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), pad_(kernel / 2) {
  w_.init("conv_w", {out_ch, in_ch, kernel});
  b_.init("conv_b", {out_ch});
  glorot_fill(w_, in_ch * kernel, out_ch * kernel, gen);
}

Signal Conv1d::forward(const Signal& x) {
  if (x.channels != in_ch_) fail("conv1d: channel mismatch");
  x_ = x;
  Signal y(out_ch_, x.n);
  for (size_t o = 0; o < out_ch_; ++o) {
    for (size_t t = 0; t < x.n; ++t) {
      double acc = b_.value[o];
      for (size_t i = 0; i < in_ch_; ++i) {
        const double* wrow = &w_.value[(o * in_ch_ + i) * kernel_];
        for (size_t j = 0; j < kernel_; ++j) {
          long src = static_cast<long>(t + j) - static_cast<long>(pad_);
          if (src < 0 || src >= static_cast<long>(x.n)) continue;
          acc += wrow[j] * x.at(i, static_cast<size_t>(src));
        }
      }
      y.at(o, t) = acc;
    }
  }
  return y;
}

Signal Conv1d::backward(const Signal& dy) {
  Signal dx(in_ch_, x_.n);
  for (size_t o = 0; o < out_ch_; ++o) {
    for (size_t t = 0; t < x_.n; ++t) {
      double g = dy.at(o, t);
      if (g == 0.0) continue;
      b_.grad[o] += g;
      for (size_t i = 0; i < in_ch_; ++i) {
        const double* wrow = &w_.value[(o * in_ch_ + i) * kernel_];
        double* gwrow = &w_.grad[(o * in_ch_ + i) * kernel_];
        for (size_t j = 0; j < kernel_; ++j) {
          long src = static_cast<long>(t + j) - static_cast<long>(pad_);
          if (src < 0 || src >= static_cast<long>(x_.n)) continue;
          gwrow[j] += g * x_.at(i, static_cast<size_t>(src));
          dx.at(i, static_cast<size_t>(src)) += g * wrow[j];
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Relu

Signal Relu::forward(const Signal& x) {
  x_ = x;
  Signal y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Signal Relu::backward(const Signal& dy) {
  Signal dx = dy;
  for (size_t i = 0; i < dx.data.size(); ++i) {
    if (x_.data[i] <= 0.0) dx.data[i] = 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPool2

Signal MaxPool2::forward(const Signal& x) {
  in_n_ = x.n;
  size_t out_n = x.n / 2;
  Signal y(x.channels, out_n);
  argmax_.assign(x.channels * out_n, 0);
  for (size_t c = 0; c < x.channels; ++c) {
    for (size_t t = 0; t < out_n; ++t) {
      size_t a = 2 * t, b = 2 * t + 1;
      size_t pick = x.at(c, a) >= x.at(c, b) ? a : b;
      y.at(c, t) = x.at(c, pick);
      argmax_[c * out_n + t] = pick;
    }
  }
  return y;
}

Signal MaxPool2::backward(const Signal& dy) {
  Signal dx(dy.channels, in_n_);
  for (size_t c = 0; c < dy.channels; ++c) {
    for (size_t t = 0; t < dy.n; ++t) {
      dx.at(c, argmax_[c * dy.n + t]) += dy.at(c, t);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Flatten

Signal Flatten::forward(const Signal& x) {
  channels_ = x.channels;
  n_ = x.n;
  Signal y(x.channels * x.n, 1);
  y.data = x.data;
  return y;
}

Signal Flatten::backward(const Signal& dy) {
  Signal dx(channels_, n_);
  dx.data = dy.data;
  return dx;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(size_t in_dim, size_t out_dim, std::mt19937_64& gen)
    : in_dim_(in_dim), out_dim_(out_dim) {
  w_.init("dense_w", {out_dim, in_dim});
  b_.init("dense_b", {out_dim});
  glorot_fill(w_, in_dim, out_dim, gen);
}

Signal Dense::forward(const Signal& x) {
  if (x.channels * x.n != in_dim_) fail("dense: dimension mismatch");
  x_ = x;
  Signal y(out_dim_, 1);
  for (size_t o = 0; o < out_dim_; ++o) {
    double acc = b_.value[o];
    const double* wrow = &w_.value[o * in_dim_];
    for (size_t i = 0; i < in_dim_; ++i) acc += wrow[i] * x.data[i];
    y.data[o] = acc;
  }
  return y;
}

Signal Dense::backward(const Signal& dy) {
  Signal dx(x_.channels, x_.n);
  for (size_t o = 0; o < out_dim_; ++o) {
    double g = dy.data[o];
    b_.grad[o] += g;
    const double* wrow = &w_.value[o * in_dim_];
    double* gwrow = &w_.grad[o * in_dim_];
    for (size_t i = 0; i < in_dim_; ++i) {
      gwrow[i] += g * x_.data[i];
      dx.data[i] += g * wrow[i];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// LstmLast

LstmLast::LstmLast(size_t in_ch, size_t hidden, std::mt19937_64& gen)
    : in_ch_(in_ch), hidden_(hidden) {
  wx_.init("lstm_wx", {4 * hidden, in_ch});
  wh_.init("lstm_wh", {4 * hidden, hidden});
  b_.init("lstm_b", {4 * hidden});
  glorot_fill(wx_, in_ch, hidden, gen);
  glorot_fill(wh_, hidden, hidden, gen);
  for (size_t h = 0; h < hidden; ++h) b_.value[hidden + h] = 1.0;  // forget bias
}

namespace {
inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

Signal LstmLast::forward(const Signal& x) {
  if (x.channels != in_ch_) fail("lstm: channel mismatch");
  if (x.n == 0) fail("lstm: zero-length input");
  x_ = x;
  size_t h4 = 4 * hidden_;
  gates_.assign(x.n * h4, 0.0);
  cells_.assign(x.n * hidden_, 0.0);
  hs_.assign(x.n * hidden_, 0.0);

  std::vector<double> z(h4);
  for (size_t t = 0; t < x.n; ++t) {
    const double* h_prev = t > 0 ? &hs_[(t - 1) * hidden_] : nullptr;
    const double* c_prev = t > 0 ? &cells_[(t - 1) * hidden_] : nullptr;
    for (size_t r = 0; r < h4; ++r) {
      double acc = b_.value[r];
      const double* wxr = &wx_.value[r * in_ch_];
      for (size_t i = 0; i < in_ch_; ++i) acc += wxr[i] * x.at(i, t);
      if (h_prev) {
        const double* whr = &wh_.value[r * hidden_];
        for (size_t i = 0; i < hidden_; ++i) acc += whr[i] * h_prev[i];
      }
      z[r] = acc;
    }
    double* gate = &gates_[t * h4];
    double* c = &cells_[t * hidden_];
    double* h = &hs_[t * hidden_];
    for (size_t k = 0; k < hidden_; ++k) {
      double gi = sigmoid(z[k]);
      double gf = sigmoid(z[hidden_ + k]);
      double gg = std::tanh(z[2 * hidden_ + k]);
      double go = sigmoid(z[3 * hidden_ + k]);
      gate[k] = gi;
      gate[hidden_ + k] = gf;
      gate[2 * hidden_ + k] = gg;
      gate[3 * hidden_ + k] = go;
      double cp = c_prev ? c_prev[k] : 0.0;
      c[k] = gf * cp + gi * gg;
      h[k] = go * std::tanh(c[k]);
    }
  }
  Signal y(hidden_, 1);
  std::copy(hs_.end() - static_cast<long>(hidden_), hs_.end(), y.data.begin());
  return y;
}

Signal LstmLast::backward(const Signal& dy) {
  size_t h4 = 4 * hidden_;
  size_t steps = x_.n;
  Signal dx(in_ch_, steps);
  std::vector<double> dh(dy.data);
  std::vector<double> dc(hidden_, 0.0);
  std::vector<double> dz(h4);
  std::vector<double> dh_prev(hidden_);

  for (size_t ti = steps; ti-- > 0;) {
    const double* gate = &gates_[ti * h4];
    const double* c = &cells_[ti * hidden_];
    const double* c_prev = ti > 0 ? &cells_[(ti - 1) * hidden_] : nullptr;
    const double* h_prev = ti > 0 ? &hs_[(ti - 1) * hidden_] : nullptr;

    for (size_t k = 0; k < hidden_; ++k) {
      double gi = gate[k], gf = gate[hidden_ + k], gg = gate[2 * hidden_ + k],
             go = gate[3 * hidden_ + k];
      double tc = std::tanh(c[k]);
      double dck = dc[k] + dh[k] * go * (1.0 - tc * tc);
      double cp = c_prev ? c_prev[k] : 0.0;
      dz[k] = (dck * gg) * gi * (1.0 - gi);                 // input gate
      dz[hidden_ + k] = (dck * cp) * gf * (1.0 - gf);       // forget gate
      dz[2 * hidden_ + k] = (dck * gi) * (1.0 - gg * gg);   // cell candidate
      dz[3 * hidden_ + k] = (dh[k] * tc) * go * (1.0 - go); // output gate
      dc[k] = dck * gf;
    }
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (size_t r = 0; r < h4; ++r) {
      double g = dz[r];
      if (g == 0.0) continue;
      b_.grad[r] += g;
      double* gwx = &wx_.grad[r * in_ch_];
      const double* wxr = &wx_.value[r * in_ch_];
      for (size_t i = 0; i < in_ch_; ++i) {
        gwx[i] += g * x_.at(i, ti);
        dx.at(i, ti) += g * wxr[i];
      }
      if (h_prev) {
        double* gwh = &wh_.grad[r * hidden_];
        const double* whr = &wh_.value[r * hidden_];
        for (size_t i = 0; i < hidden_; ++i) {
          gwh[i] += g * h_prev[i];
          dh_prev[i] += g * whr[i];
        }
      }
    }
    dh = dh_prev;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// SequentialNet

Signal SequentialNet::forward(const Signal& x) {
  Signal cur = x;
  for (auto& layer : layers_) cur = layer->forward(cur);
  return cur;
}

void SequentialNet::backward(const Signal& dloss) {
  Signal cur = dloss;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    cur = (*it)->backward(cur);
  }
}

std::vector<ParamBlock*> SequentialNet::params() {
  std::vector<ParamBlock*> out;
  for (auto& layer : layers_) {
    for (ParamBlock* p : layer->params()) out.push_back(p);
  }
  return out;
}

void SequentialNet::zero_grad() {
  for (ParamBlock* p : params()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

size_t SequentialNet::param_count() {
  size_t total = 0;
  for (ParamBlock* p : params()) total += p->size();
  return total;
}

// ---------------------------------------------------------------------------
// Loss and optimizer

std::vector<double> softmax(const std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

SoftmaxResult softmax_cross_entropy(const std::vector<double>& logits, int target,
                                    double weight) {
  SoftmaxResult r;
  r.probs = softmax(logits);
  double p = std::max(r.probs[static_cast<size_t>(target)], 1e-300);
  r.loss = -weight * std::log(p);
  r.dlogits = r.probs;
  for (size_t i = 0; i < r.dlogits.size(); ++i) {
    double y = (static_cast<int>(i) == target) ? 1.0 : 0.0;
    r.dlogits[i] = weight * (r.dlogits[i] - y);
  }
  return r;
}

void Adam::step(const std::vector<ParamBlock*>& params) {
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (ParamBlock* p : params) {
    for (size_t i = 0; i < p->size(); ++i) {
      double g = p->grad[i];
      p->adam_m[i] = cfg_.beta1 * p->adam_m[i] + (1.0 - cfg_.beta1) * g;
      p->adam_v[i] = cfg_.beta2 * p->adam_v[i] + (1.0 - cfg_.beta2) * g * g;
      double mhat = p->adam_m[i] / bc1;
      double vhat = p->adam_v[i] / bc2;
      p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Architectures

SequentialNet build_dcnn(size_t in_channels, size_t window_len, size_t n_classes,
                         uint64_t seed) {
  if (window_len < 20) {
    fail("dcnn: window too short for two pool stages (need >= 20 samples, got " +
         std::to_string(window_len) + ")");
  }
  std::mt19937_64 gen(seed_for(seed, "dcnn-init"));
  SequentialNet net;
  net.add(std::make_unique<Conv1d>(in_channels, 32, 5, gen));
  net.add(std::make_unique<Relu>());
  net.add(std::make_unique<MaxPool2>());
  net.add(std::make_unique<Conv1d>(32, 64, 5, gen));
  net.add(std::make_unique<Relu>());
  net.add(std::make_unique<MaxPool2>());
  net.add(std::make_unique<Flatten>());
  size_t flat = 64 * (window_len / 2 / 2);
  net.add(std::make_unique<Dense>(flat, 128, gen));
  net.add(std::make_unique<Relu>());
  net.add(std::make_unique<Dense>(128, n_classes, gen));
  return net;
}

SequentialNet build_lstm(size_t in_channels, size_t n_classes, size_t hidden,
                         uint64_t seed) {
  std::mt19937_64 gen(seed_for(seed, "lstm-init"));
  SequentialNet net;
  net.add(std::make_unique<LstmLast>(in_channels, hidden, gen));
  net.add(std::make_unique<Dense>(hidden, n_classes, gen));
  return net;
}

// ---------------------------------------------------------------------------
// Training

namespace {

double macro_f1_of(const std::vector<int>& truth, const std::vector<int>& pred,
                   size_t n_classes) {
  std::vector<size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == pred[i]) {
      tp[static_cast<size_t>(truth[i])]++;
    } else {
      fn[static_cast<size_t>(truth[i])]++;
      fp[static_cast<size_t>(pred[i])]++;
    }
  }
  double sum = 0.0;
  for (size_t k = 0; k < n_classes; ++k) {
    double p = tp[k] + fp[k] > 0 ? static_cast<double>(tp[k]) / (tp[k] + fp[k]) : 0.0;
    double r = tp[k] + fn[k] > 0 ? static_cast<double>(tp[k]) / (tp[k] + fn[k]) : 0.0;
    sum += (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(n_classes);
}

}  // namespace

NetTrainResult train_net(SequentialNet& net, const std::vector<Signal>& train_x,
                         const std::vector<int>& train_y,
                         const std::vector<Signal>& val_x, const std::vector<int>& val_y,
                         size_t n_classes, const NetTrainConfig& cfg) {
  if (train_x.empty() || train_x.size() != train_y.size()) {
    fail("train_net: bad training set");
  }
  std::vector<double> class_weight(n_classes, 1.0);
  if (cfg.class_weights) {
    std::vector<size_t> counts(n_classes, 0);
    for (int y : train_y) counts[static_cast<size_t>(y)]++;
    for (size_t k = 0; k < n_classes; ++k) {
      class_weight[k] = counts[k] > 0 ? static_cast<double>(train_y.size()) /
                                            (static_cast<double>(n_classes) * counts[k])
                                      : 0.0;
    }
  }

  Adam adam(cfg.adam);
  std::mt19937_64 gen(seed_for(cfg.seed, "net-shuffle"));
  std::vector<size_t> order(train_x.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  NetTrainResult result;
  std::vector<std::vector<double>> best_params;
  auto snapshot = [&]() {
    best_params.clear();
    for (ParamBlock* p : net.params()) best_params.push_back(p->value);
  };
  auto restore = [&]() {
    auto params = net.params();
    for (size_t i = 0; i < params.size(); ++i) params[i]->value = best_params[i];
  };

  std::vector<double> probs;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_deterministic(order, gen);
    double epoch_loss = 0.0;
    size_t n_batches = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      double total_w = 0.0;
      for (size_t i = start; i < end; ++i) {
        total_w += class_weight[static_cast<size_t>(train_y[order[i]])];
      }
      net.zero_grad();
      double batch_loss = 0.0;
      for (size_t i = start; i < end; ++i) {
        size_t idx = order[i];
        Signal out = net.forward(train_x[idx]);
        double w = class_weight[static_cast<size_t>(train_y[idx])] / total_w;
        SoftmaxResult sr = softmax_cross_entropy(out.data, train_y[idx], w);
        batch_loss += sr.loss;
        Signal dloss(out.channels, out.n);
        dloss.data = sr.dlogits;
        net.backward(dloss);
      }
      adam.step(net.params());
      epoch_loss += batch_loss;
      ++n_batches;
    }

    std::vector<int> preds(val_x.size());
    for (size_t i = 0; i < val_x.size(); ++i) preds[i] = net_predict(net, val_x[i], probs);
    double f1 = macro_f1_of(val_y, preds, n_classes);
    result.log.push_back({epoch, epoch_loss / std::max<size_t>(1, n_batches), f1});
    if (f1 > result.best_val_macro_f1 + 1e-12 || result.best_epoch < 0) {
      result.best_val_macro_f1 = f1;
      result.best_epoch = epoch;
      snapshot();
    }
    if (epoch - result.best_epoch >= cfg.patience) break;
  }
  if (!best_params.empty()) restore();
  return result;
}

int net_predict(SequentialNet& net, const Signal& x, std::vector<double>& probs) {
  Signal out = net.forward(x);
  probs = softmax(out.data);
  size_t best = 0;
  for (size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace harbench::nn
