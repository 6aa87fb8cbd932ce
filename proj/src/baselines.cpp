#include "harbench/baselines.hpp"

#include <algorithm>

#include "harbench/util.hpp"

namespace harbench {

std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::rf: return "rf";
    case ModelKind::svm: return "svm";
    case ModelKind::dcnn: return "dcnn";
    default: return "lstm";
  }
}

ModelKind model_kind_from_name(const std::string& name) {
  std::string n = to_lower(name);
  if (n == "rf") return ModelKind::rf;
  if (n == "svm") return ModelKind::svm;
  if (n == "dcnn") return ModelKind::dcnn;
  if (n == "lstm") return ModelKind::lstm;
  fail("unknown model kind: " + name);
}

namespace {

void check_window_contract(const InputContract& c, const SensorWindow& w) {
  if (c.wants_features) return;  // feature extraction handles its own checks
  if (w.channel_count() != c.channels || w.n != c.window_len) {
    fail("model contract violation: window is " + std::to_string(w.channel_count()) + "x" +
         std::to_string(w.n) + ", model expects " + std::to_string(c.channels) + "x" +
         std::to_string(c.window_len));
  }
}

}  // namespace

std::pair<int, std::vector<double>> BaselineModel::predict_features(
    const FeatureVector& standardized) {
  if (!contract.wants_features) fail("model contract violation: expected a raw window");
  if (standardized.dim() != contract.feature_dim) {
    fail("model contract violation: feature dim " + std::to_string(standardized.dim()) +
         ", model expects " + std::to_string(contract.feature_dim));
  }
  return kind == ModelKind::rf ? rf.predict(standardized.values)
                               : svm.predict(standardized.values);
}

std::pair<int, std::vector<double>> BaselineModel::predict_window(const SensorWindow& w) {
  if (contract.wants_features) {
    FeatureVector fv = extract_features(w);
    return predict_features(apply_standardizer(standardizer, fv));
  }
  check_window_contract(contract, w);
  std::vector<double> probs;
  int label = nn::net_predict(net, nn::window_to_signal(w), probs);
  return {label, probs};
}

BaselineModel train_baseline(ModelKind kind, const std::vector<SensorWindow>& train,
                             const std::vector<SensorWindow>& val, const LabelSchema& schema,
                             const BaselineTrainOptions& opts,
                             const std::string& data_fingerprint) {
  if (train.empty()) fail("train_baseline: empty training set");

  BaselineModel model;
  model.kind = kind;
  model.schema = schema;
  model.provenance = {opts.seed, data_fingerprint, model_kind_name(kind)};
  model.lstm_hidden = opts.lstm_hidden;

  std::vector<int> train_y, val_y;
  train_y.reserve(train.size());
  for (const auto& w : train) train_y.push_back(w.label_id);
  for (const auto& w : val) val_y.push_back(w.label_id);

  if (kind == ModelKind::rf || kind == ModelKind::svm) {
    std::vector<FeatureVector> raw;
    raw.reserve(train.size());
    for (const auto& w : train) raw.push_back(extract_features(w));
    model.standardizer = fit_standardizer(raw);
    std::vector<std::vector<double>> x;
    x.reserve(raw.size());
    for (const auto& fv : raw) {
      x.push_back(apply_standardizer(model.standardizer, fv).values);
    }
    model.contract.wants_features = true;
    model.contract.feature_dim = raw.front().dim();

    if (kind == ModelKind::rf) {
      RfConfig cfg = opts.rf;
      cfg.seed = opts.seed;
      cfg.class_weights = opts.class_weights;
      model.rf.fit(x, train_y, schema.size(), cfg);
    } else {
      model.svm.fit(x, train_y, schema.size(), opts.svm);
      model.converged = model.svm.converged();
    }
    return model;
  }

  // sequence models consume raw windows
  size_t channels = train.front().channel_count();
  size_t window_len = train.front().n;
  for (const auto& w : train) {
    if (w.channel_count() != channels || w.n != window_len) {
      fail("train_baseline: inconsistent window shapes in training set");
    }
  }
  model.contract.wants_features = false;
  model.contract.channels = channels;
  model.contract.window_len = window_len;

  std::vector<nn::Signal> train_x, val_x;
  train_x.reserve(train.size());
  for (const auto& w : train) train_x.push_back(nn::window_to_signal(w));
  for (const auto& w : val) val_x.push_back(nn::window_to_signal(w));

  model.net = kind == ModelKind::dcnn
                  ? nn::build_dcnn(channels, window_len, schema.size(), opts.seed)
                  : nn::build_lstm(channels, schema.size(), opts.lstm_hidden, opts.seed);
  nn::NetTrainConfig cfg = opts.net;
  cfg.seed = opts.seed;
  cfg.class_weights = opts.class_weights;
  nn::train_net(model.net, train_x, train_y, val_x, val_y, schema.size(), cfg);
  return model;
}

EvalReport evaluate_baseline(BaselineModel& model, const std::vector<SensorWindow>& windows,
                             const std::string& partition) {
  ConfusionMatrix matrix(model.schema);
  for (const auto& w : windows) {
    auto [pred, scores] = model.predict_window(w);
    matrix.add_prediction(w.label_id, pred);
  }
  return make_report(matrix, ScoringMode::abstain, model_kind_name(model.kind), partition);
}

}  // namespace harbench
