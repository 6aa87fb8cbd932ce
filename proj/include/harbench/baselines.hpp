#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "harbench/eval.hpp"
#include "harbench/features.hpp"
#include "harbench/nn.hpp"
#include "harbench/rf.hpp"
#include "harbench/svm.hpp"

namespace harbench {

enum class ModelKind { rf, svm, dcnn, lstm };

std::string model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

struct InputContract {
  bool wants_features = false;  // standardized feature vectors (RF, SVM)
  size_t feature_dim = 0;
  size_t channels = 0;  // raw windows (DCNN, LSTM)
  size_t window_len = 0;
};

struct TrainProvenance {
  uint64_t seed = 0;
  std::string data_fingerprint;
  std::string config_summary;
};

struct BaselineTrainOptions {
  uint64_t seed = 1;
  bool class_weights = false;
  RfConfig rf;
  SvmConfig svm;
  nn::NetTrainConfig net;
  size_t lstm_hidden = 64;
};

/// One trained baseline plus everything prediction needs (standardizer for
/// the feature models, architecture metadata for the nets). Move-only.
struct BaselineModel {
  ModelKind kind = ModelKind::rf;
  LabelSchema schema;
  InputContract contract;
  TrainProvenance provenance;
  bool converged = true;

  RandomForest rf;
  SvmOvr svm;
  Standardizer standardizer;
  nn::SequentialNet net;
  size_t lstm_hidden = 64;

  /// Applies the input contract; rejects windows that do not match it.
  std::pair<int, std::vector<double>> predict_window(const SensorWindow& w);
  std::pair<int, std::vector<double>> predict_features(const FeatureVector& standardized);
};

BaselineModel train_baseline(ModelKind kind, const std::vector<SensorWindow>& train,
                             const std::vector<SensorWindow>& val, const LabelSchema& schema,
                             const BaselineTrainOptions& opts,
                             const std::string& data_fingerprint);

/// Scores a trained model on a window set; predictions never abstain.
EvalReport evaluate_baseline(BaselineModel& model, const std::vector<SensorWindow>& windows,
                             const std::string& partition);

/// Versioned binary container: magic, kind tag, shape table, little-endian
/// 64-bit floats.
void save_model(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_model(const std::filesystem::path& path);

}  // namespace harbench
