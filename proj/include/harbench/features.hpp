#pragma once

#include <string>
#include <vector>

#include "harbench/preprocess.hpp"

namespace harbench {

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names;

  size_t dim() const { return values.size(); }
};

/// Per channel: mean, std (population), min, max, interquartile range,
/// zero-crossing rate after mean removal, dominant non-DC DFT frequency in
/// Hz, spectral energy; plus pairwise channel correlations and the
/// accelerometer signal-magnitude-area. Gyro channels included iff present.
/// D = 3*8+3+1 = 28 without gyro, 6*8+15+1 = 64 with.
FeatureVector extract_features(const SensorWindow& window);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // population; 0 marks a pass-through (centered) dim
};

/// Per-dimension z-score statistics from the training vectors only.
Standardizer fit_standardizer(const std::vector<FeatureVector>& train);
FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v);

/// Dominant non-DC frequency of `x` sampled at `rate_hz`, by the
/// magnitude-maximal DFT bin in (0, N/2]. Direct O(N^2) evaluation.
double dominant_frequency(const std::vector<double>& x, double rate_hz);

/// Matrix export with a names header row, for debugging.
std::string features_to_csv(const std::vector<FeatureVector>& rows,
                            const std::vector<std::string>& labels);

}  // namespace harbench
