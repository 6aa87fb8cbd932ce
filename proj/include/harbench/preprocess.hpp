#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "harbench/dataset.hpp"

namespace harbench {

struct WindowOrigin {
  size_t recording_index = 0;
  size_t start_index = 0;
};

struct SensorWindow {
  std::string user_id;
  int16_t label_id = -1;
  std::string label;     // canonical
  double rate_hz = 0.0;
  size_t n = 0;
  std::vector<double> accel;  // n*3, row-major [t][axis]
  std::vector<double> gyro;   // n*3 or empty
  WindowOrigin origin;

  bool has_gyro() const { return !gyro.empty(); }
  double accel_at(size_t t, size_t axis) const { return accel[t * 3 + axis]; }
  double gyro_at(size_t t, size_t axis) const { return gyro[t * 3 + axis]; }
  size_t channel_count() const { return has_gyro() ? 6 : 3; }
  /// Channel c in [0,6): accel x/y/z then gyro x/y/z.
  double channel_at(size_t t, size_t c) const {
    return c < 3 ? accel[t * 3 + c] : gyro[t * 3 + (c - 3)];
  }
};

struct SplitSpec {
  std::array<int, 4> ratios = {4, 1, 1, 2};  // train : val : test_seen : test_unseen
  uint64_t seed = 0;
};

enum class Partition { train, val, test_seen, test_unseen };

std::string partition_name(Partition p);
Partition partition_from_name(const std::string& name);

struct SplitAssignment {
  std::map<std::string, Partition> by_user;

  Partition partition_of(const std::string& user_id) const;
  std::array<size_t, 4> sizes() const;
};

/// Bin-mean downsampling: each output sample is the mean of one
/// non-overlapping source bin of length round(source_hz/target_hz);
/// timestamps at bin centers; trailing partial bin dropped.
Recording resample(const Recording& recording, double target_hz);

/// Fixed-duration windows in chronological order. Window label is the
/// majority per-sample label; windows whose majority covers < 90% of the
/// samples are discarded. A recording shorter than one window yields an
/// empty list.
std::vector<SensorWindow> make_windows(const Recording& recording, const LabelSchema& schema,
                                       size_t recording_index, double duration_s,
                                       double stride_s);

std::vector<SensorWindow> make_windows(const Dataset& dataset, double duration_s,
                                       double stride_s);

/// Users shuffled by the seeded RNG, then allotted to the four partitions by
/// largest-remainder apportionment of the ratios.
SplitAssignment split_users(const Dataset& dataset, const SplitSpec& spec);

std::string split_to_json(const SplitAssignment& split);
SplitAssignment split_from_json(const std::string& json_text);

}  // namespace harbench
