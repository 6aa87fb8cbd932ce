#include "harbench/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "harbench/rng.hpp"
#include "harbench/util.hpp"

namespace harbench {

std::string partition_name(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::val: return "val";
    case Partition::test_seen: return "test_seen";
    default: return "test_unseen";
  }
}

Partition partition_from_name(const std::string& name) {
  if (name == "train") return Partition::train;
  if (name == "val") return Partition::val;
  if (name == "test_seen") return Partition::test_seen;
  if (name == "test_unseen") return Partition::test_unseen;
  fail("unknown partition name: " + name);
}

Partition SplitAssignment::partition_of(const std::string& user_id) const {
  auto it = by_user.find(user_id);
  if (it == by_user.end()) fail("user not in split assignment: " + user_id);
  return it->second;
}

std::array<size_t, 4> SplitAssignment::sizes() const {
  std::array<size_t, 4> out{};
  for (const auto& [user, p] : by_user) out[static_cast<size_t>(p)] += 1;
  return out;
}

Recording resample(const Recording& recording, double target_hz) {
  if (target_hz <= 0.0) fail("resample: target rate must be positive");
  if (target_hz > recording.sample_rate_hz) {
    fail("resample: upsampling unsupported (target " + format_fixed(target_hz, 3) +
         "Hz > source " + format_fixed(recording.sample_rate_hz, 3) + "Hz)");
  }
  size_t bin = static_cast<size_t>(std::llround(recording.sample_rate_hz / target_hz));
  if (bin < 1) bin = 1;

  Recording out;
  out.user_id = recording.user_id;
  out.placement = recording.placement;
  out.has_gyro = recording.has_gyro;
  out.sample_rate_hz = recording.sample_rate_hz / static_cast<double>(bin);

  size_t n_bins = recording.samples.size() / bin;  // trailing partial bin dropped
  out.samples.reserve(n_bins);
  out.labels.reserve(n_bins);
  for (size_t b = 0; b < n_bins; ++b) {
    ImuSample acc{};
    std::array<size_t, 256> votes_small{};  // schema indices are small
    for (size_t j = 0; j < bin; ++j) {
      const ImuSample& s = recording.samples[b * bin + j];
      acc.t += s.t;
      for (int a = 0; a < 3; ++a) acc.accel[a] += s.accel[a];
      if (recording.has_gyro) {
        for (int a = 0; a < 3; ++a) acc.gyro[a] += s.gyro[a];
      }
      size_t id = static_cast<size_t>(recording.labels[b * bin + j]);
      if (id < votes_small.size()) votes_small[id] += 1;
    }
    double divisor = static_cast<double>(bin);
    acc.t /= divisor;
    for (int a = 0; a < 3; ++a) acc.accel[a] /= divisor;
    if (recording.has_gyro) {
      for (int a = 0; a < 3; ++a) acc.gyro[a] /= divisor;
    }
    // bin label: majority vote, lowest id on ties
    size_t best = 0;
    for (size_t k = 1; k < votes_small.size(); ++k) {
      if (votes_small[k] > votes_small[best]) best = k;
    }
    out.samples.push_back(acc);
    out.labels.push_back(static_cast<int16_t>(best));
  }
  return out;
}

std::vector<SensorWindow> make_windows(const Recording& recording, const LabelSchema& schema,
                                       size_t recording_index, double duration_s,
                                       double stride_s) {
  if (duration_s <= 0.0 || stride_s <= 0.0) {
    fail("make_windows: duration and stride must be positive");
  }
  size_t n = static_cast<size_t>(std::llround(duration_s * recording.sample_rate_hz));
  size_t stride = static_cast<size_t>(std::llround(stride_s * recording.sample_rate_hz));
  if (n == 0 || stride == 0) fail("make_windows: window or stride rounds to zero samples");

  std::vector<SensorWindow> windows;
  if (recording.samples.size() < n) return windows;

  std::vector<size_t> votes(schema.size());
  for (size_t start = 0; start + n <= recording.samples.size(); start += stride) {
    std::fill(votes.begin(), votes.end(), 0);
    for (size_t i = 0; i < n; ++i) {
      votes[static_cast<size_t>(recording.labels[start + i])] += 1;
    }
    size_t best = 0;
    for (size_t k = 1; k < votes.size(); ++k) {
      if (votes[k] > votes[best]) best = k;
    }
    if (static_cast<double>(votes[best]) < 0.9 * static_cast<double>(n)) continue;

    SensorWindow w;
    w.user_id = recording.user_id;
    w.label_id = static_cast<int16_t>(best);
    w.label = schema.labels[best];
    w.rate_hz = recording.sample_rate_hz;
    w.n = n;
    w.origin = {recording_index, start};
    w.accel.resize(n * 3);
    if (recording.has_gyro) w.gyro.resize(n * 3);
    for (size_t i = 0; i < n; ++i) {
      const ImuSample& s = recording.samples[start + i];
      for (int a = 0; a < 3; ++a) w.accel[i * 3 + a] = s.accel[a];
      if (recording.has_gyro) {
        for (int a = 0; a < 3; ++a) w.gyro[i * 3 + a] = s.gyro[a];
      }
    }
    for (double v : w.accel) {
      if (!std::isfinite(v)) fail("make_windows: non-finite accel value");
    }
    for (double v : w.gyro) {
      if (!std::isfinite(v)) fail("make_windows: non-finite gyro value");
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<SensorWindow> make_windows(const Dataset& dataset, double duration_s,
                                       double stride_s) {
  std::vector<SensorWindow> all;
  for (size_t r = 0; r < dataset.recordings.size(); ++r) {
    auto ws = make_windows(dataset.recordings[r], dataset.schema, r, duration_s, stride_s);
    all.insert(all.end(), std::make_move_iterator(ws.begin()),
               std::make_move_iterator(ws.end()));
  }
  return all;
}

SplitAssignment split_users(const Dataset& dataset, const SplitSpec& spec) {
  long ratio_sum = 0;
  for (int r : spec.ratios) {
    if (r < 0) fail("split: negative ratio");
    ratio_sum += r;
  }
  if (ratio_sum == 0) fail("split: ratios must not all be zero");

  std::vector<std::string> users;
  for (const auto& rec : dataset.recordings) {
    if (std::find(users.begin(), users.end(), rec.user_id) == users.end()) {
      users.push_back(rec.user_id);
    }
  }
  std::sort(users.begin(), users.end());

  size_t non_zero = 0;
  for (int r : spec.ratios) non_zero += (r > 0) ? 1 : 0;
  if (users.size() < non_zero) {
    fail("split: fewer users (" + std::to_string(users.size()) +
         ") than non-zero partitions (" + std::to_string(non_zero) + ")");
  }

  std::mt19937_64 gen(seed_for(spec.seed, "user-split"));
  shuffle_deterministic(users, gen);

  // largest-remainder apportionment of the four partition quotas
  size_t u = users.size();
  std::array<size_t, 4> counts{};
  std::array<double, 4> fractions{};
  size_t assigned = 0;
  for (size_t k = 0; k < 4; ++k) {
    double quota = static_cast<double>(u) * spec.ratios[k] / static_cast<double>(ratio_sum);
    counts[k] = static_cast<size_t>(std::floor(quota));
    fractions[k] = quota - std::floor(quota);
    assigned += counts[k];
  }
  std::array<size_t, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return fractions[a] > fractions[b]; });
  for (size_t i = 0; assigned < u; ++i) {
    counts[order[i % 4]] += 1;
    ++assigned;
  }

  SplitAssignment split;
  size_t idx = 0;
  for (size_t k = 0; k < 4; ++k) {
    for (size_t c = 0; c < counts[k]; ++c) {
      split.by_user[users[idx++]] = static_cast<Partition>(k);
    }
  }
  return split;
}

std::string split_to_json(const SplitAssignment& split) {
  nlohmann::ordered_json j;
  for (const auto& [user, p] : split.by_user) j[user] = partition_name(p);
  return j.dump(2) + "\n";
}

SplitAssignment split_from_json(const std::string& json_text) {
  SplitAssignment split;
  auto j = nlohmann::json::parse(json_text);
  for (auto it = j.begin(); it != j.end(); ++it) {
    split.by_user[it.key()] = partition_from_name(it.value().get<std::string>());
  }
  return split;
}

}  // namespace harbench
