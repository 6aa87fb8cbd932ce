#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace harbench {

enum class Placement { wrist, waist, other };

std::string placement_name(Placement p);

struct ImuSample {
  double t = 0.0;                       // seconds since recording start
  std::array<double, 3> accel{};        // always present
  std::array<double, 3> gyro{};         // valid iff Recording::has_gyro
};

struct LabelSchema {
  std::string dataset_name;
  std::vector<std::string> labels;  // canonical, ordered

  int index_of(const std::string& canonical) const;  // -1 when absent
  bool contains(const std::string& canonical) const { return index_of(canonical) >= 0; }
  size_t size() const { return labels.size(); }
};

LabelSchema capture24_schema();  // {sleep, walking, bicycling, sit-stand}
LabelSchema hhar_schema();       // {upstairs, downstairs}

/// Canonical spelling for a raw dataset label ("bicycle" -> "bicycling",
/// "stairsup" -> "upstairs", ...). Returns the lowercased input when no
/// table entry applies.
std::string canonical_label(const std::string& raw);

/// Surface forms accepted for a canonical label in free text, used by the
/// answer parser ("cycling" -> bicycling, "ascending stairs" -> upstairs).
const std::vector<std::pair<std::string, std::string>>& label_synonyms();

struct Recording {
  std::string user_id;
  Placement placement = Placement::other;
  double sample_rate_hz = 0.0;
  bool has_gyro = false;
  std::vector<ImuSample> samples;
  std::vector<int16_t> labels;  // indices into the active schema, parallel to samples

  size_t size() const { return samples.size(); }
};

struct Dataset {
  LabelSchema schema;
  std::vector<Recording> recordings;
  std::string accel_unit = "unspecified";  // recorded, never converted
  std::map<std::string, size_t> dropped_rows;  // per out-of-schema raw label

  /// Throws on any broken invariant (labels outside schema, non-monotonic
  /// timestamps, mixed gyro schemas, labels with no recording).
  void validate() const;

  /// SHA-256 over a canonical byte serialization of all recordings.
  std::string fingerprint() const;
};

/// One CSV per user, header `t,ax,ay,az,label`, accelerometer only.
Dataset load_capture24(const std::filesystem::path& root, const LabelSchema& schema);

/// CSVs with header `t,ax,ay,az,gx,gy,gz,user,label`; rows grouped by user,
/// only schema labels retained.
Dataset load_hhar(const std::filesystem::path& root, const LabelSchema& schema);

/// Writes `dataset` back out in the matching CSV schema (one file per
/// recording, %.6f values) so a reload reproduces it.
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthSpec {
  LabelSchema schema;
  // generator name per label; known names: "near-zero-noise", "gait-sine",
  // "smooth-fast-periodic", "level-steps", "stair-up", "stair-down"
  std::map<std::string, std::string> generators;
  size_t n_users = 4;
  double seconds_per_label = 120.0;
  double sample_rate_hz = 50.0;
  bool with_gyro = false;
};

/// Spec with the stock generator assignment for the 4-class schema.
SynthSpec synth_spec_capture24_like(size_t n_users, double seconds_per_label,
                                    double sample_rate_hz);
/// Stock 2-class (stairs) spec, gyro present.
SynthSpec synth_spec_hhar_like(size_t n_users, double seconds_per_label,
                               double sample_rate_hz);

/// Deterministic: identical (spec, seed) yields byte-identical streams.
Dataset synth_corpus(const SynthSpec& spec, uint64_t seed);

}  // namespace harbench
