#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace harbench {

inline constexpr const char* kToolVersion = "hargpt-bench 0.1.0";

/// Run manifest: resolved config, dataset fingerprint, split assignment,
/// per-stage wall clock and a digest of every output artifact. The manifest
/// plus the response cache is enough to replay a run.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string resolved_config;
  std::string dataset_fingerprint;
  std::map<std::string, std::string> split_assignment;  // user -> partition
  std::map<std::string, double> stage_wall_ms;
  std::map<std::string, std::string> artifact_digests;  // path relative to outdir

  static RunManifest load_or_create(const std::filesystem::path& out_dir);
  void save(const std::filesystem::path& out_dir) const;

  /// Registers artifacts (hashing their current bytes) and the stage timing.
  void record_stage(const std::filesystem::path& out_dir, const std::string& stage,
                    double wall_ms, const std::vector<std::filesystem::path>& artifacts);

  /// Every listed artifact exists and hashes to its recorded digest.
  void verify_artifacts(const std::filesystem::path& out_dir) const;
};

}  // namespace harbench
