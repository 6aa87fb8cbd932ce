#include "harbench/manifest.hpp"

#include <nlohmann/json.hpp>

#include "harbench/util.hpp"

namespace harbench {

using json = nlohmann::ordered_json;

RunManifest RunManifest::load_or_create(const std::filesystem::path& out_dir) {
  RunManifest m;
  auto path = out_dir / "manifest.json";
  if (!std::filesystem::exists(path)) return m;
  json j = json::parse(read_file(path));
  m.tool_version = j.value("tool_version", std::string(kToolVersion));
  m.resolved_config = j.value("resolved_config", std::string());
  m.dataset_fingerprint = j.value("dataset_fingerprint", std::string());
  if (j.contains("split_assignment")) {
    for (auto it = j["split_assignment"].begin(); it != j["split_assignment"].end(); ++it) {
      m.split_assignment[it.key()] = it.value().get<std::string>();
    }
  }
  if (j.contains("stage_wall_ms")) {
    for (auto it = j["stage_wall_ms"].begin(); it != j["stage_wall_ms"].end(); ++it) {
      m.stage_wall_ms[it.key()] = it.value().get<double>();
    }
  }
  if (j.contains("artifacts")) {
    for (auto it = j["artifacts"].begin(); it != j["artifacts"].end(); ++it) {
      m.artifact_digests[it.key()] = it.value().get<std::string>();
    }
  }
  return m;
}

void RunManifest::save(const std::filesystem::path& out_dir) const {
  json j;
  j["tool_version"] = tool_version;
  j["resolved_config"] = resolved_config;
  j["dataset_fingerprint"] = dataset_fingerprint;
  j["split_assignment"] = json::object();
  for (const auto& [k, v] : split_assignment) j["split_assignment"][k] = v;
  j["stage_wall_ms"] = json::object();
  for (const auto& [k, v] : stage_wall_ms) j["stage_wall_ms"][k] = v;
  j["artifacts"] = json::object();
  for (const auto& [k, v] : artifact_digests) j["artifacts"][k] = v;
  write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

void RunManifest::record_stage(const std::filesystem::path& out_dir, const std::string& stage,
                               double wall_ms,
                               const std::vector<std::filesystem::path>& artifacts) {
  stage_wall_ms[stage] = wall_ms;
  // a re-run owns its stage directory outright; drop stale entries
  for (auto it = artifact_digests.begin(); it != artifact_digests.end();) {
    if (it->first.rfind(stage + "/", 0) == 0) {
      it = artifact_digests.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& p : artifacts) {
    auto rel = std::filesystem::relative(p, out_dir).generic_string();
    artifact_digests[rel] = sha256_hex(read_file(p));
  }
}

void RunManifest::verify_artifacts(const std::filesystem::path& out_dir) const {
  for (const auto& [rel, digest] : artifact_digests) {
    auto path = out_dir / rel;
    if (!std::filesystem::exists(path)) {
      fail("manifest artifact missing: " + path.string());
    }
    std::string actual = sha256_hex(read_file(path));
    if (actual != digest) {
      fail("manifest artifact digest mismatch: " + path.string());
    }
  }
}

}  // namespace harbench
