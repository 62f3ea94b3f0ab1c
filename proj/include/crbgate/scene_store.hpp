#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "crbgate/montecarlo_sim.hpp"

namespace crbgate {

struct SceneRecord {
  std::string scene_id;
  /// Canonical scene JSON as validated and stored.
  nlohmann::json scene;
  std::string created_at;  // ISO 8601, UTC
  std::string updated_at;
  std::uint64_t revision = 0;
};

/// Thrown by SceneStore::update when the caller's revision is stale.
class RevisionConflict : public std::runtime_error {
 public:
  RevisionConflict(std::uint64_t expected, std::uint64_t current);

  std::uint64_t current() const noexcept { return current_; }

 private:
  std::uint64_t current_;
};

/// One JSON file per scene under a data directory, written via rename so a
/// crash never leaves a torn file. Mutations of one scene are serialized.
class SceneStore {
 public:
  explicit SceneStore(std::filesystem::path data_dir);

  /// Validates and persists a new scene at revision 1.
  SceneRecord create(const nlohmann::json& scene);
  std::optional<SceneRecord> get(const std::string& scene_id) const;
  /// Replaces the scene if `expected_revision` is current; the stored
  /// revision then increments. Returns nullopt for unknown ids.
  std::optional<SceneRecord> update(const std::string& scene_id, const nlohmann::json& scene,
                                    std::uint64_t expected_revision);

  const std::filesystem::path& data_dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& scene_id) const;
  std::mutex& lock_for(const std::string& scene_id);
  void write(const SceneRecord& record) const;
  std::optional<SceneRecord> read(const std::string& scene_id) const;

  std::filesystem::path dir_;
  std::mutex locks_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

nlohmann::json to_json(const SceneRecord& record);

/// Random version-4 UUID string.
std::string make_uuid();

}  // namespace crbgate
