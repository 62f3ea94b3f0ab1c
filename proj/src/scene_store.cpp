#include "crbgate/scene_store.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <regex>

#include "crbgate/errors.hpp"
#include "crbgate/io.hpp"

namespace crbgate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(millis));
  return out;
}

// Canonical form: decode (validating) and re-encode.
json canonical(const json& scene) { return io::to_json(io::scene_from_json(scene)); }

bool valid_id(const std::string& id) {
  static const std::regex uuid("^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$");
  return std::regex_match(id, uuid);
}

}  // namespace

RevisionConflict::RevisionConflict(std::uint64_t expected, std::uint64_t current)
    : std::runtime_error("stale revision " + std::to_string(expected) + "; current revision is " +
                         std::to_string(current)),
      current_(current) {}

std::string make_uuid() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  {
    std::lock_guard lock(mu);
    hi = rng();
    lo = rng();
  }
  hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08llx-%04llx-%04llx-%04llx-%012llx",
                static_cast<unsigned long long>(hi >> 32),
                static_cast<unsigned long long>((hi >> 16) & 0xFFFF),
                static_cast<unsigned long long>(hi & 0xFFFF),
                static_cast<unsigned long long>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

json to_json(const SceneRecord& r) {
  return {{"scene_id", r.scene_id},
          {"revision", r.revision},
          {"created_at", r.created_at},
          {"updated_at", r.updated_at},
          {"scene", r.scene}};
}

SceneStore::SceneStore(fs::path data_dir) : dir_(std::move(data_dir)) {
  fs::create_directories(dir_);
}

fs::path SceneStore::path_for(const std::string& scene_id) const { return dir_ / (scene_id + ".json"); }

std::mutex& SceneStore::lock_for(const std::string& scene_id) {
  std::lock_guard guard(locks_guard_);
  auto& slot = locks_[scene_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void SceneStore::write(const SceneRecord& record) const {
  const fs::path final_path = path_for(record.scene_id);
  const fs::path tmp = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << to_json(record).dump(2) << '\n';
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

std::optional<SceneRecord> SceneStore::read(const std::string& scene_id) const {
  if (!valid_id(scene_id)) return std::nullopt;
  std::ifstream in(path_for(scene_id), std::ios::binary);
  if (!in) return std::nullopt;
  const json j = json::parse(in);
  return SceneRecord{j.at("scene_id").get<std::string>(), j.at("scene"),
                     j.at("created_at").get<std::string>(), j.at("updated_at").get<std::string>(),
                     j.at("revision").get<std::uint64_t>()};
}

SceneRecord SceneStore::create(const json& scene) {
  SceneRecord r;
  r.scene = canonical(scene);
  r.scene_id = make_uuid();
  r.created_at = utc_now();
  r.updated_at = r.created_at;
  r.revision = 1;
  std::lock_guard lock(lock_for(r.scene_id));
  write(r);
  return r;
}

std::optional<SceneRecord> SceneStore::get(const std::string& scene_id) const {
  return read(scene_id);
}

std::optional<SceneRecord> SceneStore::update(const std::string& scene_id, const json& scene,
                                              std::uint64_t expected_revision) {
  if (!valid_id(scene_id)) return std::nullopt;
  const json validated = canonical(scene);
  std::lock_guard lock(lock_for(scene_id));
  auto current = read(scene_id);
  if (!current) return std::nullopt;
  if (current->revision != expected_revision) {
    throw RevisionConflict(expected_revision, current->revision);
  }
  current->scene = validated;
  current->revision += 1;
  current->updated_at = utc_now();
  write(*current);
  return current;
}

}  // namespace crbgate
