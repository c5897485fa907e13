#include "calib/store.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include "calib/digest.hpp"
#include "calib/error.hpp"

namespace calib {

namespace {
constexpr int kMaxRetries = 3;
constexpr std::string_view kBlobPrefix = "sha256:";
}  // namespace

ProjectStore::ProjectStore(std::optional<std::filesystem::path> data_dir) : dir_(std::move(data_dir)) {
  if (!dir_) return;
  std::filesystem::create_directories(*dir_ / "blobs");
  for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
    if (entry.path().extension() != ".json") continue;
    Project p = load_project(entry.path());
    if (p.id.empty()) p.id = entry.path().stem().string();
    if (p.id.size() > 1 && p.id[0] == 'p') {
      try {
        next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(p.id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
    const std::string id = p.id;
    projects_[id] = Entry{std::move(p), 1};
  }
  for (const auto& entry : std::filesystem::directory_iterator(*dir_ / "blobs")) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    blobs_[std::string(kBlobPrefix) + entry.path().filename().string()] = ss.str();
  }
}

void ProjectStore::persist(const Project& p) const {
  if (dir_) save_project(p, *dir_ / (p.id + ".json"));
}

ProjectStore::Snapshot ProjectStore::create(Project p) {
  std::unique_lock lock(mu_);
  p.id = "p" + std::to_string(next_id_++);
  p.validate();
  persist(p);
  projects_[p.id] = Entry{p, 1};
  return {std::move(p), "1"};
}

std::optional<ProjectStore::Snapshot> ProjectStore::get(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = projects_.find(id);
  if (it == projects_.end()) return std::nullopt;
  return Snapshot{it->second.project, std::to_string(it->second.revision)};
}

ProjectStore::Snapshot ProjectStore::update(const std::string& id,
                                            const std::optional<std::string>& expected_token,
                                            const std::function<void(Project&)>& mutate) {
  for (int attempt = 0;; ++attempt) {
    Project working;
    std::uint64_t base = 0;
    {
      std::shared_lock lock(mu_);
      auto it = projects_.find(id);
      if (it == projects_.end()) throw StoreError(StoreError::Kind::NotFound, "unknown project " + id);
      base = it->second.revision;
      if (expected_token && *expected_token != std::to_string(base)) {
        throw StoreError(StoreError::Kind::StaleToken, "stale version token for project " + id);
      }
      working = it->second.project;
    }

    mutate(working);
    working.id = id;
    working.validate();

    std::unique_lock lock(mu_);
    Entry& entry = projects_.at(id);
    if (entry.revision != base) {
      if (expected_token || attempt + 1 >= kMaxRetries) {
        throw StoreError(StoreError::Kind::StaleToken, "project " + id + " changed concurrently");
      }
      continue;
    }
    persist(working);
    entry.project = working;
    ++entry.revision;
    return {std::move(working), std::to_string(entry.revision)};
  }
}

std::string ProjectStore::put_blob(std::string bytes) {
  const std::string hex = sha256_hex(bytes);
  const std::string ref = std::string(kBlobPrefix) + hex;
  std::unique_lock lock(mu_);
  if (dir_) {
    std::ofstream out(*dir_ / "blobs" / hex, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out) throw CalibError(ErrorCode::IoFailure, "cannot write blob " + hex);
  }
  blobs_[ref] = std::move(bytes);
  return ref;
}

std::optional<std::string> ProjectStore::get_blob(const std::string& ref) const {
  std::shared_lock lock(mu_);
  auto it = blobs_.find(ref);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

}  // namespace calib
