#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>

#include "calib/project.hpp"

namespace calib {

class StoreError : public std::runtime_error {
 public:
  enum class Kind { NotFound, StaleToken };
  StoreError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Thread-safe project registry with optimistic concurrency. Every commit
/// bumps the project's version token; a mutation that names a token other
/// than the current one fails with StaleToken. Content-addressed blobs live
/// beside the projects. With a data directory, projects persist as
/// `<dir>/<id>.json` and blobs as `<dir>/blobs/<hex>`.
class ProjectStore {
 public:
  struct Snapshot {
    Project project;
    std::string token;
  };

  explicit ProjectStore(std::optional<std::filesystem::path> data_dir = std::nullopt);

  /// Assigns the next id ("p1", "p2", ...) and token "1".
  Snapshot create(Project p);
  std::optional<Snapshot> get(const std::string& id) const;

  /// Applies `mutate` to a copy of the project, validates the result and
  /// commits it if the token has not moved meanwhile. Without an expected
  /// token, concurrent commits cause a bounded number of retries. Exceptions
  /// thrown by `mutate` leave the store untouched.
  Snapshot update(const std::string& id, const std::optional<std::string>& expected_token,
                  const std::function<void(Project&)>& mutate);

  /// Returns "sha256:<hex>".
  std::string put_blob(std::string bytes);
  std::optional<std::string> get_blob(const std::string& ref) const;

 private:
  struct Entry {
    Project project;
    std::uint64_t revision = 1;
  };

  void persist(const Project& p) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Entry> projects_;
  std::map<std::string, std::string> blobs_;
  std::uint64_t next_id_ = 1;
};

}  // namespace calib
