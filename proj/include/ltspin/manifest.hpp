#pragma once
// Run-directory bookkeeping. Each CLI command writes its artifacts into one
// directory guarded by an INCOMPLETE flag file: the flag goes down first,
// artifacts land one by one, and only when the manifest (config hash, code
// version, artifact checksums, timings) is written does the flag come off.
// A directory therefore always holds either a complete manifest or an
// explicit incomplete marker.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ltspin/textio.hpp"
#include "ltspin/version.hpp"

namespace ltspin {

struct ArtifactRecord {
  std::string name;
  std::uint64_t bytes = 0;
  std::string checksum;  // fnv1a64 of the file content, hex
};

struct TimingRecord {
  std::string label;
  double seconds = 0;
};

struct RunManifest {
  std::string command;
  std::string code_version = std::string(kVersion);
  std::string config_hash;
  std::vector<ArtifactRecord> artifacts;
  std::vector<TimingRecord> timings;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["code_version"] = code_version;
    j["config_hash"] = config_hash;
    j["artifacts"] = nlohmann::ordered_json::array();
    for (const ArtifactRecord& a : artifacts) {
      nlohmann::ordered_json ja;
      ja["name"] = a.name;
      ja["bytes"] = a.bytes;
      ja["fnv1a64"] = a.checksum;
      j["artifacts"].push_back(std::move(ja));
    }
    j["timings"] = nlohmann::ordered_json::array();
    for (const TimingRecord& t : timings) {
      nlohmann::ordered_json jt;
      jt["label"] = t.label;
      jt["seconds"] = t.seconds;
      j["timings"].push_back(std::move(jt));
    }
    return j;
  }

  std::string to_string() const { return to_json().dump(2) + "\n"; }
};

inline const char* kIncompleteFlagName = "INCOMPLETE";
inline const char* kManifestName = "manifest.json";

/// Owns one command's output directory. Artifacts written through it are
/// checksummed and recorded in insertion order; finalize() writes the
/// manifest and clears the incomplete flag.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create directory: " + dir_.string());
    // Clear any previous run's manifest before raising the flag so an
    // interrupted rerun never leaves a stale "complete" marker behind.
    std::filesystem::remove(dir_ / kManifestName, ec);
    write_raw(dir_ / kIncompleteFlagName, "run in progress or aborted\n");
  }

  const std::filesystem::path& dir() const { return dir_; }

  /// Writes an artifact and records it in the manifest-to-be.
  void write_text(const std::string& name, const std::string& content) {
    write_raw(dir_ / name, content);
    artifacts_.push_back({name, content.size(), hex_u64(fnv1a64(content))});
  }

  void add_timing(const std::string& label, double seconds) {
    timings_.push_back({label, seconds});
  }

  /// Writes manifest.json and removes the INCOMPLETE flag.
  RunManifest finalize(const std::string& command, const std::string& config_hash) {
    RunManifest manifest;
    manifest.command = command;
    manifest.config_hash = config_hash;
    manifest.artifacts = artifacts_;
    manifest.timings = timings_;
    write_raw(dir_ / kManifestName, manifest.to_string());
    std::error_code ec;
    std::filesystem::remove(dir_ / kIncompleteFlagName, ec);
    if (ec) throw std::runtime_error("cannot remove incomplete flag in " + dir_.string());
    return manifest;
  }

 private:
  static void write_raw(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }

  std::filesystem::path dir_;
  std::vector<ArtifactRecord> artifacts_;
  std::vector<TimingRecord> timings_;
};

}  // namespace ltspin
