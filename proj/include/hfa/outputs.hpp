#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hfa/checkpoint.hpp"
#include "hfa/config.hpp"
#include "hfa/mesh.hpp"
#include "hfa/optimizer.hpp"

namespace hfa {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Exclusive ownership of a run directory via a lock file created with O_EXCL.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;
  static constexpr const char* kFileName = ".hfa.lock";

 private:
  std::filesystem::path path_;
};

/// step,mse,barrier,neighbor,total,phase,hard_mse,resolution,k,best (LF line endings).
std::string loss_csv(const std::vector<StepRecord>& history);

struct ManifestEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  RunStatus status = RunStatus::complete;
  std::string command;
  std::vector<ManifestEntry> files;  // sorted by path
  double final_mse = 0.0;
};

/// Hashes `files` (relative to dir) and writes manifest.json.
Manifest write_manifest(const std::filesystem::path& dir, RunStatus status, const std::string& command,
                        std::vector<std::string> files, double final_mse);
std::string manifest_text(const Manifest& manifest);

struct RunArtifacts {
  ProjectConfig project;
  std::vector<ViewSpec> views;
  OptimizeResult result;
  std::optional<SegmentedColors> segments;  // projection used for the mesh
};

/// Mesh options of a project: printed bar width over the field's bar width, slab thickness.
MeshOptions mesh_options(const ProjectConfig& project, const Heightfield& field);

/// Complete run: config echo, smooth and hard PNG per view, loss CSV, checkpoint, OBJ/MTL, manifest.
Manifest write_outputs(const RunArtifacts& run, const std::filesystem::path& dir);

/// Interrupted run: the resumable checkpoint alone, manifest status "partial".
Manifest write_partial(const RunArtifacts& run, const std::filesystem::path& dir);

}  // namespace hfa
