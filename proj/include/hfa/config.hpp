#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hfa/experiments.hpp"
#include "hfa/optimizer.hpp"

namespace hfa {

/// One camera of a project: an image file or a generated target.
struct ViewEntry {
  double elevation_deg = 45.0;
  double azimuth_deg = 0.0;
  std::filesystem::path image;        // absolute; empty when `target` is set
  std::optional<TargetKind> target;
  std::uint64_t target_seed = 0;
  friend bool operator==(const ViewEntry&, const ViewEntry&) = default;
};

struct ExportConfig {
  int segments_per_bar = 1;
  double print_strip_width_mm = 0.085;  // printed width of one final-resolution bar
  double base_thickness_mm = 0.5;
  friend bool operator==(const ExportConfig&, const ExportConfig&) = default;
};

struct AblationSection {
  std::vector<TargetPair> pairs = ablation_pairs();
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  friend bool operator==(const AblationSection&, const AblationSection&) = default;
};

struct ProjectConfig {
  std::vector<ViewEntry> views;
  int image_size = 32;
  OptimizerConfig optimizer;
  int final_samples = 4;  // stratified rays per pixel axis of the final hard renders
  ExportConfig mesh;
  AblationSection ablation;
  std::filesystem::path output_dir;  // absolute
  friend bool operator==(const ProjectConfig&, const ProjectConfig&) = default;
};

struct ConfigOptions {
  bool check_images = true;  // decode every referenced image while validating
  std::string output_root;   // base of relative output directories; empty = $HFA_OUTPUT_ROOT or cwd
};

/// Reads and fully validates a JSON config. Relative image paths resolve against the config's
/// directory. Syntax errors name line and column; validation lists every violated constraint.
ProjectConfig load_config(const std::filesystem::path& path, const ConfigOptions& options = {});
ProjectConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::string_view default_name = "run", const ConfigOptions& options = {});

/// Every field explicit, paths absolute. Re-parses to an equal ProjectConfig.
std::string echo_config(const ProjectConfig& cfg);

/// Desired images of every view, loaded (or generated) at cfg.image_size.
std::vector<ViewSpec> load_views(const ProjectConfig& cfg, std::vector<std::string>* warnings = nullptr);

std::filesystem::path default_output_root(const ConfigOptions& options = {});

}  // namespace hfa
