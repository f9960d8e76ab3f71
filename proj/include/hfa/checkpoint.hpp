#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hfa/config.hpp"
#include "hfa/optimizer.hpp"
#include "hfa/render.hpp"

namespace hfa {

enum class RunStatus { complete, partial };
std::string to_string(RunStatus status);

/// Everything needed to resume a run or to render/export its result.
struct Checkpoint {
  RunStatus status = RunStatus::complete;
  ProjectConfig project;
  OptimizerState state;
  Heightfield field;          // result: best field at the final resolution (current field if partial)
  double final_mse = 0.0;     // hard-render MSE of `field` against the project's views
  std::optional<SegmentedColors> segments;  // post-optimization projection, if computed
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Deterministic JSON text; doubles use shortest round-trip formatting.
std::string checkpoint_text(const Checkpoint& ck);
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hfa
