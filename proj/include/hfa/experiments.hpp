#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hfa/optimizer.hpp"

namespace hfa {

enum class TargetKind { black, white, random, stripes };
std::string to_string(TargetKind kind);
TargetKind parse_target_kind(std::string_view name);

/// black, white, seeded uniform RGB noise, or vertical black/white stripes with a 4-pixel period.
Image make_target(TargetKind kind, int size, std::uint64_t seed = 0);

struct TargetPair {
  TargetKind first = TargetKind::black;
  TargetKind second = TargetKind::white;
  std::string name() const;  // "black/white"
  friend bool operator==(const TargetPair&, const TargetPair&) = default;
};
TargetPair parse_target_pair(std::string_view text);
/// The five rows of the paper's ablation tables.
std::vector<TargetPair> ablation_pairs();

/// Two views on opposite sides (azimuth 0 and 180) at the given elevation.
std::vector<ViewSpec> opposite_views(const TargetPair& pair, int image_size, std::uint64_t seed,
                                     double elevation_deg = 45.0);

/// Adam on the full-resolution field: no coarse-to-fine, no block alternation, no annealing.
OptimizerConfig plain_variant(const OptimizerConfig& base);

enum class AblationSuite { regularization, optimization, heaviside };
std::string to_string(AblationSuite suite);
AblationSuite parse_ablation_suite(std::string_view name);

struct AblationVariant {
  std::string column;
  OptimizerConfig config;
};
/// Table columns of a suite derived from a base configuration.
std::vector<AblationVariant> ablation_variants(AblationSuite suite, const OptimizerConfig& base);

struct AblationCell {
  std::string row;
  std::string column;
  std::uint64_t seed = 0;
  double final_mse = 0.0;  // hard-render MSE of the returned field
  double final_total = 0.0;  // smooth total loss of the last step
  std::vector<StepRecord> curve;
};

struct AblationPlan {
  AblationSuite suite = AblationSuite::optimization;
  std::vector<TargetPair> pairs = ablation_pairs();
  std::vector<std::uint64_t> seeds = {0};
  int image_size = 32;
};

using ProgressFn = std::function<void(const std::string&)>;

std::vector<AblationCell> run_ablation(const AblationPlan& plan, const OptimizerConfig& base,
                                       const ProgressFn& progress = {});

enum class SweepAxis { azimuth, elevation };
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct AngleRange {
  double from = 0.0;
  double to = 0.0;
  double step = 1.0;
  std::vector<double> values() const;  // inclusive of `to`; throws on an empty range
};
/// "a:b:step"
AngleRange parse_angle_range(std::string_view text);

struct SweepPlan {
  SweepAxis axis = SweepAxis::azimuth;
  AngleRange range;
  double azimuth_elevation = 60.0;  // fixed elevation of the azimuth sweep
  double elevation_base = 20.0;     // fixed view of the elevation sweep
  int image_size = 32;
  bool include_plain = true;
};

struct SweepRow {
  double separation = 0.0;
  double elevation1 = 0.0, azimuth1 = 0.0;
  double elevation2 = 0.0, azimuth2 = 0.0;
  double mse_full = 0.0;
  double mse_plain = -1.0;  // negative when not run
};

/// The two black vs. white views for one sweep point.
std::vector<ViewSpec> sweep_views(const SweepPlan& plan, double separation);

std::vector<SweepRow> run_sweep(const SweepPlan& plan, const OptimizerConfig& base,
                                const ProgressFn& progress = {});

}  // namespace hfa
