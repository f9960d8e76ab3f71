#include "hfa/experiments.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace hfa {

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::black: return "black";
    case TargetKind::white: return "white";
    case TargetKind::random: return "random";
    case TargetKind::stripes: return "stripes";
  }
  return "unknown";
}

TargetKind parse_target_kind(std::string_view name) {
  if (name == "black") return TargetKind::black;
  if (name == "white") return TargetKind::white;
  if (name == "random") return TargetKind::random;
  if (name == "stripes") return TargetKind::stripes;
  throw InvalidArgument("unknown target '" + std::string(name) + "'");
}

Image make_target(TargetKind kind, int size, std::uint64_t seed) {
  if (size < 1) throw InvalidArgument("target size must be positive");
  switch (kind) {
    case TargetKind::black:
      return Image(size, size, {0.0, 0.0, 0.0});
    case TargetKind::white:
      return Image(size, size, {1.0, 1.0, 1.0});
    case TargetKind::random: {
      Rng rng(seed);
      Image img(size, size);
      for (std::size_t p = 0; p < img.size(); ++p) img[p] = {rng.uniform(), rng.uniform(), rng.uniform()};
      return img;
    }
    case TargetKind::stripes: {
      Image img(size, size);
      for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
          const double v = (c / 2) % 2 == 0 ? 0.0 : 1.0;
          img.at(r, c) = {v, v, v};
        }
      }
      return img;
    }
  }
  return {};
}

std::string TargetPair::name() const { return to_string(first) + "/" + to_string(second); }

TargetPair parse_target_pair(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw InvalidArgument("target pair must look like 'black/white'");
  return {parse_target_kind(text.substr(0, slash)), parse_target_kind(text.substr(slash + 1))};
}

std::vector<TargetPair> ablation_pairs() {
  using T = TargetKind;
  return {{T::black, T::white}, {T::black, T::random}, {T::black, T::stripes},
          {T::random, T::stripes}, {T::random, T::random}};
}

std::vector<ViewSpec> opposite_views(const TargetPair& pair, int image_size, std::uint64_t seed,
                                     double elevation_deg) {
  std::vector<ViewSpec> views(2);
  views[0] = {elevation_deg, 0.0, image_size, make_target(pair.first, image_size, seed * 2 + 1)};
  views[1] = {elevation_deg, 180.0, image_size, make_target(pair.second, image_size, seed * 2 + 2)};
  return views;
}

OptimizerConfig plain_variant(const OptimizerConfig& base) {
  OptimizerConfig c = base;
  c.coarse_to_fine.enabled = false;
  c.bcd.enabled = false;
  c.annealing.enabled = false;
  return c;
}

std::string to_string(AblationSuite suite) {
  switch (suite) {
    case AblationSuite::regularization: return "regularization";
    case AblationSuite::optimization: return "optimization";
    case AblationSuite::heaviside: return "heaviside";
  }
  return "unknown";
}

AblationSuite parse_ablation_suite(std::string_view name) {
  if (name == "regularization") return AblationSuite::regularization;
  if (name == "optimization") return AblationSuite::optimization;
  if (name == "heaviside") return AblationSuite::heaviside;
  throw InvalidArgument("unknown ablation suite '" + std::string(name) + "'");
}

std::vector<AblationVariant> ablation_variants(AblationSuite suite, const OptimizerConfig& base) {
  std::vector<AblationVariant> out;
  switch (suite) {
    case AblationSuite::regularization: {
      const OptimizerConfig plain = plain_variant(base);
      auto with = [&](LossConfig loss) {
        OptimizerConfig c = plain;
        loss.barrier_weight = base.loss.barrier_weight;
        loss.neighbor_weight = base.loss.neighbor_weight;
        c.loss = loss;
        return c;
      };
      out.push_back({"none", with(LossConfig::none())});
      out.push_back({"barrier", with(LossConfig::barrier_only())});
      out.push_back({"smoothing", with(LossConfig::smoothing_only())});
      out.push_back({"barrier+smoothing", with(LossConfig::both())});
      break;
    }
    case AblationSuite::optimization: {
      const OptimizerConfig plain = plain_variant(base);
      OptimizerConfig c2f = plain;
      c2f.coarse_to_fine.enabled = true;
      OptimizerConfig bcd = plain;
      bcd.bcd.enabled = true;
      OptimizerConfig full = plain;
      full.coarse_to_fine.enabled = true;
      full.bcd.enabled = true;
      full.annealing.enabled = true;
      out.push_back({"none", plain});
      out.push_back({"coarse_to_fine", c2f});
      out.push_back({"coord_descent", bcd});
      out.push_back({"full", full});
      break;
    }
    case AblationSuite::heaviside: {
      for (HeavisideKind kind : {HeavisideKind::circle, HeavisideKind::circle_distance, HeavisideKind::erfc,
                                 HeavisideKind::tanh, HeavisideKind::log}) {
        OptimizerConfig c = base;
        c.heaviside = kind;
        c.k_start = 0.1;
        c.k_end = 0.1;
        out.push_back({to_string(kind), c});
      }
      break;
    }
  }
  return out;
}

std::vector<AblationCell> run_ablation(const AblationPlan& plan, const OptimizerConfig& base,
                                       const ProgressFn& progress) {
  if (plan.pairs.empty() || plan.seeds.empty()) throw InvalidArgument("ablation plan has no cells");
  const auto variants = ablation_variants(plan.suite, base);
  std::vector<AblationCell> cells;
  for (const TargetPair& pair : plan.pairs) {
    for (const AblationVariant& variant : variants) {
      for (std::uint64_t seed : plan.seeds) {
        const auto views = opposite_views(pair, plan.image_size, seed);
        OptimizerConfig cfg = variant.config;
        cfg.seed = seed;
        const OptimizeResult r = optimize(views, cfg);
        AblationCell cell;
        cell.row = pair.name();
        cell.column = variant.column;
        cell.seed = seed;
        cell.final_mse = r.final_mse;
        cell.final_total = r.history.empty() ? 0.0 : r.history.back().total;
        cell.curve = r.history;
        if (progress) {
          std::ostringstream s;
          s << cell.row << " " << cell.column << " seed " << seed << " mse " << cell.final_mse;
          progress(s.str());
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::azimuth ? "azimuth" : "elevation"; }

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "azimuth") return SweepAxis::azimuth;
  if (name == "elevation") return SweepAxis::elevation;
  throw InvalidArgument("sweep axis must be 'azimuth' or 'elevation'");
}

std::vector<double> AngleRange::values() const {
  if (!(step > 0.0) || !std::isfinite(from) || !std::isfinite(to) || from > to) {
    throw InvalidArgument("empty angle range");
  }
  std::vector<double> v;
  const int count = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) v.push_back(from + i * step);
  return v;
}

AngleRange parse_angle_range(std::string_view text) {
  double parts[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find(':', start) : text.size();
    if (end == std::string_view::npos) throw InvalidArgument("range must look like a:b:step");
    const std::string_view piece = text.substr(start, end - start);
    const auto res = std::from_chars(piece.data(), piece.data() + piece.size(), parts[i]);
    if (res.ec != std::errc() || res.ptr != piece.data() + piece.size()) {
      throw InvalidArgument("range must look like a:b:step, got '" + std::string(text) + "'");
    }
    start = end + 1;
  }
  AngleRange r{parts[0], parts[1], parts[2]};
  (void)r.values();
  return r;
}

std::vector<ViewSpec> sweep_views(const SweepPlan& plan, double separation) {
  const int m = plan.image_size;
  std::vector<ViewSpec> views(2);
  if (plan.axis == SweepAxis::azimuth) {
    views[0] = {plan.azimuth_elevation, 0.0, m, make_target(TargetKind::black, m)};
    views[1] = {plan.azimuth_elevation, std::fmod(separation, 360.0), m, make_target(TargetKind::white, m)};
  } else {
    views[0] = {plan.elevation_base, 0.0, m, make_target(TargetKind::black, m)};
    views[1] = {plan.elevation_base + separation, 0.0, m, make_target(TargetKind::white, m)};
  }
  for (const ViewSpec& v : views) v.validate();
  return views;
}

std::vector<SweepRow> run_sweep(const SweepPlan& plan, const OptimizerConfig& base,
                                const ProgressFn& progress) {
  std::vector<SweepRow> rows;
  for (double sep : plan.range.values()) {
    const auto views = sweep_views(plan, sep);
    SweepRow row;
    row.separation = sep;
    row.elevation1 = views[0].elevation_deg;
    row.azimuth1 = views[0].azimuth_deg;
    row.elevation2 = views[1].elevation_deg;
    row.azimuth2 = views[1].azimuth_deg;
    row.mse_full = optimize(views, base).final_mse;
    if (plan.include_plain) row.mse_plain = optimize(views, plain_variant(base)).final_mse;
    if (progress) {
      std::ostringstream s;
      s << to_string(plan.axis) << " separation " << sep << " full " << row.mse_full;
      if (plan.include_plain) s << " plain " << row.mse_plain;
      progress(s.str());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hfa
