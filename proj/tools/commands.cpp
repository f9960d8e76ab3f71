#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hfa/checkpoint.hpp"
#include "hfa/config.hpp"
#include "hfa/experiments.hpp"
#include "hfa/gradients.hpp"
#include "hfa/image_io.hpp"
#include "hfa/kernels.hpp"
#include "hfa/mesh.hpp"
#include "hfa/objective.hpp"
#include "hfa/optimizer.hpp"
#include "hfa/outputs.hpp"

namespace hfa::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted.store(true); }

class UsageError : public Error {
 public:
  using Error::Error;
};

std::pair<double, double> parse_view_flag(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--view expects \"elevation,azimuth\", got '" + text + "'");
  try {
    std::size_t a = 0, b = 0;
    const double el = std::stod(text.substr(0, comma), &a);
    const double az = std::stod(text.substr(comma + 1), &b);
    if (a != comma || b != text.size() - comma - 1) throw std::invalid_argument("trailing characters");
    if (!(el > 0.0 && el <= 90.0)) throw UsageError("--view elevation must lie in (0, 90]");
    if (!(az >= 0.0 && az < 360.0)) throw UsageError("--view azimuth must lie in [0, 360)");
    return {el, az};
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("--view expects \"elevation,azimuth\", got '" + text + "'");
  }
}

RenderSettings base_settings(const OptimizerConfig& cfg) {
  RenderSettings s;
  s.background = cfg.background;
  s.tiling = cfg.tiling;
  return s;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

double segmented_hard_mse(const Heightfield& field, std::span<const ViewSpec> views, const SegmentedColors& seg,
                          const RenderSettings& settings, BackgroundPolicy policy) {
  std::vector<Image> rendered, desired;
  std::vector<std::vector<std::uint8_t>> masks;
  for (const ViewSpec& v : views) {
    RenderOutput r = render_hard(field, v, settings, &seg);
    rendered.push_back(std::move(r.image));
    masks.push_back(std::move(r.miss_mask));
    desired.push_back(v.desired);
  }
  return mse_loss(rendered, desired, masks, policy);
}

// ---- optimize -------------------------------------------------------------

struct OptimizeFlags {
  std::string config;
  std::string resume;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  bool no_anneal = false;
  bool quiet = false;
};

int cmd_optimize(const OptimizeFlags& f, std::ostream& out, std::ostream& err) {
  if (f.config.empty() && f.resume.empty()) throw UsageError("optimize needs --config or --resume");
  std::optional<Checkpoint> ck;
  if (!f.resume.empty()) ck = load_checkpoint(f.resume);
  ProjectConfig project = f.config.empty() ? ck->project : load_config(f.config);
  if (f.seed) project.optimizer.seed = *f.seed;
  if (f.steps) project.optimizer.total_steps = *f.steps;
  if (f.no_anneal) project.optimizer.annealing.enabled = false;
  if (!f.out.empty()) project.output_dir = fs::absolute(f.out).lexically_normal();
  project.optimizer.validate();

  std::vector<std::string> warnings;
  const std::vector<ViewSpec> views = load_views(project, &warnings);
  print_warnings(warnings, err);

  const fs::path dir = project.output_dir;
  fs::create_directories(dir);
  RunLock lock(dir);

  OptimizeHooks hooks;
  hooks.should_stop = [] { return g_interrupted.load(); };
  if (!f.quiet) {
    hooks.on_step = [&](const StepRecord& r) {
      if (r.step % 10 == 0) {
        err << "step " << r.step << " res " << r.resolution << " " << to_string(r.phase) << " mse " << r.mse
            << " hard " << r.hard_mse << " best " << r.best << "\n";
      }
    };
  }
  std::optional<OptimizerState> resume;
  if (ck) resume = ck->state;

  RunArtifacts run;
  run.project = project;
  run.views = views;
  run.result = optimize(views, project.optimizer, hooks, std::move(resume));

  if (run.result.interrupted) {
    const Manifest m = write_partial(run, dir);
    err << "interrupted at step " << run.result.state.step << "; resumable checkpoint written to "
        << (dir / "checkpoint.json").string() << "\n";
    out << Json{{"status", "partial"}, {"step", run.result.state.step}, {"mse", m.final_mse},
                {"output_dir", dir.string()}}.dump()
        << "\n";
    return kRuntime;
  }

  const RenderSettings settings = base_settings(project.optimizer);
  run.segments = project_colors(run.result.best_field, views, project.mesh.segments_per_bar, settings);
  const double projected = segmented_hard_mse(run.result.best_field, views, *run.segments, settings,
                                              project.optimizer.loss.background_policy);
  write_outputs(run, dir);
  out << Json{{"status", "complete"},
              {"final_mse", run.result.final_mse},
              {"projected_mse", projected},
              {"steps", run.result.state.step},
              {"output_dir", dir.string()}}
             .dump()
      << "\n";
  return kOk;
}

// ---- render ---------------------------------------------------------------

struct RenderFlags {
  std::string checkpoint;
  std::vector<std::string> views;
  bool hard = false;
  bool segments = false;
  int tiling = 0;
  int samples = 1;
  std::optional<double> k;
  std::string out;
};

int cmd_render(const RenderFlags& f, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<double, double>> angles;
  for (const auto& v : f.views) angles.push_back(parse_view_flag(v));
  if (f.tiling != 0 && (f.tiling < 1 || f.tiling % 2 == 0)) throw UsageError("--tiling must be a positive odd number");
  if (!f.out.empty() && angles.size() > 1) throw UsageError("--out names one file; omit it when rendering several views");
  if (f.segments && !f.hard) throw UsageError("--segments applies to --hard renders");

  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const ProjectConfig& project = ck.project;
  RenderSettings settings = base_settings(project.optimizer);
  if (f.tiling) settings.tiling = f.tiling;
  settings.samples = f.samples;
  HeavisideSpec spec{project.optimizer.heaviside, f.k.value_or(project.optimizer.k_end), project.optimizer.seed};
  if (f.segments && !ck.segments) throw UsageError("checkpoint has no projected segments");

  // desired images of the optimized views, loaded only when a requested view matches one
  std::optional<std::vector<ViewSpec>> desired;
  auto match = [&](double el, double az) -> const ViewSpec* {
    for (std::size_t i = 0; i < project.views.size(); ++i) {
      if (std::abs(project.views[i].elevation_deg - el) < 1e-9 && std::abs(project.views[i].azimuth_deg - az) < 1e-9) {
        if (!desired) {
          try {
            std::vector<std::string> warnings;
            desired = load_views(project, &warnings);
          } catch (const Error& e) {
            err << "warning: cannot load desired images (" << e.what() << "); MSE not reported\n";
            desired = std::vector<ViewSpec>{};
          }
        }
        return i < desired->size() ? &(*desired)[i] : nullptr;
      }
    }
    return nullptr;
  };

  const fs::path ck_dir = fs::absolute(f.checkpoint).parent_path();
  Json images = Json::array();
  std::vector<Image> rendered, targets;
  std::vector<std::vector<std::uint8_t>> masks;
  for (auto [el, az] : angles) {
    ViewSpec view;
    view.elevation_deg = el;
    view.azimuth_deg = az;
    view.image_size = project.image_size;
    RenderOutput r = f.hard ? render_hard(ck.field, view, settings, f.segments ? &*ck.segments : nullptr)
                            : render_view(ck.field, view, spec, settings);
    std::ostringstream name;
    name << "render_el" << el << "_az" << az << (f.hard ? "_hard" : "_smooth") << ".png";
    const fs::path path = f.out.empty() ? ck_dir / name.str() : fs::path(f.out);
    save_image(path, r.image);
    images.push_back(path.string());
    if (const ViewSpec* d = match(el, az)) {
      targets.push_back(d->desired);
      masks.push_back(r.miss_mask);
      rendered.push_back(std::move(r.image));
    }
  }
  Json result{{"images", images}};
  if (!rendered.empty()) {
    result["mse"] = mse_loss(rendered, targets, masks, project.optimizer.loss.background_policy);
    result["matched_views"] = rendered.size();
  }
  out << result.dump() << "\n";
  return kOk;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckFlags {
  std::string config;
  int resolution = 8;
  int probes = 100;
  double k = 10.0;
  std::string kind = "tanh";
  std::uint64_t seed = 0;
  std::string csv;
};

int cmd_gradcheck(const GradcheckFlags& f, std::ostream& out, std::ostream& err) {
  const HeavisideKind kind = parse_heaviside_kind(f.kind);
  if (f.resolution < 2) throw UsageError("--resolution must be >= 2");
  if (f.probes < 1) throw UsageError("--probes must be >= 1");
  if (!(f.k > 0.0)) throw UsageError("--k must be positive");
  const ProjectConfig project = load_config(f.config);
  std::vector<std::string> warnings;
  const std::vector<ViewSpec> views = load_views(project, &warnings);
  print_warnings(warnings, err);
  const OptimizerConfig& cfg = project.optimizer;
  Rng rng(f.seed);
  Heightfield field = initial_field(InitKind::random, f.resolution, cfg.strip_width_at(f.resolution),
                                    cfg.geometry.h_min, cfg.geometry.h_max, rng);
  clamp_to_interior(field);
  GradCheckOptions opts;
  opts.probes = f.probes;
  opts.seed = f.seed;
  const GradCheckReport report =
      grad_check(field, views, HeavisideSpec{kind, f.k, cfg.seed}, cfg.loss, base_settings(cfg), opts);
  report.write_text(out);
  if (!f.csv.empty()) {
    std::ofstream csv(f.csv, std::ios::binary);
    if (!csv) throw IoError("cannot write '" + f.csv + "'");
    report.write_csv(csv);
  }
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepFlags {
  std::string axis;
  std::string range;
  std::string config;
  std::string out;
  double elevation = 60.0;
  double base = 20.0;
  bool no_plain = false;
};

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  auto num = [](double x) { return Json(x).dump(); };
  std::string s = "separation,elevation1,azimuth1,elevation2,azimuth2,mse_full,mse_plain\n";
  for (const SweepRow& r : rows) {
    s += num(r.separation) + "," + num(r.elevation1) + "," + num(r.azimuth1) + "," + num(r.elevation2) + "," +
         num(r.azimuth2) + "," + num(r.mse_full) + "," + (r.mse_plain < 0 ? std::string() : num(r.mse_plain)) + "\n";
  }
  return s;
}

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  SweepPlan plan;
  try {
    plan.axis = parse_sweep_axis(f.axis);
    plan.range = parse_angle_range(f.range);
    (void)plan.range.values();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  plan.azimuth_elevation = f.elevation;
  plan.elevation_base = f.base;
  plan.include_plain = !f.no_plain;
  for (double s : plan.range.values()) {
    try {
      (void)sweep_views(plan, s);
    } catch (const Error& e) {
      throw UsageError("separation " + Json(s).dump() + " gives an invalid view: " + e.what());
    }
  }
  const ProjectConfig project = load_config(f.config);
  plan.image_size = project.image_size;
  const auto rows = run_sweep(plan, project.optimizer, [&](const std::string& m) { err << m << "\n"; });
  const std::string csv = sweep_csv(rows);
  if (!f.out.empty()) {
    std::ofstream o(f.out, std::ios::binary);
    if (!o) throw IoError("cannot write '" + f.out + "'");
    o << csv;
  }
  out << csv;
  return kOk;
}

// ---- ablate ---------------------------------------------------------------

struct AblateFlags {
  std::string suite;
  std::string config;
  std::string out_dir;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_ablate(const AblateFlags& f, std::ostream& out, std::ostream& err) {
  AblationPlan plan;
  try {
    plan.suite = parse_ablation_suite(f.suite);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const ProjectConfig project = load_config(f.config);
  plan.pairs = project.ablation.pairs;
  plan.seeds = project.ablation.seeds;
  plan.image_size = project.image_size;
  const fs::path dir = f.out_dir.empty() ? project.output_dir / ("ablate_" + f.suite) : fs::absolute(f.out_dir);

  fs::create_directories(dir);
  RunLock lock(dir);
  const auto cells = run_ablation(plan, project.optimizer, [&](const std::string& m) { err << m << "\n"; });

  auto num = [](double x) { return Json(x).dump(); };
  std::string cells_csv = "row,column,seed,final_mse,final_total\n";
  std::string curves_csv = "row,column,seed,step,mse,total,hard_mse,phase,resolution\n";
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> by_cell;
  for (const AblationCell& c : cells) {
    cells_csv += c.row + "," + c.column + "," + std::to_string(c.seed) + "," + num(c.final_mse) + "," +
                 num(c.final_total) + "\n";
    for (const StepRecord& r : c.curve) {
      curves_csv += c.row + "," + c.column + "," + std::to_string(c.seed) + "," + std::to_string(r.step) + "," +
                    num(r.mse) + "," + num(r.total) + "," + num(r.hard_mse) + "," + to_string(r.phase) + "," +
                    std::to_string(r.resolution) + "\n";
    }
    const auto key = std::make_pair(c.row, c.column);
    if (!by_cell.count(key)) order.push_back(key);
    by_cell[key].push_back(c.final_mse);
  }
  std::string summary = "row,column,median_final_mse,seeds\n";
  for (const auto& key : order) {
    summary += key.first + "," + key.second + "," + num(median(by_cell[key])) + "," +
               std::to_string(by_cell[key].size()) + "\n";
  }
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream o(dir / name, std::ios::binary);
    if (!o) throw IoError("cannot write '" + (dir / name).string() + "'");
    o << text;
  };
  write("cells.csv", cells_csv);
  write("curves.csv", curves_csv);
  write("summary.csv", summary);
  write_manifest(dir, RunStatus::complete, "ablate", {"cells.csv", "curves.csv", "summary.csv"}, 0.0);
  out << summary;
  return kOk;
}

// ---- export-mesh / project ------------------------------------------------

struct ExportFlags {
  std::string checkpoint;
  std::string out;
  bool no_segments = false;
  std::optional<double> print_width;
  std::optional<double> base;
};

Json mesh_summary(const MeshBundle& m, const fs::path& obj, const fs::path& mtl) {
  return Json{{"obj", obj.string()},
              {"mtl", mtl.string()},
              {"vertices", m.vertices.size()},
              {"faces", m.faces.size()},
              {"materials", m.materials.size()}};
}

int cmd_export(const ExportFlags& f, std::ostream& out, std::ostream&) {
  if (f.print_width && !(*f.print_width > 0.0)) throw UsageError("--print-width must be positive");
  if (f.base && !(*f.base >= 0.0)) throw UsageError("--base must be >= 0");
  if (!f.out.empty() && fs::path(f.out).extension() != ".obj") throw UsageError("--out must end in .obj");
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  ProjectConfig project = ck.project;
  if (f.print_width) project.mesh.print_strip_width_mm = *f.print_width;
  if (f.base) project.mesh.base_thickness_mm = *f.base;
  const fs::path obj = f.out.empty() ? fs::absolute(f.checkpoint).parent_path() / "export.obj" : fs::path(f.out);
  fs::path mtl = obj;
  mtl.replace_extension(".mtl");
  const SegmentedColors* seg = (!f.no_segments && ck.segments) ? &*ck.segments : nullptr;
  const MeshBundle mesh = build_mesh(ck.field, seg, mesh_options(project, ck.field));
  write_obj_mtl(mesh, obj, mtl);
  out << mesh_summary(mesh, obj, mtl).dump() << "\n";
  return kOk;
}

struct ProjectFlags {
  std::string checkpoint;
  int segments = 1;
  std::string out_dir;
};

int cmd_project(const ProjectFlags& f, std::ostream& out, std::ostream& err) {
  if (f.segments < 1) throw UsageError("--segments must be >= 1");
  Checkpoint ck = load_checkpoint(f.checkpoint);
  std::vector<std::string> warnings;
  const std::vector<ViewSpec> views = load_views(ck.project, &warnings);
  print_warnings(warnings, err);
  const RenderSettings settings = base_settings(ck.project.optimizer);
  const BackgroundPolicy policy = ck.project.optimizer.loss.background_policy;
  const double before = hard_mse(ck.field, views, settings);
  ck.segments = project_colors(ck.field, views, f.segments, settings);
  ck.project.mesh.segments_per_bar = f.segments;
  const double after = segmented_hard_mse(ck.field, views, *ck.segments, settings, policy);

  const fs::path dir = f.out_dir.empty() ? fs::absolute(f.checkpoint).parent_path() : fs::absolute(f.out_dir);
  fs::create_directories(dir);
  const std::string stem = "projected_s" + std::to_string(f.segments);
  save_checkpoint(dir / (stem + ".json"), ck);
  const MeshBundle mesh = build_mesh(ck.field, &*ck.segments, mesh_options(ck.project, ck.field));
  write_obj_mtl(mesh, dir / (stem + ".obj"), dir / (stem + ".mtl"));
  Json j{{"mse_before", before}, {"mse_after", after}, {"checkpoint", (dir / (stem + ".json")).string()}};
  j["mesh"] = mesh_summary(mesh, dir / (stem + ".obj"), dir / (stem + ".mtl"));
  out << j.dump() << "\n";
  return kOk;
}

// ---- make-targets ---------------------------------------------------------

struct TargetFlags {
  std::string kind = "all";
  int size = 32;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

int cmd_make_targets(const TargetFlags& f, std::ostream& out, std::ostream&) {
  if (f.size < 1) throw UsageError("--size must be >= 1");
  std::vector<TargetKind> kinds;
  if (f.kind == "all") {
    kinds = {TargetKind::black, TargetKind::white, TargetKind::random, TargetKind::stripes};
  } else {
    try {
      kinds = {parse_target_kind(f.kind)};
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  fs::create_directories(f.out_dir);
  Json files = Json::array();
  for (TargetKind k : kinds) {
    const fs::path p = fs::path(f.out_dir) / (to_string(k) + ".png");
    save_png(p, make_target(k, f.size, f.seed));
    files.push_back(p.string());
  }
  out << Json{{"files", files}}.dump() << "\n";
  return kOk;
}

void error_line(std::ostream& err, const std::string& kind, const std::string& message,
                const std::vector<std::string>& problems = {}) {
  Json j{{"error", kind}, {"message", message}};
  if (!problems.empty()) j["problems"] = problems;
  err << j.dump() << "\n";
}

}  // namespace

void install_interrupt_handler() { std::signal(SIGINT, on_sigint); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inverse appearance design of colored heightfields"};
  app.name(args.empty() ? "hfa" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "Kernel variant: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  OptimizeFlags of;
  auto* opt = app.add_subcommand("optimize", "Optimize a heightfield for the configured views");
  opt->add_option("--config", of.config, "Project config (JSON)");
  opt->add_option("--resume", of.resume, "Resume from a checkpoint");
  opt->add_option("--out", of.out, "Output directory (overrides the config)");
  opt->add_option("--seed", of.seed, "Random seed");
  opt->add_option("--steps", of.steps, "Total optimization steps")->check(CLI::NonNegativeNumber);
  opt->add_flag("--no-anneal", of.no_anneal, "Disable simulated annealing");
  opt->add_flag("--quiet", of.quiet, "No per-step progress on stderr");

  RenderFlags rf;
  auto* ren = app.add_subcommand("render", "Render a stored field from any view");
  ren->add_option("--checkpoint", rf.checkpoint, "Checkpoint file")->required();
  ren->add_option("--view", rf.views, "elevation,azimuth (repeatable)")->required();
  ren->add_flag("--hard", rf.hard, "Exact step renderer");
  ren->add_flag("--segments", rf.segments, "Use the projected color segments (with --hard)");
  ren->add_option("--tiling", rf.tiling, "Tiling repeat (odd; default from the checkpoint)");
  ren->add_option("--samples", rf.samples, "Rays per pixel axis")->check(CLI::PositiveNumber);
  ren->add_option("--k", rf.k, "Heaviside k of smooth renders (default: final k)")->check(CLI::PositiveNumber);
  ren->add_option("--out", rf.out, "Output image (.png or .ppm)");

  GradcheckFlags gf;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gc->add_option("--config", gf.config, "Project config")->required();
  gc->add_option("--resolution", gf.resolution, "Bars per side of the random test field");
  gc->add_option("--probes", gf.probes, "Sampled coordinates");
  gc->add_option("--k", gf.k, "Heaviside k");
  gc->add_option("--kind", gf.kind, "Heaviside kind");
  gc->add_option("--seed", gf.seed, "Seed of the field and the probe choice");
  gc->add_option("--csv", gf.csv, "Also write the per-probe CSV report");

  SweepFlags sf;
  auto* sw = app.add_subcommand("sweep", "Angle-compatibility sweep on black vs white targets");
  sw->add_option("--axis", sf.axis, "azimuth or elevation")->required();
  sw->add_option("--range", sf.range, "Separations a:b:step in degrees")->required();
  sw->add_option("--config", sf.config, "Project config with the optimizer settings")->required();
  sw->add_option("--out", sf.out, "Also write the CSV here");
  sw->add_option("--elevation", sf.elevation, "Elevation of the azimuth sweep");
  sw->add_option("--base", sf.base, "Fixed elevation of the elevation sweep");
  sw->add_flag("--no-plain", sf.no_plain, "Skip the plain-optimizer column");

  AblateFlags af;
  auto* ab = app.add_subcommand("ablate", "Run one of the ablation tables");
  ab->add_option("--suite", af.suite, "regularization, optimization or heaviside")->required();
  ab->add_option("--config", af.config, "Project config (ablation pairs and seeds)")->required();
  ab->add_option("--out-dir", af.out_dir, "Output directory");

  ExportFlags ef;
  auto* ex = app.add_subcommand("export-mesh", "Write the stored field as OBJ/MTL");
  ex->add_option("--checkpoint", ef.checkpoint, "Checkpoint file")->required();
  ex->add_option("--out", ef.out, "OBJ path (the MTL goes next to it)");
  ex->add_flag("--no-segments", ef.no_segments, "Ignore projected segments");
  ex->add_option("--print-width", ef.print_width, "Printed bar width in mm");
  ex->add_option("--base", ef.base, "Base slab thickness in mm");

  ProjectFlags pf;
  auto* pr = app.add_subcommand("project", "Re-project the desired images onto vertical color bands");
  pr->add_option("--checkpoint", pf.checkpoint, "Checkpoint file")->required();
  pr->add_option("--segments", pf.segments, "Bands per bar");
  pr->add_option("--out-dir", pf.out_dir, "Output directory (default: next to the checkpoint)");

  TargetFlags tf;
  auto* mt = app.add_subcommand("make-targets", "Write the black/white/random/stripes target images");
  mt->add_option("--kind", tf.kind, "black, white, random, stripes or all");
  mt->add_option("--size", tf.size, "Pixels per side");
  mt->add_option("--seed", tf.seed, "Seed of the random target");
  mt->add_option("--out-dir", tf.out_dir, "Output directory");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    error_line(err, "usage", e.what());
    return kUsage;
  }

  try {
    if (simd == "scalar") kernels::set_override(kernels::Isa::scalar);
    if (simd == "avx2") {
      if (!kernels::cpu_has_avx2()) throw UsageError("--simd avx2 requested but the CPU lacks AVX2");
      kernels::set_override(kernels::Isa::avx2);
    }
    if (*opt) return cmd_optimize(of, out, err);
    if (*ren) return cmd_render(rf, out, err);
    if (*gc) return cmd_gradcheck(gf, out, err);
    if (*sw) return cmd_sweep(sf, out, err);
    if (*ab) return cmd_ablate(af, out, err);
    if (*ex) return cmd_export(ef, out, err);
    if (*pr) return cmd_project(pf, out, err);
    if (*mt) return cmd_make_targets(tf, out, err);
  } catch (const ConfigError& e) {
    error_line(err, "config", e.what(), e.problems());
    return kUsage;
  } catch (const UsageError& e) {
    error_line(err, "usage", e.what());
    return kUsage;
  } catch (const InvalidArgument& e) {
    error_line(err, "usage", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    error_line(err, "runtime", e.what());
    return kRuntime;
  }
  return kUsage;
}

}  // namespace hfa::cli
