#include "hfa/config.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "hfa/image_io.hpp"
#include "json_codec.hpp"

namespace hfa {
namespace detail {

ObjectReader::ObjectReader(const Json* j, std::string path, std::vector<std::string>& problems)
    : j_(j), path_(std::move(path)), problems_(problems) {}

ObjectReader::~ObjectReader() {
  if (!j_ || !j_->is_object()) return;
  for (auto it = j_->begin(); it != j_->end(); ++it) {
    if (!seen_.count(it.key())) problems_.push_back(path_of(it.key().c_str()) + ": unknown key");
  }
}

std::string ObjectReader::path_of(const char* key) const {
  return path_.empty() ? std::string(key) : path_ + "." + key;
}

bool ObjectReader::has(const char* key) const { return j_ && j_->is_object() && j_->contains(key); }

const Json* ObjectReader::take(const char* key) {
  seen_.insert(key);
  if (!has(key)) return nullptr;
  return &(*j_)[key];
}

void ObjectReader::problem(const char* key, const std::string& what) {
  problems_.push_back(path_of(key) + ": " + what);
}

void ObjectReader::read(const char* key, double& out) {
  const Json* v = take(key);
  if (!v) return;
  if (!v->is_number()) return problem(key, "expected a number");
  out = v->get<double>();
}

void ObjectReader::read(const char* key, int& out) {
  const Json* v = take(key);
  if (!v) return;
  if (!v->is_number_integer()) return problem(key, "expected an integer");
  const auto x = v->get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    return problem(key, "integer out of range");
  }
  out = static_cast<int>(x);
}

void ObjectReader::read(const char* key, std::uint64_t& out) {
  const Json* v = take(key);
  if (!v) return;
  if (v->is_number_unsigned()) {
    out = v->get<std::uint64_t>();
  } else if (v->is_number_integer()) {
    problem(key, "expected a non-negative integer");
  } else {
    problem(key, "expected an integer");
  }
}

void ObjectReader::read(const char* key, bool& out) {
  const Json* v = take(key);
  if (!v) return;
  if (!v->is_boolean()) return problem(key, "expected true or false");
  out = v->get<bool>();
}

void ObjectReader::read(const char* key, std::string& out) {
  const Json* v = take(key);
  if (!v) return;
  if (!v->is_string()) return problem(key, "expected a string");
  out = v->get<std::string>();
}

void ObjectReader::read(const char* key, Rgb& out) {
  const Json* v = take(key);
  if (!v) return;
  if (!v->is_array() || v->size() != 3) return problem(key, "expected [r, g, b]");
  for (std::size_t ch = 0; ch < 3; ++ch) {
    if (!(*v)[ch].is_number()) return problem(key, "expected [r, g, b] numbers");
    out[ch] = (*v)[ch].get<double>();
    if (!(out[ch] >= 0.0 && out[ch] <= 1.0)) return problem(key, "channels must lie in [0, 1]");
  }
}

Json to_json(const Rgb& c) { return Json::array({c.r, c.g, c.b}); }

namespace {

std::string to_string(BackgroundPolicy p) { return p == BackgroundPolicy::mask ? "mask" : "penalize"; }

template <class E, class Parse>
void read_enum(ObjectReader& r, const char* key, E& out, Parse parse) {
  std::string s;
  if (!r.has(key)) {
    r.take(key);
    return;
  }
  const std::size_t before = r.problems().size();
  r.read(key, s);
  if (r.problems().size() != before) return;
  try {
    out = parse(s);
  } catch (const Error& e) {
    r.problem(key, e.what());
  }
}

}  // namespace

Json to_json(const OptimizerConfig& c) {
  Json j;
  j["steps"] = c.total_steps;
  j["seed"] = c.seed;
  j["init"] = to_string(c.init_kind);
  j["tiling"] = c.tiling;
  j["background"] = to_json(c.background);
  j["field"] = {{"strip_width_mm", c.geometry.strip_width_mm},
                {"h_min", c.geometry.h_min},
                {"h_max", c.geometry.h_max}};
  Json adam;
  adam["lr_heights"] = c.adam.lr_heights ? Json(*c.adam.lr_heights) : Json(nullptr);
  adam["lr_colors"] = c.adam.lr_colors;
  adam["beta1"] = c.adam.beta1;
  adam["beta2"] = c.adam.beta2;
  adam["epsilon"] = c.adam.epsilon;
  j["adam"] = adam;
  j["coarse_to_fine"] = {{"enabled", c.coarse_to_fine.enabled},
                         {"start_resolution", c.coarse_to_fine.start_resolution},
                         {"end_resolution", c.coarse_to_fine.end_resolution},
                         {"subdivide_every", c.coarse_to_fine.subdivide_every}};
  j["bcd"] = {{"enabled", c.bcd.enabled}, {"height_steps", c.bcd.height_steps}, {"color_steps", c.bcd.color_steps}};
  j["annealing"] = {{"enabled", c.annealing.enabled},     {"t_max", c.annealing.t_max},
                    {"t_min", c.annealing.t_min},         {"cool_factor", c.annealing.cool_factor},
                    {"every_n_steps", c.annealing.every_n_steps}, {"neighbor_sigma", c.annealing.neighbor_sigma}};
  j["heaviside"] = {{"kind", to_string(c.heaviside)}, {"k_start", c.k_start}, {"k_end", c.k_end}};
  j["loss"] = {{"barrier", {{"enabled", c.loss.barrier_enabled}, {"weight", c.loss.barrier_weight}}},
               {"neighbor",
                {{"enabled", c.loss.neighbor_enabled},
                 {"weight", c.loss.neighbor_weight},
                 {"epsilon", c.loss.neighbor_epsilon}}},
               {"background_policy", to_string(c.loss.background_policy)}};
  return j;
}

void read_optimizer(ObjectReader& r, OptimizerConfig& c) {
  r.read("steps", c.total_steps);
  r.read("seed", c.seed);
  read_enum(r, "init", c.init_kind, parse_init_kind);
  r.read("tiling", c.tiling);
  r.read("background", c.background);
  bool h_max_given = false;
  r.object("field", [&](ObjectReader& f) {
    f.read("strip_width_mm", c.geometry.strip_width_mm);
    f.read("h_min", c.geometry.h_min);
    h_max_given = f.has("h_max");
    f.read("h_max", c.geometry.h_max);
  });
  if (!h_max_given) c.geometry.h_max = 4.0 * c.geometry.strip_width_mm;
  r.object("adam", [&](ObjectReader& a) {
    if (const Json* lr = a.take("lr_heights")) {
      if (lr->is_null()) {
        c.adam.lr_heights.reset();
      } else if (lr->is_number()) {
        c.adam.lr_heights = lr->get<double>();
      } else {
        a.problem("lr_heights", "expected a number or null");
      }
    }
    a.read("lr_colors", c.adam.lr_colors);
    a.read("beta1", c.adam.beta1);
    a.read("beta2", c.adam.beta2);
    a.read("epsilon", c.adam.epsilon);
  });
  r.object("coarse_to_fine", [&](ObjectReader& s) {
    s.read("enabled", c.coarse_to_fine.enabled);
    s.read("start_resolution", c.coarse_to_fine.start_resolution);
    s.read("end_resolution", c.coarse_to_fine.end_resolution);
    s.read("subdivide_every", c.coarse_to_fine.subdivide_every);
  });
  r.object("bcd", [&](ObjectReader& s) {
    s.read("enabled", c.bcd.enabled);
    s.read("height_steps", c.bcd.height_steps);
    s.read("color_steps", c.bcd.color_steps);
  });
  r.object("annealing", [&](ObjectReader& s) {
    s.read("enabled", c.annealing.enabled);
    s.read("t_max", c.annealing.t_max);
    s.read("t_min", c.annealing.t_min);
    s.read("cool_factor", c.annealing.cool_factor);
    s.read("every_n_steps", c.annealing.every_n_steps);
    s.read("neighbor_sigma", c.annealing.neighbor_sigma);
  });
  r.object("heaviside", [&](ObjectReader& s) {
    read_enum(s, "kind", c.heaviside, parse_heaviside_kind);
    s.read("k_start", c.k_start);
    s.read("k_end", c.k_end);
  });
  r.object("loss", [&](ObjectReader& s) {
    s.object("barrier", [&](ObjectReader& b) {
      b.read("enabled", c.loss.barrier_enabled);
      b.read("weight", c.loss.barrier_weight);
    });
    s.object("neighbor", [&](ObjectReader& b) {
      b.read("enabled", c.loss.neighbor_enabled);
      b.read("weight", c.loss.neighbor_weight);
      b.read("epsilon", c.loss.neighbor_epsilon);
    });
    read_enum(s, "background_policy", c.loss.background_policy, [](const std::string& v) {
      if (v == "mask") return BackgroundPolicy::mask;
      if (v == "penalize") return BackgroundPolicy::penalize;
      throw InvalidArgument("expected \"mask\" or \"penalize\"");
    });
  });
  if (!(c.loss.neighbor_epsilon > 0.0)) r.problem("loss", "neighbor epsilon must be positive");
  for (const std::string& p : c.problems()) r.problems().push_back((r.path_of("")) + p);
}

Json to_json(const Heightfield& f) {
  Json colors = Json::array();
  for (const Rgb& c : f.colors) colors.push_back(to_json(c));
  return Json{{"rows", f.rows},     {"cols", f.cols},   {"strip_width_mm", f.strip_width},
              {"h_min", f.h_min},   {"h_max", f.h_max}, {"heights", f.heights},
              {"colors", colors}};
}

Heightfield heightfield_from_json(const Json& j, const std::string& path, std::vector<std::string>& problems) {
  Heightfield f;
  const std::size_t before = problems.size();
  {
    ObjectReader r(&j, path, problems);
    r.read("rows", f.rows);
    r.read("cols", f.cols);
    r.read("strip_width_mm", f.strip_width);
    r.read("h_min", f.h_min);
    r.read("h_max", f.h_max);
    if (const Json* h = r.take("heights")) {
      if (!h->is_array()) {
        r.problem("heights", "expected an array");
      } else {
        for (const Json& v : *h) {
          if (!v.is_number()) {
            r.problem("heights", "expected numbers");
            break;
          }
          f.heights.push_back(v.get<double>());
        }
      }
    }
    if (const Json* cs = r.take("colors")) {
      if (!cs->is_array()) {
        r.problem("colors", "expected an array");
      } else {
        for (const Json& v : *cs) {
          if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
            r.problem("colors", "expected [r, g, b] entries");
            break;
          }
          f.colors.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
        }
      }
    }
  }
  const bool empty = f.rows == 0 && f.cols == 0 && f.heights.empty() && f.colors.empty();
  if (problems.size() == before && !empty) {
    try {
      f.validate();
    } catch (const Error& e) {
      problems.push_back(path + ": " + e.what());
    }
  }
  return f;
}

Json to_json(const ProjectConfig& cfg) {
  Json views = Json::array();
  for (const ViewEntry& v : cfg.views) {
    Json e{{"elevation", v.elevation_deg}, {"azimuth", v.azimuth_deg}};
    if (v.target) {
      e["target"] = to_string(*v.target);
      e["target_seed"] = v.target_seed;
    } else {
      e["image"] = v.image.string();
    }
    views.push_back(e);
  }
  Json pairs = Json::array();
  for (const TargetPair& p : cfg.ablation.pairs) pairs.push_back(p.name());
  Json j;
  j["views"] = views;
  j["image_size"] = cfg.image_size;
  j["optimizer"] = to_json(cfg.optimizer);
  j["final_samples"] = cfg.final_samples;
  j["export"] = {{"segments_per_bar", cfg.mesh.segments_per_bar},
                 {"print_strip_width_mm", cfg.mesh.print_strip_width_mm},
                 {"base_thickness_mm", cfg.mesh.base_thickness_mm}};
  j["ablation"] = {{"pairs", pairs}, {"seeds", cfg.ablation.seeds}};
  j["output_dir"] = cfg.output_dir.string();
  return j;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

using detail::Json;
using detail::ObjectReader;

std::filesystem::path default_output_root(const ConfigOptions& options) {
  if (!options.output_root.empty()) return std::filesystem::absolute(options.output_root);
  if (const char* env = std::getenv("HFA_OUTPUT_ROOT"); env && *env) return std::filesystem::absolute(env);
  return std::filesystem::current_path();
}

namespace {

void read_views(ObjectReader& r, ProjectConfig& cfg, const std::filesystem::path& base_dir) {
  const Json* vs = r.take("views");
  if (!vs) {
    r.problem("views", "at least one view is required");
    return;
  }
  if (!vs->is_array() || vs->empty()) {
    r.problem("views", "expected a non-empty array");
    return;
  }
  for (std::size_t i = 0; i < vs->size(); ++i) {
    const std::string path = "views[" + std::to_string(i) + "]";
    const Json& v = (*vs)[i];
    if (!v.is_object()) {
      r.problems().push_back(path + ": expected an object");
      continue;
    }
    ViewEntry e;
    ObjectReader vr(&v, path, r.problems());
    if (!vr.has("elevation")) vr.problem("elevation", "required");
    vr.read("elevation", e.elevation_deg);
    vr.read("azimuth", e.azimuth_deg);
    if (!(e.elevation_deg > 0.0 && e.elevation_deg <= 90.0)) vr.problem("elevation", "must lie in (0, 90]");
    if (!(e.azimuth_deg >= 0.0 && e.azimuth_deg < 360.0)) vr.problem("azimuth", "must lie in [0, 360)");
    const bool has_image = vr.has("image");
    const bool has_target = vr.has("target");
    if (has_image == has_target) vr.problem("image", "give exactly one of \"image\" or \"target\"");
    if (has_image) {
      std::string p;
      vr.read("image", p);
      if (!p.empty()) {
        std::filesystem::path ip(p);
        e.image = ip.is_absolute() ? ip : std::filesystem::absolute(base_dir / ip).lexically_normal();
      }
    }
    if (has_target) {
      TargetKind k = TargetKind::black;
      std::string s;
      vr.read("target", s);
      try {
        k = parse_target_kind(s);
      } catch (const Error& err) {
        vr.problem("target", err.what());
      }
      e.target = k;
      vr.read("target_seed", e.target_seed);
    } else if (vr.has("target_seed")) {
      vr.take("target_seed");
      vr.problem("target_seed", "only valid with \"target\"");
    }
    cfg.views.push_back(e);
  }
}

}  // namespace

ProjectConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::string_view default_name, const ConfigOptions& options) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    // strip the library prefix "[json.exception.parse_error.101] parse error at line..,"
    if (auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError({"syntax error at " + detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + msg});
  }
  return detail::project_from_json(j, base_dir, default_name, options);
}

namespace detail {

ProjectConfig project_from_json(const Json& j, const std::filesystem::path& base_dir,
                                std::string_view default_name, const ConfigOptions& options) {
  if (!j.is_object()) throw ConfigError({"config root must be a JSON object"});

  std::vector<std::string> problems;
  ProjectConfig cfg;
  bool image_size_given = false;
  {
    ObjectReader r(&j, "", problems);
    read_views(r, cfg, base_dir);
    image_size_given = r.has("image_size");
    r.read("image_size", cfg.image_size);
    if (image_size_given && cfg.image_size < 1) r.problem("image_size", "must be >= 1");
    r.object("optimizer", [&](ObjectReader& o) { detail::read_optimizer(o, cfg.optimizer); });
    if (!r.has("optimizer")) {
      OptimizerConfig defaults;
      cfg.optimizer.geometry.h_max = 4.0 * defaults.geometry.strip_width_mm;
    }
    r.read("final_samples", cfg.final_samples);
    if (cfg.final_samples < 1) r.problem("final_samples", "must be >= 1");
    r.object("export", [&](ObjectReader& e) {
      e.read("segments_per_bar", cfg.mesh.segments_per_bar);
      e.read("print_strip_width_mm", cfg.mesh.print_strip_width_mm);
      e.read("base_thickness_mm", cfg.mesh.base_thickness_mm);
      if (cfg.mesh.segments_per_bar < 1) e.problem("segments_per_bar", "must be >= 1");
      if (!(cfg.mesh.print_strip_width_mm > 0.0)) e.problem("print_strip_width_mm", "must be positive");
      if (!(cfg.mesh.base_thickness_mm >= 0.0)) e.problem("base_thickness_mm", "must be >= 0");
    });
    r.object("ablation", [&](ObjectReader& a) {
      if (const Json* ps = a.take("pairs")) {
        cfg.ablation.pairs.clear();
        if (!ps->is_array() || ps->empty()) {
          a.problem("pairs", "expected a non-empty array of \"a/b\" names");
        } else {
          for (const Json& p : *ps) {
            try {
              if (!p.is_string()) throw InvalidArgument("expected a string like \"black/white\"");
              cfg.ablation.pairs.push_back(parse_target_pair(p.get<std::string>()));
            } catch (const Error& e) {
              a.problem("pairs", e.what());
            }
          }
        }
      }
      if (const Json* ss = a.take("seeds")) {
        cfg.ablation.seeds.clear();
        if (!ss->is_array() || ss->empty()) {
          a.problem("seeds", "expected a non-empty array of non-negative integers");
        } else {
          for (const Json& s : *ss) {
            if (!s.is_number_unsigned()) {
              a.problem("seeds", "expected non-negative integers");
              break;
            }
            cfg.ablation.seeds.push_back(s.get<std::uint64_t>());
          }
        }
      }
    });
    std::string out;
    r.read("output_dir", out);
    if (out.empty()) out = "runs/" + std::string(default_name);
    std::filesystem::path op(out);
    cfg.output_dir = (op.is_absolute() ? op : default_output_root(options) / op).lexically_normal();
  }

  if (options.check_images) {
    int common = 0;
    for (std::size_t i = 0; i < cfg.views.size(); ++i) {
      const ViewEntry& v = cfg.views[i];
      if (v.target || v.image.empty()) continue;
      const std::string where = "views[" + std::to_string(i) + "].image";
      if (!std::filesystem::exists(v.image)) {
        problems.push_back(where + ": file not found: " + v.image.string());
        continue;
      }
      try {
        const Image img = load_image(v.image);
        if (!image_size_given) {
          if (common == 0) {
            common = img.width();
          } else if (img.width() != common) {
            problems.push_back(where + ": decodes to " + std::to_string(img.width()) +
                               " pixels per side, other views have " + std::to_string(common) +
                               " (set image_size to resample)");
          }
        }
      } catch (const Error& e) {
        problems.push_back(where + ": " + e.what());
      }
    }
    if (!image_size_given && common > 0) cfg.image_size = common;
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

}  // namespace detail

ProjectConfig load_config(const std::filesystem::path& path, const ConfigOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file: " + path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::filesystem::path abs = std::filesystem::absolute(path);
  return parse_config(ss.str(), abs.parent_path(), path.stem().string(), options);
}

std::string echo_config(const ProjectConfig& cfg) { return detail::to_json(cfg).dump(2) + "\n"; }

std::vector<ViewSpec> load_views(const ProjectConfig& cfg, std::vector<std::string>* warnings) {
  std::vector<ViewSpec> views;
  for (const ViewEntry& e : cfg.views) {
    ViewSpec v;
    v.elevation_deg = e.elevation_deg;
    v.azimuth_deg = e.azimuth_deg;
    v.image_size = cfg.image_size;
    v.desired = e.target ? make_target(*e.target, cfg.image_size, e.target_seed)
                         : load_image(e.image, cfg.image_size, warnings);
    v.validate();
    views.push_back(std::move(v));
  }
  return views;
}

}  // namespace hfa
