#include "hfa/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json_codec.hpp"

namespace hfa {

using detail::Json;
using detail::ObjectReader;

std::string to_string(RunStatus status) { return status == RunStatus::complete ? "complete" : "partial"; }

namespace {

constexpr const char* kFormat = "hfa-checkpoint";
constexpr int kVersion = 1;

Json step_json(const StepRecord& r) {
  return Json{{"step", r.step},   {"mse", r.mse},           {"barrier", r.barrier},
              {"neighbor", r.neighbor}, {"total", r.total}, {"phase", to_string(r.phase)},
              {"hard_mse", r.hard_mse}, {"resolution", r.resolution}, {"k", r.k},
              {"best", r.best}};
}

Json state_json(const OptimizerState& s) {
  Json hist = Json::array();
  for (const StepRecord& r : s.history) hist.push_back(step_json(r));
  Json j;
  j["step"] = s.step;
  j["phase"] = to_string(s.phase);
  j["temperature"] = s.temperature;
  j["t_heights"] = s.t_heights;
  j["t_colors"] = s.t_colors;
  j["next_subdivide_step"] = s.next_subdivide_step;
  j["has_best"] = s.has_best;
  j["best_hard_mse"] = s.best_hard_mse;
  j["rng"] = s.rng.state();
  j["field"] = detail::to_json(s.field);
  j["best_field"] = detail::to_json(s.best_field);
  j["m_heights"] = s.m_heights;
  j["v_heights"] = s.v_heights;
  j["m_colors"] = s.m_colors;
  j["v_colors"] = s.v_colors;
  j["history"] = hist;
  return j;
}

void read_doubles(ObjectReader& r, const char* key, std::vector<double>& out) {
  const Json* v = r.take(key);
  if (!v) return r.problem(key, "required");
  if (!v->is_array()) return r.problem(key, "expected an array");
  out.clear();
  for (const Json& x : *v) {
    if (!x.is_number()) return r.problem(key, "expected numbers");
    out.push_back(x.get<double>());
  }
}

Phase read_phase(ObjectReader& r, const char* key) {
  std::string s;
  r.read(key, s);
  try {
    return parse_phase(s);
  } catch (const Error& e) {
    r.problem(key, e.what());
    return Phase::both;
  }
}

Heightfield read_field(ObjectReader& r, const char* key) {
  const Json* v = r.take(key);
  if (!v) {
    r.problem(key, "required");
    return {};
  }
  return detail::heightfield_from_json(*v, r.path_of(key), r.problems());
}

OptimizerState read_state(ObjectReader& r) {
  OptimizerState s;
  r.read("step", s.step);
  s.phase = read_phase(r, "phase");
  r.read("temperature", s.temperature);
  r.read("t_heights", s.t_heights);
  r.read("t_colors", s.t_colors);
  r.read("next_subdivide_step", s.next_subdivide_step);
  r.read("has_best", s.has_best);
  r.read("best_hard_mse", s.best_hard_mse);
  std::string rng;
  r.read("rng", rng);
  try {
    s.rng.set_state(rng);
  } catch (const Error& e) {
    r.problem("rng", e.what());
  }
  s.field = read_field(r, "field");
  s.best_field = read_field(r, "best_field");
  read_doubles(r, "m_heights", s.m_heights);
  read_doubles(r, "v_heights", s.v_heights);
  read_doubles(r, "m_colors", s.m_colors);
  read_doubles(r, "v_colors", s.v_colors);
  if (s.m_heights.size() != s.field.size() || s.v_heights.size() != s.field.size() ||
      s.m_colors.size() != 3 * s.field.size() || s.v_colors.size() != 3 * s.field.size()) {
    r.problem("m_heights", "moment arrays do not match the field resolution");
  }
  if (const Json* h = r.take("history"); h && h->is_array()) {
    for (std::size_t i = 0; i < h->size(); ++i) {
      StepRecord rec;
      ObjectReader hr(&(*h)[i], r.path_of("history") + "[" + std::to_string(i) + "]", r.problems());
      hr.read("step", rec.step);
      hr.read("mse", rec.mse);
      hr.read("barrier", rec.barrier);
      hr.read("neighbor", rec.neighbor);
      hr.read("total", rec.total);
      rec.phase = read_phase(hr, "phase");
      hr.read("hard_mse", rec.hard_mse);
      hr.read("resolution", rec.resolution);
      hr.read("k", rec.k);
      hr.read("best", rec.best);
      s.history.push_back(rec);
    }
  } else {
    r.problem("history", "expected an array");
  }
  return s;
}

}  // namespace

std::string checkpoint_text(const Checkpoint& ck) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["status"] = to_string(ck.status);
  j["final_mse"] = ck.final_mse;
  j["project"] = detail::to_json(ck.project);
  j["field"] = detail::to_json(ck.field);
  if (ck.segments) {
    Json bands = Json::array();
    for (const Rgb& c : ck.segments->bands) bands.push_back(detail::to_json(c));
    j["segments"] = {{"per_bar", ck.segments->segments}, {"bands", bands}};
  }
  j["state"] = state_json(ck.state);
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw IoError("checkpoint is not valid JSON at " + detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!j.is_object() || j.value("format", "") != kFormat) throw IoError("not an hfa checkpoint");
  if (j.value("version", 0) != kVersion) throw IoError("unsupported checkpoint version");

  std::vector<std::string> problems;
  Checkpoint ck;
  {
    ObjectReader r(&j, "", problems);
    r.take("format");
    r.take("version");
    std::string status;
    r.read("status", status);
    if (status == "complete") {
      ck.status = RunStatus::complete;
    } else if (status == "partial") {
      ck.status = RunStatus::partial;
    } else {
      r.problem("status", "expected \"complete\" or \"partial\"");
    }
    r.read("final_mse", ck.final_mse);
    if (const Json* p = r.take("project")) {
      try {
        ConfigOptions opts;
        opts.check_images = false;
        ck.project = detail::project_from_json(*p, "/", "run", opts);
      } catch (const ConfigError& e) {
        for (const auto& m : e.problems()) problems.push_back("project." + m);
      }
    } else {
      r.problem("project", "required");
    }
    ck.field = read_field(r, "field");
    r.object("segments", [&](ObjectReader& sr) {
      SegmentedColors seg;
      sr.read("per_bar", seg.segments);
      if (const Json* b = sr.take("bands"); b && b->is_array()) {
        for (const Json& c : *b) {
          if (!c.is_array() || c.size() != 3) {
            sr.problem("bands", "expected [r, g, b] entries");
            break;
          }
          seg.bands.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
        }
      }
      if (seg.segments < 1 || seg.bands.size() != ck.field.size() * static_cast<std::size_t>(seg.segments)) {
        sr.problem("bands", "band count does not match the field");
      }
      ck.segments = std::move(seg);
    });
    r.object("state", [&](ObjectReader& sr) { ck.state = read_state(sr); });
    if (!r.has("state")) r.problem("state", "required");
  }
  if (!problems.empty()) {
    std::string msg = "malformed checkpoint:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw IoError(msg);
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const std::string text = checkpoint_text(ck);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + tmp.string() + "'");
    out << text;
    if (!out) throw IoError("cannot write checkpoint '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace hfa
