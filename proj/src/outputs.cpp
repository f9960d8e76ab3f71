#include "hfa/outputs.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hfa/image_io.hpp"
#include "hfa/objective.hpp"
#include "json_codec.hpp"

namespace hfa {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

RunLock::RunLock(const std::filesystem::path& dir) : path_(dir / kFileName) {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw IoError("output directory '" + dir.string() + "' is in use by another run (remove " +
                    path_.string() + " if that run is gone)");
    }
    throw IoError("cannot create lock file '" + path_.string() + "': " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

std::string loss_csv(const std::vector<StepRecord>& history) {
  using detail::Json;
  std::string out = "step,mse,barrier,neighbor,total,phase,hard_mse,resolution,k,best\n";
  // Json::dump gives the shortest round-trip decimal form
  auto num = [](double x) { return Json(x).dump(); };
  for (const StepRecord& r : history) {
    out += std::to_string(r.step) + "," + num(r.mse) + "," + num(r.barrier) + "," + num(r.neighbor) + "," +
           num(r.total) + "," + to_string(r.phase) + "," + num(r.hard_mse) + "," + std::to_string(r.resolution) +
           "," + num(r.k) + "," + num(r.best) + "\n";
  }
  return out;
}

std::string manifest_text(const Manifest& m) {
  using detail::Json;
  Json files = Json::array();
  for (const ManifestEntry& e : m.files) files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  Json j{{"status", to_string(m.status)}, {"command", m.command}, {"final_mse", m.final_mse}, {"files", files}};
  return j.dump(2) + "\n";
}

Manifest write_manifest(const std::filesystem::path& dir, RunStatus status, const std::string& command,
                        std::vector<std::string> files, double final_mse) {
  std::sort(files.begin(), files.end());
  Manifest m;
  m.status = status;
  m.command = command;
  m.final_mse = final_mse;
  for (const std::string& f : files) {
    const std::string bytes = read_file(dir / f);
    m.files.push_back({f, sha256_hex(bytes), bytes.size()});
  }
  write_file(dir / "manifest.json", manifest_text(m));
  return m;
}

MeshOptions mesh_options(const ProjectConfig& project, const Heightfield& field) {
  MeshOptions o;
  o.scale = project.mesh.print_strip_width_mm / field.strip_width;
  o.base_thickness = project.mesh.base_thickness_mm;
  return o;
}

namespace {

Checkpoint make_checkpoint(const RunArtifacts& run, RunStatus status) {
  Checkpoint ck;
  ck.status = status;
  ck.project = run.project;
  ck.state = run.result.state;
  if (status == RunStatus::complete) {
    ck.field = run.result.best_field;
    ck.final_mse = run.result.final_mse;
    ck.segments = run.segments;
  } else {
    ck.field = run.result.state.field;
    RenderSettings rs;
    rs.background = run.project.optimizer.background;
    rs.tiling = run.project.optimizer.tiling;
    ck.final_mse = hard_mse(ck.field, run.views, rs);
  }
  return ck;
}

}  // namespace

Manifest write_outputs(const RunArtifacts& run, const std::filesystem::path& dir) {
  const OptimizerConfig& cfg = run.project.optimizer;
  const Heightfield& field = run.result.best_field;
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, std::string_view text) {
    write_file(dir / name, text);
    files.push_back(name);
  };

  emit("config.json", echo_config(run.project));

  HeavisideSpec spec{cfg.heaviside, cfg.k_end, cfg.seed};
  RenderSettings smooth;
  smooth.background = cfg.background;
  smooth.tiling = cfg.tiling;
  RenderSettings hard = smooth;
  hard.samples = run.project.final_samples;
  for (std::size_t v = 0; v < run.views.size(); ++v) {
    const std::string stem = "view" + std::to_string(v);
    save_png(dir / (stem + "_smooth.png"), render_view(field, run.views[v], spec, smooth).image);
    files.push_back(stem + "_smooth.png");
    save_png(dir / (stem + "_hard.png"), render_hard(field, run.views[v], hard).image);
    files.push_back(stem + "_hard.png");
  }

  emit("loss.csv", loss_csv(run.result.history));
  save_checkpoint(dir / "checkpoint.json", make_checkpoint(run, RunStatus::complete));
  files.push_back("checkpoint.json");

  const MeshBundle mesh = build_mesh(field, run.segments ? &*run.segments : nullptr, mesh_options(run.project, field));
  write_obj_mtl(mesh, dir / "mesh.obj", dir / "mesh.mtl");
  files.push_back("mesh.obj");
  files.push_back("mesh.mtl");

  return write_manifest(dir, RunStatus::complete, "optimize", files, run.result.final_mse);
}

Manifest write_partial(const RunArtifacts& run, const std::filesystem::path& dir) {
  const Checkpoint ck = make_checkpoint(run, RunStatus::partial);
  save_checkpoint(dir / "checkpoint.json", ck);
  return write_manifest(dir, RunStatus::partial, "optimize", {"checkpoint.json"}, ck.final_mse);
}

}  // namespace hfa
