#include "hfa/mesh.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hfa/image_io.hpp"

namespace hfa {

MeshCounts mesh_counts(int rows, int cols, int segments, bool base) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  const std::size_t s = static_cast<std::size_t>(segments);
  MeshCounts c{n * 4 * (s + 1), n * (4 + 8 * s)};
  if (base) {
    c.vertices += 8;
    c.faces += 12;
  }
  return c;
}

std::string material_name(const Rgb& linear) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "m_%02X%02X%02X", quantize_srgb8(linear.r), quantize_srgb8(linear.g),
                quantize_srgb8(linear.b));
  return buf;
}

namespace {

class MaterialTable {
 public:
  explicit MaterialTable(std::vector<Material>& out) : out_(out) {}
  int id(const Rgb& linear) {
    const std::string name = material_name(linear);
    auto [it, inserted] = index_.try_emplace(name, static_cast<int>(out_.size()));
    if (inserted) {
      out_.push_back({name, {quantize_srgb8(linear.r) / 255.0, quantize_srgb8(linear.g) / 255.0,
                             quantize_srgb8(linear.b) / 255.0}});
    }
    return it->second;
  }

 private:
  std::vector<Material>& out_;
  std::map<std::string, int> index_;
};

// Appends a closed shell over the rectangle [x0,x1] x [y0,y1] with `levels` (ascending z).
// material(s) gives the material of side band s; top/bottom take the last/first band.
template <class MatFn>
void add_shell(MeshBundle& m, double x0, double y0, double x1, double y1, const std::vector<double>& levels,
               int part, MatFn material) {
  const int base = static_cast<int>(m.vertices.size());
  const int bands = static_cast<int>(levels.size()) - 1;
  for (double z : levels) {
    m.vertices.push_back({x0, y0, z});
    m.vertices.push_back({x1, y0, z});
    m.vertices.push_back({x1, y1, z});
    m.vertices.push_back({x0, y1, z});
  }
  auto v = [&](int level, int corner) { return base + 4 * level + corner; };
  auto tri = [&](int a, int b, int c, int mat) {
    m.faces.push_back({a, b, c});
    m.face_material.push_back(mat);
    m.face_part.push_back(part);
  };
  const int bottom = material(0);
  tri(v(0, 0), v(0, 2), v(0, 1), bottom);
  tri(v(0, 0), v(0, 3), v(0, 2), bottom);
  for (int s = 0; s < bands; ++s) {
    const int mat = material(s);
    for (int a = 0; a < 4; ++a) {
      const int b = (a + 1) % 4;
      tri(v(s, a), v(s, b), v(s + 1, b), mat);
      tri(v(s, a), v(s + 1, b), v(s + 1, a), mat);
    }
  }
  const int top = material(bands - 1);
  tri(v(bands, 0), v(bands, 1), v(bands, 2), top);
  tri(v(bands, 0), v(bands, 2), v(bands, 3), top);
}

std::string fmt(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

MeshBundle build_mesh(const Heightfield& field, const SegmentedColors* segments, const MeshOptions& options) {
  field.validate();
  if (!(options.scale > 0.0)) throw InvalidArgument("mesh scale must be positive");
  if (!(options.base_thickness >= 0.0)) throw InvalidArgument("base thickness must be >= 0");
  const int S = segments ? segments->segments : 1;
  if (S < 1) throw InvalidArgument("segments per bar must be >= 1");
  if (segments && segments->bands.size() != field.size() * static_cast<std::size_t>(S)) {
    throw InvalidArgument("segment colors do not match the field");
  }

  MeshBundle m;
  MaterialTable table(m.materials);
  const MeshCounts counts = mesh_counts(field.rows, field.cols, S, options.base_thickness > 0.0);
  m.vertices.reserve(counts.vertices);
  m.faces.reserve(counts.faces);

  const double w = field.strip_width * options.scale;
  std::vector<double> levels(static_cast<std::size_t>(S) + 1);
  for (int r = 0; r < field.rows; ++r) {
    for (int c = 0; c < field.cols; ++c) {
      const std::size_t cell = field.index(r, c);
      const double h = field.heights[cell] * options.scale;
      for (int s = 0; s <= S; ++s) levels[s] = s == S ? h : h * s / S;
      add_shell(m, c * w, r * w, (c + 1) * w, (r + 1) * w, levels, static_cast<int>(cell), [&](int s) {
        return table.id(segments ? segments->band(cell, s) : field.colors[cell]);
      });
    }
  }
  if (options.base_thickness > 0.0) {
    const int mat = table.id(options.base_color);
    add_shell(m, 0.0, 0.0, field.cols * w, field.rows * w, {-options.base_thickness, 0.0}, kBasePart,
              [&](int) { return mat; });
  }
  return m;
}

void write_obj_mtl(const MeshBundle& mesh, const std::filesystem::path& obj_path,
                   const std::filesystem::path& mtl_path) {
  {
    std::ofstream mtl(mtl_path, std::ios::binary | std::ios::trunc);
    if (!mtl) throw IoError("cannot write '" + mtl_path.string() + "'");
    for (const Material& mat : mesh.materials) {
      mtl << "newmtl " << mat.name << "\n"
          << "Kd " << fmt(mat.kd.r) << " " << fmt(mat.kd.g) << " " << fmt(mat.kd.b) << "\n\n";
    }
    if (!mtl) throw IoError("cannot write '" + mtl_path.string() + "'");
  }
  std::ofstream obj(obj_path, std::ios::binary | std::ios::trunc);
  if (!obj) throw IoError("cannot write '" + obj_path.string() + "'");
  obj << "mtllib " << mtl_path.filename().string() << "\n";
  for (const Vec3& v : mesh.vertices) obj << "v " << fmt(v.x) << " " << fmt(v.y) << " " << fmt(v.z) << "\n";
  std::vector<std::vector<std::size_t>> groups(mesh.materials.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) groups[mesh.face_material[f]].push_back(f);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    obj << "usemtl " << mesh.materials[g].name << "\n";
    for (std::size_t f : groups[g]) {
      const auto& t = mesh.faces[f];
      obj << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    }
  }
  if (!obj) throw IoError("cannot write '" + obj_path.string() + "'");
}

MeshBundle read_obj(const std::filesystem::path& obj_path) {
  std::ifstream in(obj_path);
  if (!in) throw IoError("cannot read '" + obj_path.string() + "'");
  MeshBundle m;
  std::map<std::string, int> names;
  std::map<std::string, Rgb> kd;
  int current = -1;
  std::string line;
  int lineno = 0;
  auto bad = [&](const std::string& why) {
    return IoError(obj_path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream s(line);
    std::string tag;
    if (!(s >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(s >> v.x >> v.y >> v.z)) throw bad("malformed vertex");
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> t{};
      for (int& idx : t) {
        std::string tok;
        if (!(s >> tok)) throw bad("only triangles are supported");
        idx = std::stoi(tok.substr(0, tok.find('/'))) - 1;
        if (idx < 0 || idx >= static_cast<int>(m.vertices.size())) throw bad("vertex index out of range");
      }
      if (current < 0) throw bad("face before any usemtl");
      m.faces.push_back(t);
      m.face_material.push_back(current);
      m.face_part.push_back(0);
    } else if (tag == "usemtl") {
      std::string name;
      s >> name;
      auto [it, inserted] = names.try_emplace(name, static_cast<int>(m.materials.size()));
      if (inserted) m.materials.push_back({name, {}});
      current = it->second;
    } else if (tag == "mtllib") {
      std::string file;
      s >> file;
      std::ifstream mtl(obj_path.parent_path() / file);
      if (!mtl) throw bad("cannot open material library '" + file + "'");
      std::string ml, name;
      while (std::getline(mtl, ml)) {
        std::istringstream ms(ml);
        std::string mt;
        if (!(ms >> mt)) continue;
        if (mt == "newmtl") {
          ms >> name;
        } else if (mt == "Kd") {
          Rgb c;
          ms >> c.r >> c.g >> c.b;
          kd[name] = c;
        }
      }
    }
  }
  for (Material& mat : m.materials) {
    auto it = kd.find(mat.name);
    if (it == kd.end()) throw IoError("material '" + mat.name + "' is not defined in the MTL");
    mat.kd = it->second;
  }
  return m;
}

}  // namespace hfa
