#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hfa/image_io.hpp"
#include "hfa/mesh.hpp"
#include "oracles.hpp"

using namespace hfa;
namespace fs = std::filesystem;

namespace {

double signed_volume(const MeshBundle& mesh, int part) {
  double v = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (mesh.face_part[f] != part) continue;
    const Vec3& a = mesh.vertices[mesh.faces[f][0]];
    const Vec3& b = mesh.vertices[mesh.faces[f][1]];
    const Vec3& c = mesh.vertices[mesh.faces[f][2]];
    v += (a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x)) / 6.0;
  }
  return v;
}

Rgb quantized(const Rgb& c) {
  return {quantize_srgb8(c.r) / 255.0, quantize_srgb8(c.g) / 255.0, quantize_srgb8(c.b) / 255.0};
}

}  // namespace

TEST_CASE("material names") {
  CHECK(material_name({1, 0, 0}) == "m_FF0000");
  CHECK(material_name({0, 0, 0}) == "m_000000");
  CHECK(material_name({1, 1, 1}) == "m_FFFFFF");
  CHECK(material_name({srgb_to_linear(0x12 / 255.0), 0, srgb_to_linear(0xab / 255.0)}) == "m_1200AB");
}

TEST_CASE("mesh sizes follow the closed form") {
  const Heightfield f = oracle::random_field(3, 5, 1);
  for (int s : {1, 2, 5}) {
    for (bool base : {false, true}) {
      const SegmentedColors seg = SegmentedColors::from_field(f, s);
      MeshOptions o;
      o.base_thickness = base ? 0.5 : 0.0;
      const MeshBundle m = build_mesh(f, &seg, o);
      const MeshCounts want = mesh_counts(3, 5, s, base);
      CHECK(m.vertices.size() == want.vertices);
      CHECK(m.faces.size() == want.faces);
      CHECK(want.vertices == 15 * 4 * (s + 1) + (base ? 8 : 0));
      CHECK(want.faces == 15 * (4 + 8 * s) + (base ? 12 : 0));
      CHECK(m.face_material.size() == m.faces.size());
      CHECK(m.face_part.size() == m.faces.size());
    }
  }
  CHECK(build_mesh(f, nullptr, {}).faces.size() == mesh_counts(3, 5, 1, false).faces);
}

TEST_CASE("every shell is closed and outward facing") {
  const Heightfield f = oracle::random_field(4, 4, 2, 0.5);
  const SegmentedColors seg = SegmentedColors::from_field(f, 3);
  MeshOptions o;
  o.scale = 2.0;
  o.base_thickness = 0.7;
  const MeshBundle m = build_mesh(f, &seg, o);
  for (int part = 0; part < static_cast<int>(f.size()); ++part) {
    CHECK(oracle::open_edges(m, part) == 0);
    const double side = 0.5 * 2.0;
    CHECK(signed_volume(m, part) == doctest::Approx(side * side * f.heights[part] * 2.0).epsilon(1e-12));
  }
  CHECK(oracle::open_edges(m, kBasePart) == 0);
  CHECK(signed_volume(m, kBasePart) == doctest::Approx(4.0 * 4.0 * 0.7).epsilon(1e-12));
  for (const Vec3& v : m.vertices) {
    CHECK(v.x >= 0.0);
    CHECK(v.x <= 4.0);
    CHECK(v.z >= -0.7);
  }
}

TEST_CASE("faces carry their band's quantized color") {
  Heightfield f = oracle::random_field(2, 2, 3);
  const int S = 3;
  SegmentedColors seg = SegmentedColors::from_field(f, S);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Rgb& c : seg.bands) c = {u(rng), u(rng), u(rng)};
  const MeshBundle m = build_mesh(f, &seg, {});
  for (std::size_t k = 0; k < m.faces.size(); ++k) {
    const int part = m.face_part[k];
    REQUIRE(part >= 0);
    const auto& face = m.faces[k];
    double zmin = 1e300, zmax = -1e300;
    for (int vi : face) {
      zmin = std::min(zmin, m.vertices[vi].z);
      zmax = std::max(zmax, m.vertices[vi].z);
    }
    const double h = f.heights[part];
    int band;
    if (zmin == zmax && zmin == h) {
      band = S - 1;  // top
    } else if (zmin == zmax && zmin == 0.0) {
      band = 0;  // bottom
    } else {
      band = static_cast<int>(std::floor((zmin + zmax) / 2.0 / h * S));
    }
    const Material& mat = m.materials[m.face_material[k]];
    CHECK(mat.kd == quantized(seg.band(part, band)));
    CHECK(mat.name == material_name(seg.band(part, band)));
  }
  std::map<std::string, int> names;
  for (const Material& mat : m.materials) ++names[mat.name];
  for (const auto& [name, count] : names) CHECK(count == 1);
}

TEST_CASE("obj round trip") {
  const fs::path dir = fs::temp_directory_path() / ("hfa_mesh_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  const Heightfield f = oracle::random_field(3, 3, 5, 0.3);
  const SegmentedColors seg = SegmentedColors::from_field(f, 2);
  MeshOptions o;
  o.scale = 0.17;
  o.base_thickness = 0.25;
  const MeshBundle m = build_mesh(f, &seg, o);
  write_obj_mtl(m, dir / "a.obj", dir / "a.mtl");
  const MeshBundle back = read_obj(dir / "a.obj");
  REQUIRE(back.vertices.size() == m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    CHECK(back.vertices[i].x == m.vertices[i].x);
    CHECK(back.vertices[i].y == m.vertices[i].y);
    CHECK(back.vertices[i].z == m.vertices[i].z);
  }
  REQUIRE(back.faces.size() == m.faces.size());
  // faces are regrouped by material, so compare as multisets with their materials
  std::map<std::array<int, 3>, std::string> a, b;
  for (std::size_t k = 0; k < m.faces.size(); ++k) a[m.faces[k]] = m.materials[m.face_material[k]].name;
  for (std::size_t k = 0; k < back.faces.size(); ++k) b[back.faces[k]] = back.materials[back.face_material[k]].name;
  CHECK(a == b);
  for (const Material& mat : back.materials) {
    CHECK(mat.name == material_name({srgb_to_linear(mat.kd.r), srgb_to_linear(mat.kd.g), srgb_to_linear(mat.kd.b)}));
  }
  std::ifstream obj(dir / "a.obj");
  std::stringstream ss;
  ss << obj.rdbuf();
  CHECK(ss.str().find("mtllib a.mtl") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("ray cast against the mesh matches the hard render") {
  const Heightfield f = oracle::random_field(6, 6, 8);
  const SegmentedColors seg = SegmentedColors::from_field(f, 1);
  const MeshBundle m = build_mesh(f, &seg, {});
  int total = 0, agree = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const ViewSpec v = oracle::random_view(s + 20, 12);
    const RenderOutput out = render_hard(f, v);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        const auto face = oracle::trace_mesh(m, v, f.extent_x(), f.extent_y(), i, j);
        ++total;
        agree += face && m.face_part[*face] == out.hit_index[i * 12 + j];
      }
    }
  }
  CHECK(agree >= 0.98 * total);
}
