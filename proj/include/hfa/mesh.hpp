#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hfa/common.hpp"
#include "hfa/heightfield.hpp"
#include "hfa/render.hpp"

namespace hfa {

struct Material {
  std::string name;  // m_RRGGBB of the 8-bit sRGB code
  Rgb kd;            // sRGB code / 255
  friend bool operator==(const Material&, const Material&) = default;
};

inline constexpr int kBasePart = -1;

struct MeshBundle {
  std::vector<Vec3> vertices;                // millimeters
  std::vector<std::array<int, 3>> faces;     // 0-based, counter-clockwise seen from outside
  std::vector<int> face_material;            // index into materials
  std::vector<int> face_part;                // bar index, or kBasePart for the base slab
  std::vector<Material> materials;
};

struct MeshOptions {
  double scale = 1.0;           // model millimeters per field millimeter
  double base_thickness = 0.0;  // slab below z = 0, in model millimeters; 0 disables it
  Rgb base_color{1.0, 1.0, 1.0};
};

/// Closed-form sizes: each bar has 4 (S+1) vertices and 4 + 8 S triangles; the slab adds 8 and 12.
struct MeshCounts {
  std::size_t vertices = 0;
  std::size_t faces = 0;
};
MeshCounts mesh_counts(int rows, int cols, int segments, bool base);

std::string material_name(const Rgb& linear);

/// One closed cuboid shell per bar, sides split into S bands when `segments` is given
/// (band s spans z in [s h/S, (s+1) h/S]; the top face takes band S-1).
MeshBundle build_mesh(const Heightfield& field, const SegmentedColors* segments, const MeshOptions& options);

/// OBJ with one usemtl group per material plus its MTL (newmtl/Kd).
void write_obj_mtl(const MeshBundle& mesh, const std::filesystem::path& obj_path,
                   const std::filesystem::path& mtl_path);

/// Reads v/f/usemtl/mtllib back; face_part is filled with 0.
MeshBundle read_obj(const std::filesystem::path& obj_path);

}  // namespace hfa
