// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "semfuse/coord.hpp"
#include "semfuse/io/palette.hpp"
#include "semfuse/labels.hpp"
#include "semfuse/parallel.hpp"
#include "semfuse/semantic_map.hpp"

namespace semfuse {

struct SemanticMesh {
  std::vector<Vec3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<ClassId> labels;
  std::vector<io::Rgb> colors;

  [[nodiscard]] bool empty() const { return triangles.empty(); }
};

struct MeshOptions {
  double min_weight = 0.5;
  std::size_t workers = 1;
};

namespace mc {

// Cube corners are the 8 voxel centers c + (dx, dy, dz), numbered
// dx | dy << 1 | dz << 2. Edge a * 4 + r joins the two corners that differ
// along axis a; r enumerates the other two coordinates.

[[nodiscard]] constexpr std::array<int, 2> edge_corners(int edge) {
  const int a = edge / 4;
  const int r = edge % 4;
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  const int base = ((r & 1) << b) | (((r >> 1) & 1) << c);
  return {base, base | (1 << a)};
}

[[nodiscard]] constexpr int edge_between(int c0, int c1) {
  const int diff = c0 ^ c1;
  const int a = diff == 1 ? 0 : (diff == 2 ? 1 : 2);
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  return a * 4 + ((c0 >> b) & 1) + 2 * ((c0 >> c) & 1);
}

/// Triangle lists (edge ids) for each of the 256 inside/outside patterns.
/// Built by walking every face counter-clockwise as seen from outside the
/// cube: a segment runs from the crossing where the walk enters the inside
/// region to the crossing where it leaves. On a face with diagonal inside
/// corners this keeps the two inside corners separate. Segments chain into
/// closed loops that are fan-triangulated; triangle normals point toward
/// positive distance.
class CaseTable {
 public:
  CaseTable() {
    // corner loops of the 6 faces, counter-clockwise seen from outside
    static constexpr int kFaces[6][4] = {
        {0, 4, 6, 2},  // x = 0
        {1, 3, 7, 5},  // x = 1
        {0, 1, 5, 4},  // y = 0
        {2, 6, 7, 3},  // y = 1
        {0, 2, 3, 1},  // z = 0
        {4, 5, 7, 6},  // z = 1
    };
    for (int pattern = 0; pattern < 256; ++pattern) {
      auto inside = [&](int corner) { return (pattern >> corner) & 1; };
      std::array<int, 12> next;
      next.fill(-1);
      for (const auto& face : kFaces) {
        int enter_edge = -1;
        int first_leave = -1;
        int pending_enter = -1;
        for (int s = 0; s < 4; ++s) {
          const int c0 = face[s];
          const int c1 = face[(s + 1) % 4];
          if (inside(c0) == inside(c1)) continue;
          const int e = edge_between(c0, c1);
          if (!inside(c0)) {
            enter_edge = e;
            pending_enter = e;
          } else if (pending_enter >= 0) {
            next[static_cast<std::size_t>(pending_enter)] = e;
            pending_enter = -1;
          } else {
            first_leave = e;  // closes the arc that wraps past the loop start
          }
        }
        if (pending_enter >= 0 && first_leave >= 0) next[static_cast<std::size_t>(pending_enter)] = first_leave;
        (void)enter_edge;
      }
      std::array<bool, 12> used{};
      auto& tris = table_[static_cast<std::size_t>(pattern)];
      for (int start = 0; start < 12; ++start) {
        if (next[static_cast<std::size_t>(start)] < 0 || used[static_cast<std::size_t>(start)]) continue;
        std::vector<int> loop;
        for (int e = start; !used[static_cast<std::size_t>(e)]; e = next[static_cast<std::size_t>(e)]) {
          used[static_cast<std::size_t>(e)] = true;
          loop.push_back(e);
        }
        for (std::size_t v = 1; v + 1 < loop.size(); ++v) tris.push_back({loop[0], loop[v], loop[v + 1]});
      }
    }
  }

  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles(int pattern) const {
    return table_[static_cast<std::size_t>(pattern)];
  }

  static const CaseTable& instance() {
    static const CaseTable table;
    return table;
  }

 private:
  std::array<std::vector<std::array<int, 3>>, 256> table_;
};

struct EdgeKey {
  Coord c;  // cube-edge start voxel
  int axis;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const noexcept { return CoordHash{}(k.c) * 3 + static_cast<std::size_t>(k.axis); }
};

}  // namespace mc

/**
 * @brief Marching cubes over cubes of 8 voxel centers that are all observed
 * with weight >= min_weight. Inside is negative distance. Vertices are shared
 * between cubes (one per crossing lattice edge) and labeled by `label_of` on
 * the edge endpoint nearer to the crossing. Zero-area triangles are dropped.
 */
[[nodiscard]] inline SemanticMesh extract_surface(const SparseGrid<TsdfVoxel>& tsdf, const MeshOptions& opt,
                                                  const std::function<ClassId(const Coord&)>& label_of) {
  using Leaf = SparseGrid<TsdfVoxel>::Leaf;
  const auto& table = mc::CaseTable::instance();
  const double vs = tsdf.voxel_size();
  std::vector<const Leaf*> leaves;
  tsdf.for_each_leaf([&](const Leaf& leaf) { leaves.push_back(&leaf); });

  struct Crossing {
    mc::EdgeKey key;
    Vec3d position;
    Coord nearest;
  };
  // per worker: triangles as crossing triples, in leaf order
  std::vector<std::vector<std::array<Crossing, 3>>> parts(std::max<std::size_t>(opt.workers, 1));
  run_workers(parts.size(), [&](std::size_t w) {
    auto acc = tsdf.const_accessor();
    const auto [begin, end] = chunk_range(leaves.size(), parts.size(), w);
    auto& out = parts[w];
    std::array<TsdfVoxel, 8> corner;
    std::array<Coord, 8> corner_coord;
    for (std::size_t li = begin; li < end; ++li) {
      const Leaf& leaf = *leaves[li];
      leaf.for_each([&](std::uint32_t offset, const TsdfVoxel* v0) {
        if (!(v0->weight >= opt.min_weight) || !(v0->weight > 0.0)) return;
        const Coord c = tsdf.offset_to_coord(leaf.origin(), offset);
        int pattern = 0;
        for (int n = 0; n < 8; ++n) {
          corner_coord[static_cast<std::size_t>(n)] = c + Coord{n & 1, (n >> 1) & 1, (n >> 2) & 1};
          const TsdfVoxel* v = n == 0 ? v0 : acc.find(corner_coord[static_cast<std::size_t>(n)]);
          if (!v || !(v->weight >= opt.min_weight) || !(v->weight > 0.0)) return;
          corner[static_cast<std::size_t>(n)] = *v;
          if (v->distance < 0.0) pattern |= 1 << n;
        }
        for (const auto& tri : table.triangles(pattern)) {
          std::array<Crossing, 3> t;
          for (int s = 0; s < 3; ++s) {
            const auto [a, b] = mc::edge_corners(tri[static_cast<std::size_t>(s)]);
            const double da = corner[static_cast<std::size_t>(a)].distance;
            const double db = corner[static_cast<std::size_t>(b)].distance;
            const double f = da / (da - db);
            const Vec3d pa = coord_to_world_center(corner_coord[static_cast<std::size_t>(a)], vs);
            const Vec3d pb = coord_to_world_center(corner_coord[static_cast<std::size_t>(b)], vs);
            t[static_cast<std::size_t>(s)] = {{corner_coord[static_cast<std::size_t>(a)], tri[static_cast<std::size_t>(s)] / 4},
                                              pa + f * (pb - pa),
                                              f <= 0.5 ? corner_coord[static_cast<std::size_t>(a)]
                                                       : corner_coord[static_cast<std::size_t>(b)]};
          }
          const double area2 = (t[1].position - t[0].position).cross(t[2].position - t[0].position).norm();
          if (area2 <= 1e-12 * vs * vs) continue;
          out.push_back(t);
        }
      });
    }
  });

  SemanticMesh mesh;
  std::unordered_map<mc::EdgeKey, std::uint32_t, mc::EdgeKeyHash> index;
  for (const auto& part : parts) {
    for (const auto& t : part) {
      std::array<std::uint32_t, 3> ids;
      for (int s = 0; s < 3; ++s) {
        const Crossing& x = t[static_cast<std::size_t>(s)];
        auto [it, fresh] = index.try_emplace(x.key, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (fresh) {
          mesh.vertices.push_back(x.position);
          mesh.labels.push_back(label_of ? label_of(x.nearest) : kUnlabeled);
        }
        ids[static_cast<std::size_t>(s)] = it->second;
      }
      mesh.triangles.push_back(ids);
    }
  }
  return mesh;
}

/// Voxel labels for meshes and renders. Open maps without label embeddings
/// produce unlabeled output.
class VoxelLabeler {
 public:
  explicit VoxelLabeler(const SemanticMap& map, const EmbeddingSet* embeddings = nullptr)
      : map_(map), embeddings_(embeddings) {}

  [[nodiscard]] ClassId operator()(const Coord& c) const {
    if (map_.mode() == SemanticMode::open && !embeddings_) return kUnlabeled;
    const float* s = map_.semantics().find(c);
    if (!s) return kUnlabeled;
    const TsdfVoxel* v = map_.tsdf().find(c);
    return map_.label_of({s, map_.semantics().channels()}, v ? v->weight : 0.0, embeddings_);
  }

 private:
  const SemanticMap& map_;
  const EmbeddingSet* embeddings_;
};

[[nodiscard]] inline SemanticMesh extract_mesh(const SemanticMap& map, const MeshOptions& opt = {},
                                               const EmbeddingSet* embeddings = nullptr,
                                               const io::Palette* palette = nullptr) {
  const VoxelLabeler labeler(map, embeddings);
  SemanticMesh mesh = extract_surface(map.tsdf(), opt, std::cref(labeler));
  const io::Palette fallback = palette ? io::Palette{} : io::Palette::generated(
      map.mode() == SemanticMode::closed
          ? std::vector<std::string>(static_cast<std::size_t>(map.config().closed.num_classes), "")
          : std::vector<std::string>(embeddings ? embeddings->size() : 0, ""));
  const io::Palette& pal = palette ? *palette : fallback;
  mesh.colors.reserve(mesh.labels.size());
  for (ClassId z : mesh.labels) mesh.colors.push_back(pal.color(z));
  return mesh;
}

/// ASCII PLY with per-vertex x, y, z, red, green, blue, label.
inline void write_ply(std::ostream& os, const SemanticMesh& mesh) {
  os << "ply\nformat ascii 1.0\n"
     << "element vertex " << mesh.vertices.size() << "\n"
     << "property float x\nproperty float y\nproperty float z\n"
     << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
     << "property ushort label\n"
     << "element face " << mesh.triangles.size() << "\n"
     << "property list uchar int vertex_indices\nend_header\n";
  char line[160];
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3d& p = mesh.vertices[i];
    const io::Rgb c = i < mesh.colors.size() ? mesh.colors[i] : io::kUncertainColor;
    const ClassId z = i < mesh.labels.size() ? mesh.labels[i] : kUnlabeled;
    std::snprintf(line, sizeof(line), "%.7g %.7g %.7g %u %u %u %u\n", p.x(), p.y(), p.z(), unsigned{c[0]},
                  unsigned{c[1]}, unsigned{c[2]}, unsigned{z});
    os << line;
  }
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  if (!os) throw std::runtime_error("failed writing PLY");
}

inline void save_ply(const std::filesystem::path& path, const SemanticMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_ply(os, mesh);
}

}  // namespace semfuse
