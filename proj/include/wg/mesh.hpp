#pragma once

// Conforming triangulations of polygonal domains with explicit adjacency,
// uniform midpoint refinement, and per-cell affine geometry.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wg/error.hpp"

namespace wg {

using Point = Eigen::Vector2d;

struct Edge {
  std::array<int, 2> v;  // v[0] < v[1]
  bool boundary = false;
};

enum class MeshPattern { TwoTriangle, CrissCross };

inline MeshPattern parse_mesh_pattern(std::string_view s) {
  if (s == "two-triangle") return MeshPattern::TwoTriangle;
  if (s == "criss-cross" || s == "criss-cross-n") return MeshPattern::CrissCross;
  throw InvalidInputError("unknown mesh pattern '" + std::string(s) + "'");
}

inline std::string to_string(MeshPattern p) {
  return p == MeshPattern::TwoTriangle ? "two-triangle" : "criss-cross";
}

/// Per-cell geometric data. Local edge i is the edge opposite local vertex i.
struct CellGeometry {
  double h = 0.0;  // diameter
  double area = 0.0;
  std::array<double, 3> edge_length{};
  std::array<Point, 3> normal;  // outward unit normals
  Eigen::Matrix2d A;            // x = A * xhat + b
  Point b;
};

/// Immutable triangulation. Cells are counterclockwise; edges are numbered
/// lexicographically by their sorted vertex pair.
class Mesh {
 public:
  /// Builds all adjacency from a vertex list and counterclockwise cells.
  static Mesh from_cells(std::vector<Point> vertices,
                         std::vector<std::array<int, 3>> cells, int level = 0) {
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.cells_ = std::move(cells);
    m.level_ = level;
    m.build_topology();
    return m;
  }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  int level() const { return level_; }

  const Point& vertex(std::size_t i) const { return vertices_[i]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::array<int, 3>& cell(std::size_t c) const { return cells_[c]; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }

  /// Edge indices of a cell; entry i is opposite local vertex i.
  const std::array<int, 3>& cell_edges(std::size_t c) const { return cell_edges_[c]; }

  /// Incident cells of an edge; second entry is -1 on the boundary.
  const std::array<int, 2>& edge_cells(std::size_t e) const { return edge_cells_[e]; }

  /// Cells having vertex x as a corner (the patch omega_x).
  std::span<const int> vertex_patch(std::size_t x) const {
    return {patch_cells_.data() + patch_offsets_[x],
            patch_cells_.data() + patch_offsets_[x + 1]};
  }

  bool is_boundary_vertex(std::size_t x) const { return boundary_vertex_[x]; }
  std::size_t num_boundary_edges() const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.boundary; }));
  }

  /// For a refined mesh: the coarse vertices whose average is this vertex
  /// (a pair of equal indices for inherited vertices). Empty at level 0.
  const std::vector<std::array<int, 2>>& vertex_parents() const { return vertex_parents_; }
  /// For a refined mesh: coarse parent cell of each cell. Empty at level 0.
  const std::vector<int>& cell_parents() const { return cell_parent_; }

  /// Local index (0..2) of edge e within cell c, or -1.
  int local_edge_index(std::size_t c, int e) const {
    for (int i = 0; i < 3; ++i)
      if (cell_edges_[c][i] == e) return i;
    return -1;
  }

  CellGeometry geometry(std::size_t c) const {
    const auto& t = cells_[c];
    const Point& p0 = vertices_[t[0]];
    const Point& p1 = vertices_[t[1]];
    const Point& p2 = vertices_[t[2]];
    CellGeometry g;
    g.A.col(0) = p1 - p0;
    g.A.col(1) = p2 - p0;
    g.b = p0;
    const double det = g.A.determinant();
    if (!(det > 0.0))
      throw InvalidMeshError("cell " + std::to_string(c) + " is degenerate or clockwise");
    g.area = 0.5 * det;
    const std::array<const Point*, 3> p{&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
      const Point t_vec = *p[(i + 2) % 3] - *p[(i + 1) % 3];
      g.edge_length[i] = t_vec.norm();
      g.normal[i] = Point(t_vec.y(), -t_vec.x()) / g.edge_length[i];
    }
    g.h = *std::max_element(g.edge_length.begin(), g.edge_length.end());
    return g;
  }

  double h_max() const {
    double h = 0.0;
    for (std::size_t c = 0; c < num_cells(); ++c) h = std::max(h, geometry(c).h);
    return h;
  }
  double h_min() const {
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < num_cells(); ++c) h = std::min(h, geometry(c).h);
    return h;
  }

  /// Checks every structural invariant; throws InvalidMeshError on the first violation.
  void validate() const {
    for (std::size_t c = 0; c < num_cells(); ++c) {
      (void)geometry(c);
      for (int i = 0; i < 3; ++i) {
        const auto& ec = edge_cells_[cell_edges_[c][i]];
        if (ec[0] != static_cast<int>(c) && ec[1] != static_cast<int>(c))
          throw InvalidMeshError("edge/cell incidence is not symmetric");
      }
    }
    for (std::size_t e = 0; e < num_edges(); ++e) {
      const bool one = edge_cells_[e][1] < 0;
      if (one != edges_[e].boundary)
        throw InvalidMeshError("boundary flag inconsistent with incidence");
      for (int k = 0; k < (one ? 1 : 2); ++k)
        if (local_edge_index(edge_cells_[e][k], static_cast<int>(e)) < 0)
          throw InvalidMeshError("edge/cell incidence is not symmetric");
    }
  }

 private:
  friend Mesh refine_uniform(const Mesh& coarse);

  void build_topology() {
    const int nv = static_cast<int>(vertices_.size());
    std::vector<std::array<int, 2>> pairs;
    pairs.reserve(3 * cells_.size());
    for (const auto& t : cells_) {
      for (int i = 0; i < 3; ++i) {
        if (t[i] < 0 || t[i] >= nv) throw InvalidMeshError("cell references missing vertex");
        const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
        if (a == b) throw InvalidMeshError("cell has repeated vertex");
        pairs.push_back({std::min(a, b), std::max(a, b)});
      }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    edges_.resize(pairs.size());
    edge_cells_.assign(pairs.size(), {-1, -1});
    for (std::size_t e = 0; e < pairs.size(); ++e) edges_[e].v = pairs[e];

    cell_edges_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto& t = cells_[c];
      for (int i = 0; i < 3; ++i) {
        const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
        const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        const auto it = std::lower_bound(pairs.begin(), pairs.end(), key);
        const int e = static_cast<int>(it - pairs.begin());
        cell_edges_[c][i] = e;
        auto& ec = edge_cells_[e];
        if (ec[0] < 0) {
          ec[0] = static_cast<int>(c);
        } else if (ec[1] < 0) {
          ec[1] = static_cast<int>(c);
        } else {
          throw InvalidMeshError("edge shared by more than two cells");
        }
      }
    }

    boundary_vertex_.assign(vertices_.size(), false);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      edges_[e].boundary = edge_cells_[e][1] < 0;
      if (edges_[e].boundary) {
        boundary_vertex_[edges_[e].v[0]] = true;
        boundary_vertex_[edges_[e].v[1]] = true;
      }
    }

    patch_offsets_.assign(vertices_.size() + 1, 0);
    for (const auto& t : cells_)
      for (int v : t) ++patch_offsets_[v + 1];
    for (std::size_t i = 0; i < vertices_.size(); ++i) patch_offsets_[i + 1] += patch_offsets_[i];
    patch_cells_.resize(patch_offsets_.back());
    std::vector<int> fill(patch_offsets_.begin(), patch_offsets_.end() - 1);
    for (std::size_t c = 0; c < cells_.size(); ++c)
      for (int v : cells_[c]) patch_cells_[fill[v]++] = static_cast<int>(c);

    for (std::size_t v = 0; v < vertices_.size(); ++v)
      if (patch_offsets_[v + 1] == patch_offsets_[v])
        throw InvalidMeshError("vertex " + std::to_string(v) + " belongs to no cell");
    validate();
  }

  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::array<int, 2>> edge_cells_;
  std::vector<bool> boundary_vertex_;
  std::vector<int> patch_offsets_;
  std::vector<int> patch_cells_;
  std::vector<std::array<int, 2>> vertex_parents_;
  std::vector<int> cell_parent_;
  int level_ = 0;
};

/// Initial triangulation of the unit square. For CrissCross every one of the
/// n x n sub-squares is split into four triangles through its center.
inline Mesh build_initial_mesh(MeshPattern pattern, int n = 1) {
  if (n < 1) throw InvalidInputError("mesh parameter n must be >= 1");
  std::vector<Point> v;
  std::vector<std::array<int, 3>> cells;
  if (pattern == MeshPattern::TwoTriangle) {
    v = {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
    cells = {{0, 1, 2}, {0, 2, 3}};
    return Mesh::from_cells(std::move(v), std::move(cells));
  }
  const int np = n + 1;
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.emplace_back(i * h, j * h);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) v.emplace_back((i + 0.5) * h, (j + 0.5) * h);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int sw = j * np + i, se = sw + 1, nw = sw + np, ne = nw + 1;
      const int c = np * np + j * n + i;
      cells.push_back({sw, se, c});
      cells.push_back({se, ne, c});
      cells.push_back({ne, nw, c});
      cells.push_back({nw, sw, c});
    }
  }
  return Mesh::from_cells(std::move(v), std::move(cells));
}

/// Splits every triangle into four by connecting edge midpoints. Inherited
/// vertices keep their indices; the midpoint of coarse edge e becomes vertex
/// V + e. Children of coarse cell c are 4c..4c+3 (three corners, then center).
inline Mesh refine_uniform(const Mesh& coarse) {
  const int nv = static_cast<int>(coarse.num_vertices());
  std::vector<Point> v(coarse.vertices());
  v.reserve(nv + coarse.num_edges());
  std::vector<std::array<int, 2>> parents;
  parents.reserve(nv + coarse.num_edges());
  for (int i = 0; i < nv; ++i) parents.push_back({i, i});
  for (const Edge& e : coarse.edges()) {
    v.push_back(0.5 * (coarse.vertex(e.v[0]) + coarse.vertex(e.v[1])));
    parents.push_back(e.v);
  }
  std::vector<std::array<int, 3>> cells;
  std::vector<int> cell_parent;
  cells.reserve(4 * coarse.num_cells());
  for (std::size_t c = 0; c < coarse.num_cells(); ++c) {
    const auto& t = coarse.cell(c);
    const auto& ce = coarse.cell_edges(c);
    // midpoint opposite local vertex i
    const int m0 = nv + ce[0], m1 = nv + ce[1], m2 = nv + ce[2];
    cells.push_back({t[0], m2, m1});
    cells.push_back({m2, t[1], m0});
    cells.push_back({m1, m0, t[2]});
    cells.push_back({m0, m1, m2});
    for (int k = 0; k < 4; ++k) cell_parent.push_back(static_cast<int>(c));
  }
  Mesh fine = Mesh::from_cells(std::move(v), std::move(cells), coarse.level() + 1);
  fine.vertex_parents_ = std::move(parents);
  fine.cell_parent_ = std::move(cell_parent);
  return fine;
}

/// Nested sequence T_0, ..., T_levels.
inline std::vector<Mesh> build_hierarchy(const Mesh& initial, int levels) {
  if (levels < 0) throw InvalidInputError("levels must be >= 0");
  std::vector<Mesh> h{initial};
  h.reserve(levels + 1);
  for (int l = 0; l < levels; ++l) h.push_back(refine_uniform(h.back()));
  return h;
}

/// Constant symmetric tensor (a11 a12; a12 a22).
struct Tensor2 {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << a11, a12, a12, a22;
    return m;
  }
  bool is_spd() const { return a11 > 0.0 && a11 * a22 - a12 * a12 > 0.0; }
  Tensor2 scaled(double s) const { return {s * a11, s * a12, s * a22}; }
};

/// One SPD tensor per cell.
struct CoefficientField {
  std::vector<Tensor2> tensors;

  static CoefficientField constant(const Mesh& m, Tensor2 t = {}) {
    return {std::vector<Tensor2>(m.num_cells(), t)};
  }
  const Tensor2& operator[](std::size_t c) const { return tensors[c]; }
  std::size_t size() const { return tensors.size(); }

  void validate(const Mesh& m) const {
    if (tensors.size() != m.num_cells())
      throw InvalidInputError("coefficient field size does not match mesh");
    for (const auto& t : tensors)
      if (!t.is_spd()) throw InvalidInputError("coefficient tensor is not SPD");
  }
};

}  // namespace wg
