#pragma once

// Plain-text mesh format:
//   wgmesh 1 <V> <E> <F>
//   V lines "x y", E lines "v0 v1 bflag", F lines "v0 v1 v2".
// Coordinates are written in shortest round-trip form.

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "wg/mesh.hpp"

namespace wg {

inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

inline void write_mesh(std::ostream& os, const Mesh& m) {
  os << "wgmesh 1 " << m.num_vertices() << ' ' << m.num_edges() << ' ' << m.num_cells() << '\n';
  for (const Point& p : m.vertices()) os << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  for (const Edge& e : m.edges()) os << e.v[0] << ' ' << e.v[1] << ' ' << (e.boundary ? 1 : 0) << '\n';
  for (const auto& t : m.cells()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

/// Reads a mesh and checks that the stored edge list agrees with the edges
/// implied by the cells.
inline Mesh read_mesh(std::istream& is) {
  std::string magic;
  int version = 0;
  long nv = -1, ne = -1, nf = -1;
  if (!(is >> magic >> version >> nv >> ne >> nf) || magic != "wgmesh" || version != 1 ||
      nv < 0 || ne < 0 || nf < 0)
    throw InvalidMeshError("bad mesh header");
  std::vector<Point> v(nv);
  for (auto& p : v)
    if (!(is >> p.x() >> p.y())) throw InvalidMeshError("truncated vertex block");
  std::vector<std::tuple<int, int, int>> file_edges(ne);
  for (auto& [a, b, f] : file_edges) {
    if (!(is >> a >> b >> f)) throw InvalidMeshError("truncated edge block");
    if (a > b) std::swap(a, b);
  }
  std::vector<std::array<int, 3>> cells(nf);
  for (auto& t : cells)
    if (!(is >> t[0] >> t[1] >> t[2])) throw InvalidMeshError("truncated cell block");

  Mesh m = Mesh::from_cells(std::move(v), std::move(cells));
  if (m.num_edges() != file_edges.size()) throw InvalidMeshError("edge count mismatch");
  std::sort(file_edges.begin(), file_edges.end());
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto& [a, b, f] = file_edges[e];
    const Edge& me = m.edge(e);
    if (me.v[0] != a || me.v[1] != b || me.boundary != (f != 0))
      throw InvalidMeshError("edge list disagrees with cell connectivity");
  }
  return m;
}

inline std::string mesh_to_string(const Mesh& m) {
  std::ostringstream os;
  write_mesh(os, m);
  return os.str();
}

}  // namespace wg
