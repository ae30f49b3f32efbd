#pragma once

// Conforming P1 space on the same triangulation, the prolongation into the
// weak Galerkin space, the coarse operator, and the vertex-averaging map P_h.

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wg/assemble.hpp"
#include "wg/error.hpp"
#include "wg/fespace.hpp"
#include "wg/mesh.hpp"

namespace wg {

/// P1 unknowns live on interior vertices; boundary vertices map to -1.
class P1Space {
 public:
  explicit P1Space(const Mesh& mesh) : vertex_dof_(mesh.num_vertices(), -1) {
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      if (!mesh.is_boundary_vertex(v)) vertex_dof_[v] = static_cast<int>(size_++);
  }
  std::size_t size() const { return size_; }
  int dof(std::size_t vertex) const { return vertex_dof_[vertex]; }

 private:
  std::vector<int> vertex_dof_;
  std::size_t size_ = 0;
};

/// Barycentric gradients of the three vertex hats of cell c.
inline std::array<Point, 3> hat_gradients(const CellGeometry& g) {
  const Eigen::Matrix2d Ainv = g.A.inverse();
  const Point g1 = Ainv.row(0).transpose();
  const Point g2 = Ainv.row(1).transpose();
  return {-(g1 + g2), g1, g2};
}

inline Eigen::Matrix3d p1_local_stiffness(const CellGeometry& g, const Tensor2& a) {
  const auto grads = hat_gradients(g);
  const Eigen::Matrix2d am = a.matrix();
  Eigen::Matrix3d K;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K(i, j) = g.area * grads[i].dot(am * grads[j]);
  return K;
}

/// Standard P1 stiffness with Dirichlet vertices removed.
inline SparseMatrix assemble_p1_stiffness(const Mesh& mesh, const CoefficientField& a) {
  a.validate(mesh);
  const P1Space p1(mesh);
  std::vector<Triplet> trip;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Matrix3d K = p1_local_stiffness(mesh.geometry(c), a[c]);
    const auto& t = mesh.cell(c);
    for (int i = 0; i < 3; ++i) {
      const int di = p1.dof(t[i]);
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = p1.dof(t[j]);
        if (dj >= 0) trip.emplace_back(di, dj, K(i, j));
      }
    }
  }
  SparseMatrix A(p1.size(), p1.size());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

/// Local L2 projections of the P1 hats onto V(T) and M(F). Cell rows take the
/// mean of each hat (1/3); face rows reproduce the linear trace exactly for
/// k = 1 and take its edge mean (1/2) for k = 0.
inline SparseMatrix build_prolongation(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg) {
  detail::check_space(mesh, dofs, cfg);
  const P1Space p1(mesh);
  std::vector<Triplet> trip;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    for (int v : mesh.cell(c)) {
      const int d = p1.dof(v);
      if (d >= 0) trip.emplace_back(static_cast<int>(dofs.cell_dof(c)), d, 1.0 / 3.0);
    }
  }
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge(e).boundary) continue;
    const auto& ev = mesh.edge(e).v;
    for (int k = 0; k < 2; ++k) {
      const int d = p1.dof(ev[k]);
      if (d < 0) continue;
      if (cfg.degree == 0) {
        trip.emplace_back(static_cast<int>(dofs.edge_dof(e)), d, 0.5);
      } else {
        trip.emplace_back(static_cast<int>(dofs.edge_dof(e, k)), d, 1.0);
      }
    }
  }
  SparseMatrix P(dofs.size(), p1.size());
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

inline SparseMatrix galerkin_coarse(const SparseMatrix& A, const SparseMatrix& P) {
  if (A.rows() != A.cols() || A.cols() != P.rows())
    throw DimensionMismatchError("galerkin_coarse: incompatible shapes");
  const SparseMatrix Pt = P.transpose();
  SparseMatrix C = Pt * (A * P);
  C.makeCompressed();
  return C;
}

/// P_h as a matrix from face coefficients (length N) to P1 coefficients:
/// the arithmetic mean of m_T(lambda) over the vertex patch, with boundary
/// edges contributing zero.
inline SparseMatrix build_vertex_average(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg) {
  detail::check_space(mesh, dofs, cfg);
  const P1Space p1(mesh);
  const long M = static_cast<long>(dofs.num_interior());
  const Eigen::RowVectorXd mrow = cell_mean_row(cfg);
  std::vector<Triplet> trip;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const int d = p1.dof(v);
    if (d < 0) continue;
    const auto patch = mesh.vertex_patch(v);
    const double w = 1.0 / static_cast<double>(patch.size());
    for (int c : patch) {
      const auto ld = dofs.local_dofs(mesh, c);
      for (int j = 0; j < mrow.size(); ++j) {
        const long g = ld[cfg.dim_v() + j];
        if (g >= 0) trip.emplace_back(d, static_cast<int>(g - M), w * mrow[j]);
      }
    }
  }
  SparseMatrix Ph(p1.size(), dofs.num_face());
  Ph.setFromTriplets(trip.begin(), trip.end());
  Ph.makeCompressed();
  return Ph;
}

/// Nodal interpolation of coarse P1 functions onto the once-refined mesh,
/// restricted to interior vertices on both levels.
inline SparseMatrix p1_refinement_transfer(const Mesh& coarse, const Mesh& fine) {
  if (fine.vertex_parents().size() != fine.num_vertices() || fine.level() != coarse.level() + 1)
    throw InvalidInputError("fine mesh is not a refinement of the coarse mesh");
  const P1Space pc(coarse), pf(fine);
  std::vector<Triplet> trip;
  for (std::size_t v = 0; v < fine.num_vertices(); ++v) {
    const int df = pf.dof(v);
    if (df < 0) continue;
    const auto [a, b] = fine.vertex_parents()[v];
    if (a == b) {
      if (pc.dof(a) >= 0) trip.emplace_back(df, pc.dof(a), 1.0);
    } else {
      if (pc.dof(a) >= 0) trip.emplace_back(df, pc.dof(a), 0.5);
      if (pc.dof(b) >= 0) trip.emplace_back(df, pc.dof(b), 0.5);
    }
  }
  SparseMatrix T(pf.size(), pc.size());
  T.setFromTriplets(trip.begin(), trip.end());
  T.makeCompressed();
  return T;
}

}  // namespace wg
