#pragma once

// Global weak Galerkin system
//     A_h = [ C  B^T ]    C: cell x cell, B: face x cell, D: face x face
//           [ B  D   ]
// the Gram matrix of the mesh-dependent inner product, the load vector, and
// the hybridized three-field system used as an algebraic cross-check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wg/error.hpp"
#include "wg/fespace.hpp"
#include "wg/mesh.hpp"
#include "wg/mesh_io.hpp"
#include "wg/parallel.hpp"
#include "wg/quadrature.hpp"
#include "wg/weakgrad.hpp"

namespace wg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double, int>;

inline double max_abs(const SparseMatrix& A) {
  double m = 0.0;
  for (int k = 0; k < A.nonZeros(); ++k) m = std::max(m, std::abs(A.valuePtr()[k]));
  return m;
}

/// max |A - B| over all entries.
inline double max_abs_diff(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw DimensionMismatchError("max_abs_diff: shape mismatch");
  const SparseMatrix d = A - B;
  return max_abs(d);
}

/// Copy of the sub-block [r0, r0+nr) x [c0, c0+nc).
inline SparseMatrix sparse_block(const SparseMatrix& A, long r0, long c0, long nr, long nc) {
  std::vector<Triplet> t;
  for (long r = r0; r < r0 + nr; ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (it.col() >= c0 && it.col() < c0 + nc)
        t.emplace_back(static_cast<int>(r - r0), static_cast<int>(it.col() - c0), it.value());
  SparseMatrix B(nr, nc);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

struct BlockSystem {
  SparseMatrix A;
  SparseMatrix gram;
  std::size_t M = 0;  // cell unknowns
  std::size_t N = 0;  // face unknowns
  CoefficientField coefficient;

  std::size_t size() const { return M + N; }
  SparseMatrix C() const { return sparse_block(A, 0, 0, M, M); }
  SparseMatrix B() const { return sparse_block(A, M, 0, N, M); }
  SparseMatrix D() const { return sparse_block(A, M, M, N, N); }
};

/// Element matrix G^T (a-weighted W mass) G on the local unknowns (v, mu).
inline Eigen::MatrixXd local_stiffness(const Mesh& mesh, std::size_t c, const SpaceConfig& cfg,
                                       const Tensor2& a) {
  const LocalWeakGradient lw = local_weak_gradient(mesh, c, cfg);
  const CellGeometry g = mesh.geometry(c);
  const Eigen::MatrixXd Ma = detail::weighted_w_mass(WBasis(cfg.family, g.A), g, a.matrix());
  const Eigen::MatrixXd G = lw.combined();
  return G.transpose() * Ma * G;
}

namespace detail {

inline void check_space(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg) {
  cfg.require_supported();
  if (!dofs.matches(mesh, cfg))
    throw DimensionMismatchError("degree-of-freedom map was built for a different mesh or element");
}

// Scatter per-cell dense matrices in cell order, skipping pinned unknowns.
inline SparseMatrix scatter(const Mesh& mesh, const DofMap& dofs,
                            const std::vector<Eigen::MatrixXd>& local) {
  std::vector<Triplet> trip;
  const std::size_t nl = dofs.config().dim_local();
  trip.reserve(mesh.num_cells() * nl * nl);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto ld = dofs.local_dofs(mesh, c);
    for (std::size_t i = 0; i < ld.size(); ++i) {
      if (ld[i] < 0) continue;
      for (std::size_t j = 0; j < ld.size(); ++j) {
        if (ld[j] < 0) continue;
        trip.emplace_back(static_cast<int>(ld[i]), static_cast<int>(ld[j]), local[c](i, j));
      }
    }
  }
  SparseMatrix A(dofs.size(), dofs.size());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

}  // namespace detail

inline SparseMatrix assemble_gram(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg) {
  detail::check_space(mesh, dofs, cfg);
  std::vector<Eigen::MatrixXd> local(mesh.num_cells());
  const int nv = cfg.dim_v(), nm = cfg.dim_m();
  parallel_for(mesh.num_cells(), [&](std::size_t c) {
    const CellGeometry g = mesh.geometry(c);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(cfg.dim_local(), cfg.dim_local());
    L.topLeftCorner(nv, nv).setConstant(g.area);
    L.bottomRightCorner(3 * nm, 3 * nm) = g.h * boundary_mass(g, cfg);
    local[c] = std::move(L);
  });
  SparseMatrix G = detail::scatter(mesh, dofs, local);
  G.prune(0.0);  // keep the block-diagonal pattern
  return G;
}

inline BlockSystem assemble_system(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg,
                                   const CoefficientField& a) {
  detail::check_space(mesh, dofs, cfg);
  a.validate(mesh);
  std::vector<Eigen::MatrixXd> local(mesh.num_cells());
  parallel_for(mesh.num_cells(),
               [&](std::size_t c) { local[c] = local_stiffness(mesh, c, cfg, a[c]); });
  BlockSystem s;
  s.A = detail::scatter(mesh, dofs, local);
  s.gram = assemble_gram(mesh, dofs, cfg);
  s.M = dofs.num_interior();
  s.N = dofs.num_face();
  s.coefficient = a;
  return s;
}

/// (f, phi_i) for cell unknowns, zero for face unknowns. `degree` is the
/// polynomial degree of f (or the quadrature degree to use).
inline Vector assemble_load(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg,
                            const std::function<double(const Point&)>& f, int degree) {
  detail::check_space(mesh, dofs, cfg);
  const auto q = triangle_quadrature(degree);
  Vector b = Vector::Zero(dofs.size());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = mesh.geometry(c);
    double s = 0.0;
    for (std::size_t p = 0; p < q.weights.size(); ++p) {
      const Point x = g.A * Point(q.points[p][1], q.points[p][2]) + g.b;
      s += q.weights[p] * f(x);
    }
    b[dofs.cell_dof(c)] = 2.0 * g.area * s;
  }
  return b;
}

/// Three-field saddle system in (p, u, lambda):
///   K = [ W   Bt ]   W  = (a^{-1} p, q) block diagonal per cell,
///       [ Bt' 0  ]   Bt = [ (u, div q)   -<lambda, q.n> ].
struct HybridSystem {
  SparseMatrix K;
  std::size_t P = 0;  // flux unknowns
  std::size_t M = 0;
  std::size_t N = 0;

  SparseMatrix W() const { return sparse_block(K, 0, 0, P, P); }
  SparseMatrix Bt() const { return sparse_block(K, 0, P, P, M + N); }
};

inline HybridSystem assemble_hybrid(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg,
                                    const CoefficientField& a) {
  detail::check_space(mesh, dofs, cfg);
  a.validate(mesh);
  const int nw = cfg.dim_w();
  HybridSystem h;
  h.P = mesh.num_cells() * nw;
  h.M = dofs.num_interior();
  h.N = dofs.num_face();
  const std::size_t n = h.P + h.M + h.N;
  std::vector<Triplet> trip;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = mesh.geometry(c);
    const LocalCoupling k = local_coupling(mesh, c, cfg);
    const Eigen::MatrixXd Wa =
        detail::weighted_w_mass(WBasis(cfg.family, g.A), g, a[c].matrix().inverse());
    Eigen::MatrixXd Bt(nw, cfg.dim_local());
    Bt << k.Div, -k.Bnd;
    const auto ld = dofs.local_dofs(mesh, c);
    const int p0 = static_cast<int>(c * nw);
    for (int i = 0; i < nw; ++i) {
      for (int j = 0; j < nw; ++j) trip.emplace_back(p0 + i, p0 + j, Wa(i, j));
      for (std::size_t j = 0; j < ld.size(); ++j) {
        if (ld[j] < 0) continue;
        const int col = static_cast<int>(h.P + ld[j]);
        trip.emplace_back(p0 + i, col, Bt(i, j));
        trip.emplace_back(col, p0 + i, Bt(i, j));
      }
    }
  }
  h.K.resize(n, n);
  h.K.setFromTriplets(trip.begin(), trip.end());
  h.K.makeCompressed();
  return h;
}

/// Eliminates the flux from the hybrid system and returns max|S - A_h|.
inline double schur_check(const HybridSystem& h, const BlockSystem& s) {
  if (h.M != s.M || h.N != s.N) throw DimensionMismatchError("schur_check: size mismatch");
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  const ColMajor W = h.W();
  const ColMajor Bt = h.Bt();
  Eigen::SimplicialLLT<ColMajor> llt(W);
  if (llt.info() != Eigen::Success) throw InvalidMatrixError("flux mass block is not SPD");
  const ColMajor X = llt.solve(Bt);
  const SparseMatrix S = SparseMatrix(ColMajor(Bt.transpose()) * X);
  return max_abs_diff(S, s.A);
}

/// MatrixMarket coordinate output; symmetric matrices store the lower triangle.
inline void write_matrix_market(std::ostream& os, const SparseMatrix& A, bool symmetric = true) {
  std::size_t nnz = 0;
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (!symmetric || it.col() <= r) ++nnz;
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  os << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n';
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (!symmetric || it.col() <= r)
        os << r + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value()) << '\n';
}

}  // namespace wg
