#pragma once

// Discrete weak gradient on a single cell:
//   (grad_i v, q)_T = -(v, div q)_T,   (grad_b mu, q)_T = <mu, q.n>_dT
// for all q in W(T), together with the mesh-dependent local norms.

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wg/error.hpp"
#include "wg/fespace.hpp"
#include "wg/mesh.hpp"
#include "wg/quadrature.hpp"

namespace wg {

/// Local weak gradient operators. Columns of Gb follow the cell's local edge
/// order, dim_m unknowns per edge in global edge orientation.
struct LocalWeakGradient {
  Eigen::MatrixXd Gi;     // dim_w x dim_v
  Eigen::MatrixXd Gb;     // dim_w x 3*dim_m
  Eigen::MatrixXd Wmass;  // dim_w x dim_w

  /// [Gi Gb], acting on the stacked local vector (v, mu).
  Eigen::MatrixXd combined() const {
    Eigen::MatrixXd G(Gi.rows(), Gi.cols() + Gb.cols());
    G << Gi, Gb;
    return G;
  }
};

namespace detail {

inline const std::array<Point, 3>& reference_vertices() {
  static const std::array<Point, 3> r{Point(0, 0), Point(1, 0), Point(0, 1)};
  return r;
}

// Reference-coordinate endpoints of local edge i in global orientation.
inline std::pair<Point, Point> oriented_edge_ref(const Mesh& mesh, std::size_t c, int i) {
  const auto& t = mesh.cell(c);
  int a = (i + 1) % 3, b = (i + 2) % 3;
  if (t[a] > t[b]) std::swap(a, b);
  return {reference_vertices()[a], reference_vertices()[b]};
}

// (a q_j, q_k)_T over the cell.
inline Eigen::MatrixXd weighted_w_mass(const WBasis& w, const CellGeometry& g,
                                       const Eigen::Matrix2d& a) {
  const auto q = triangle_quadrature(2);
  const int n = w.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  std::vector<Point> vals(n);
  for (std::size_t p = 0; p < q.weights.size(); ++p) {
    const double xi = q.points[p][1], eta = q.points[p][2];
    const double wt = q.weights[p] * 2.0 * g.area;
    for (int j = 0; j < n; ++j) vals[j] = w.value(j, xi, eta);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) M(j, k) += wt * vals[j].dot(a * vals[k]);
  }
  return M;
}

}  // namespace detail

/// Raw local couplings: W(T) Gram, (div q_j, v)_T and <mu, q_j.n>_dT.
struct LocalCoupling {
  Eigen::MatrixXd Wmass;  // dim_w x dim_w
  Eigen::MatrixXd Div;    // dim_w x dim_v
  Eigen::MatrixXd Bnd;    // dim_w x 3*dim_m
};

inline LocalCoupling local_coupling(const Mesh& mesh, std::size_t c, const SpaceConfig& cfg) {
  cfg.require_supported();
  const CellGeometry g = mesh.geometry(c);
  const WBasis w(cfg.family, g.A);
  const int nw = w.size(), nm = cfg.dim_m();

  LocalCoupling out;
  out.Wmass = detail::weighted_w_mass(w, g, Eigen::Matrix2d::Identity());
  out.Div.resize(nw, 1);
  for (int j = 0; j < nw; ++j) out.Div(j, 0) = w.divergence(j) * g.area;

  out.Bnd = Eigen::MatrixXd::Zero(nw, 3 * nm);
  const auto eq = edge_quadrature(2);
  for (int i = 0; i < 3; ++i) {
    const auto [r0, r1] = detail::oriented_edge_ref(mesh, c, i);
    for (std::size_t p = 0; p < eq.weights.size(); ++p) {
      const double t = eq.points[p];
      const Point r = r0 + t * (r1 - r0);
      const double wt = eq.weights[p] * g.edge_length[i];
      for (int j = 0; j < nw; ++j) {
        const double qn = w.value(j, r.x(), r.y()).dot(g.normal[i]);
        for (int a = 0; a < nm; ++a)
          out.Bnd(j, i * nm + a) += wt * qn * face_basis(cfg.degree, a, t);
      }
    }
  }
  return out;
}

inline LocalWeakGradient local_weak_gradient(const Mesh& mesh, std::size_t c,
                                             const SpaceConfig& cfg) {
  LocalCoupling k = local_coupling(mesh, c, cfg);
  const Eigen::LLT<Eigen::MatrixXd> llt(k.Wmass);
  if (llt.info() != Eigen::Success)
    throw InternalConsistencyError("W(T) mass matrix is singular on cell " + std::to_string(c));
  LocalWeakGradient out;
  out.Gi = -llt.solve(k.Div);
  out.Gb = llt.solve(k.Bnd);
  out.Wmass = std::move(k.Wmass);
  return out;
}

/// Row vector r with m_T(mu) = r . mu for local face coefficients mu.
inline Eigen::RowVectorXd cell_mean_row(const SpaceConfig& cfg) {
  // the mean of a face basis function over its edge is 1 (k = 0) or 1/2 (k = 1)
  const int nm = cfg.dim_m();
  return Eigen::RowVectorXd::Constant(3 * nm, 1.0 / (3.0 * nm));
}

/// m_T(mu): average over the three edges of the edge mean of mu.
inline double cell_mean(const SpaceConfig& cfg, const Eigen::VectorXd& mu) {
  if (mu.size() != 3 * cfg.dim_m()) throw DimensionMismatchError("cell_mean: wrong size");
  return cell_mean_row(cfg).dot(mu);
}

inline double cell_mean(const Mesh&, std::size_t, const SpaceConfig& cfg,
                        const Eigen::VectorXd& mu) {
  return cell_mean(cfg, mu);
}

/// Block-diagonal L2(dT) Gram matrix of the local face unknowns.
inline Eigen::MatrixXd boundary_mass(const CellGeometry& g, const SpaceConfig& cfg) {
  const int nm = cfg.dim_m();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3 * nm, 3 * nm);
  const Eigen::MatrixXd unit = unit_edge_mass(cfg);
  for (int i = 0; i < 3; ++i) B.block(i * nm, i * nm, nm, nm) = g.edge_length[i] * unit;
  return B;
}

struct LocalNorms {
  double mu_h = 0.0;      // h_T^{1/2} |mu|_{L2(dT)}
  double mu_semi = 0.0;   // h_T^{-1/2} |mu - m_T(mu)|_{L2(dT)}
  double v_l2 = 0.0;      // |v|_{L2(T)}
  double grad_w = 0.0;    // |grad_w(v, mu)|_{L2(T)}
};

inline LocalNorms local_norms(const Mesh& mesh, std::size_t c, const SpaceConfig& cfg,
                              const Eigen::VectorXd& v, const Eigen::VectorXd& mu) {
  const CellGeometry g = mesh.geometry(c);
  const Eigen::MatrixXd Bm = boundary_mass(g, cfg);
  const double m = cell_mean(cfg, mu);
  const Eigen::VectorXd dev = mu.array() - m;  // face bases sum to one on each edge
  const LocalWeakGradient lw = local_weak_gradient(mesh, c, cfg);
  const Eigen::VectorXd gw = lw.Gi * v + lw.Gb * mu;
  LocalNorms n;
  n.mu_h = std::sqrt(g.h * mu.dot(Bm * mu));
  n.mu_semi = std::sqrt(std::max(0.0, dev.dot(Bm * dev)) / g.h);
  n.v_l2 = std::sqrt(g.area) * v.norm();
  n.grad_w = std::sqrt(std::max(0.0, gw.dot(lw.Wmass * gw)));
  return n;
}

}  // namespace wg
