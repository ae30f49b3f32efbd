#pragma once

// Local spaces V(T), M(F), W(T) for the two supported weak Galerkin families
// and the global numbering of cell and face unknowns.
//
//   Type1, k = 0 : V = P0, M = P0(F),     W = RT0 = [P0]^2 + P0 x
//   Type2, k = 1 : V = P0, M = P1(F),     W = [P1]^2
//
// Face unknowns use an endpoint Lagrange basis (k = 1) or the constant (k = 0),
// oriented from the lower to the higher global vertex index.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wg/error.hpp"
#include "wg/mesh.hpp"

namespace wg {

enum class Family { Type1, Type2 };

inline Family parse_family(std::string_view s) {
  if (s == "type1" || s == "Type1" || s == "1") return Family::Type1;
  if (s == "type2" || s == "Type2" || s == "2") return Family::Type2;
  throw InvalidInputError("unknown element family '" + std::string(s) + "'");
}

inline std::string to_string(Family f) { return f == Family::Type1 ? "type1" : "type2"; }

struct SpaceConfig {
  Family family = Family::Type2;
  int degree = 1;

  static SpaceConfig type1() { return {Family::Type1, 0}; }
  static SpaceConfig type2() { return {Family::Type2, 1}; }

  bool supported() const {
    return (family == Family::Type1 && degree == 0) || (family == Family::Type2 && degree == 1);
  }
  void require_supported() const {
    if (!supported())
      throw UnsupportedConfigError("unsupported element: " + to_string(family) + " with k=" +
                                   std::to_string(degree));
  }

  int dim_v() const { return 1; }
  int dim_m() const { return degree + 1; }
  int dim_w() const { return family == Family::Type1 ? 3 : 6; }
  /// Local unknowns of one cell: interior first, then the three edges.
  int dim_local() const { return dim_v() + 3 * dim_m(); }

  friend bool operator==(const SpaceConfig&, const SpaceConfig&) = default;
};

/// Face basis value at arc parameter t in [0,1] along the oriented edge.
inline double face_basis(int degree, int j, double t) {
  if (degree == 0) return 1.0;
  return j == 0 ? 1.0 - t : t;
}

/// Gram matrix of the face basis on an edge of unit length.
inline Eigen::MatrixXd unit_edge_mass(const SpaceConfig& cfg) {
  if (cfg.degree == 0) return Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::MatrixXd m(2, 2);
  m << 1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3;
  return m;
}

/// Basis of W(T) on a physical cell. Type2 uses the barycentric coordinates
/// (xi, eta) of the affine map as linear monomials; Type1 uses x - p0 for
/// the RT0 radial part. On the reference triangle these reduce to
/// {(1,0),(x,0),(y,0),(0,1),(0,x),(0,y)} and {(1,0),(0,1),(x,y)}.
class WBasis {
 public:
  WBasis(Family family, const Eigen::Matrix2d& A)
      : family_(family), A_(A), Ainv_(A.inverse()) {}

  int size() const { return family_ == Family::Type1 ? 3 : 6; }

  /// Value at reference coordinates (xi, eta).
  Point value(int j, double xi, double eta) const {
    if (family_ == Family::Type1) {
      switch (j) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        default: return A_ * Point(xi, eta);
      }
    }
    const double s = (j % 3 == 0) ? 1.0 : (j % 3 == 1 ? xi : eta);
    return j < 3 ? Point(s, 0.0) : Point(0.0, s);
  }

  double divergence(int j) const {
    if (family_ == Family::Type1) return j == 2 ? 2.0 : 0.0;
    // d(xi)/dx = Ainv(0,0), d(eta)/dx = Ainv(1,0), d(xi)/dy = Ainv(0,1), d(eta)/dy = Ainv(1,1)
    switch (j) {
      case 1: return Ainv_(0, 0);
      case 2: return Ainv_(1, 0);
      case 4: return Ainv_(0, 1);
      case 5: return Ainv_(1, 1);
      default: return 0.0;
    }
  }

 private:
  Family family_;
  Eigen::Matrix2d A_, Ainv_;
};

/// Reference-element view of the local bases.
struct ReferenceBasis {
  SpaceConfig config;

  int dim_v() const { return config.dim_v(); }
  int dim_m() const { return config.dim_m(); }
  int dim_w() const { return config.dim_w(); }
  double v_value(int, double, double) const { return 1.0; }
  double m_value(int j, double t) const { return face_basis(config.degree, j, t); }
  Point w_value(int j, double x, double y) const { return w().value(j, x, y); }
  double w_divergence(int j) const { return w().divergence(j); }

 private:
  WBasis w() const { return WBasis(config.family, Eigen::Matrix2d::Identity()); }
};

inline ReferenceBasis reference_basis(const SpaceConfig& cfg) {
  cfg.require_supported();
  return ReferenceBasis{cfg};
}

/// Global numbering: cell unknowns occupy [0, M), face unknowns [M, M+N).
/// Boundary edges carry no unknowns.
class DofMap {
 public:
  DofMap(const Mesh& mesh, const SpaceConfig& cfg) : config_(cfg) {
    cfg.require_supported();
    num_cells_ = mesh.num_cells();
    M_ = num_cells_ * cfg.dim_v();
    edge_first_.assign(mesh.num_edges(), -1);
    std::size_t next = M_;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.edge(e).boundary) continue;
      edge_first_[e] = static_cast<long>(next);
      next += cfg.dim_m();
    }
    N_ = next - M_;
  }

  const SpaceConfig& config() const { return config_; }
  std::size_t num_interior() const { return M_; }
  std::size_t num_face() const { return N_; }
  std::size_t size() const { return M_ + N_; }
  std::size_t num_cells() const { return num_cells_; }
  std::size_t num_edges() const { return edge_first_.size(); }

  long cell_dof(std::size_t c, int j = 0) const {
    return static_cast<long>(c) * config_.dim_v() + j;
  }
  /// First face unknown of edge e, or -1 for a boundary edge.
  long edge_dof(std::size_t e, int j = 0) const {
    return edge_first_[e] < 0 ? -1 : edge_first_[e] + j;
  }

  /// Global indices of the local unknowns of cell c (interior first, then edges
  /// in local order with their basis in global orientation); -1 for pinned ones.
  std::vector<long> local_dofs(const Mesh& mesh, std::size_t c) const {
    std::vector<long> d;
    d.reserve(config_.dim_local());
    for (int j = 0; j < config_.dim_v(); ++j) d.push_back(cell_dof(c, j));
    for (int e : mesh.cell_edges(c))
      for (int j = 0; j < config_.dim_m(); ++j) d.push_back(edge_dof(e, j));
    return d;
  }

  /// True if this numbering was built for the given mesh and element.
  bool matches(const Mesh& mesh, const SpaceConfig& cfg) const {
    return cfg == config_ && mesh.num_cells() == num_cells_ && mesh.num_edges() == num_edges();
  }

 private:
  SpaceConfig config_;
  std::size_t num_cells_ = 0;
  std::size_t M_ = 0, N_ = 0;
  std::vector<long> edge_first_;
};

inline DofMap make_space(const Mesh& mesh, const SpaceConfig& cfg) { return DofMap(mesh, cfg); }

}  // namespace wg
