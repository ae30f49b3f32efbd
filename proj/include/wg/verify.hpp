#pragma once

// Property suites: exact algebraic identities and level-independence of
// norm-equivalence constants, measured on a mesh hierarchy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "wg/assemble.hpp"
#include "wg/coarse.hpp"
#include "wg/fespace.hpp"
#include "wg/mesh.hpp"
#include "wg/mesh_io.hpp"
#include "wg/spectral.hpp"
#include "wg/weakgrad.hpp"

namespace wg {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

inline void print_check(std::ostream& os, const CheckResult& r) {
  os << (r.passed ? "PASS " : "FAIL ") << r.name << " value=" << format_double(r.value)
     << " limit=" << format_double(r.limit);
  if (!r.detail.empty()) os << " (" << r.detail << ')';
  os << '\n';
}

/// max|P^T A P - K| / max|K| with K the directly assembled P1 stiffness.
inline double galerkin_identity_error(const Mesh& mesh, const SpaceConfig& cfg,
                                      const CoefficientField& a) {
  const DofMap dofs(mesh, cfg);
  const BlockSystem s = assemble_system(mesh, dofs, cfg, a);
  const SparseMatrix G = galerkin_coarse(s.A, build_prolongation(mesh, dofs, cfg));
  const SparseMatrix K = assemble_p1_stiffness(mesh, a);
  const double scale = max_abs(K);
  return scale > 0.0 ? max_abs_diff(G, K) / scale : max_abs(G);
}

/// max|S - A_h| / max|A_h| for the flux-eliminated three-field system.
inline double schur_error(const Mesh& mesh, const SpaceConfig& cfg, const CoefficientField& a) {
  const DofMap dofs(mesh, cfg);
  const BlockSystem s = assemble_system(mesh, dofs, cfg, a);
  return schur_check(assemble_hybrid(mesh, dofs, cfg, a), s) / max_abs(s.A);
}

/// Largest ||grad_w(c, c)||_T over random cells and constants.
inline double constant_annihilation(const SpaceConfig& cfg, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), cu(-10.0, 10.0);
  double worst = 0.0;
  for (int k = 0; k < trials;) {
    std::vector<Point> p{Point(u(rng), u(rng)), Point(u(rng), u(rng)), Point(u(rng), u(rng))};
    const double det = (p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x();
    if (std::abs(det) < 1e-2) continue;
    if (det < 0) std::swap(p[1], p[2]);
    const Mesh m = Mesh::from_cells(std::move(p), {{0, 1, 2}});
    const LocalWeakGradient lw = local_weak_gradient(m, 0, cfg);
    const Eigen::VectorXd g = lw.combined() * Eigen::VectorXd::Constant(cfg.dim_local(), cu(rng));
    worst = std::max(worst, std::sqrt(std::max(0.0, g.dot(lw.Wmass * g))));
    ++k;
  }
  return worst;
}

/// Face-space matrix of |mu|_h^2 = sum_T h_T^{-1} ||mu - m_T(mu)||^2_{dT}.
inline SparseMatrix assemble_face_seminorm(const Mesh& mesh, const DofMap& dofs, const SpaceConfig& cfg) {
  detail::check_space(mesh, dofs, cfg);
  const int nb = 3 * cfg.dim_m();
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(nb, nb) - Eigen::VectorXd::Ones(nb) * cell_mean_row(cfg);
  const long M = static_cast<long>(dofs.num_interior());
  std::vector<Triplet> trip;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = mesh.geometry(c);
    const Eigen::MatrixXd L = J.transpose() * boundary_mass(g, cfg) * J / g.h;
    const auto ld = dofs.local_dofs(mesh, c);
    for (int i = 0; i < nb; ++i) {
      const long gi = ld[cfg.dim_v() + i];
      if (gi < 0) continue;
      for (int j = 0; j < nb; ++j) {
        const long gj = ld[cfg.dim_v() + j];
        if (gj >= 0) trip.emplace_back(static_cast<int>(gi - M), static_cast<int>(gj - M), L(i, j));
      }
    }
  }
  SparseMatrix S(dofs.num_face(), dofs.num_face());
  S.setFromTriplets(trip.begin(), trip.end());
  S.makeCompressed();
  return S;
}

struct Band {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
};

/// Extreme generalized eigenvalues of (|.|_h^2, ||.||_h^2) on the face space;
/// hi is scaled by h^2.
inline Band face_seminorm_band(const Mesh& mesh, const SpaceConfig& cfg, const EigenOptions& opt = {}) {
  const DofMap dofs(mesh, cfg);
  const SparseMatrix S = assemble_face_seminorm(mesh, dofs, cfg);
  const SparseMatrix G = sparse_block(assemble_gram(mesh, dofs, cfg), static_cast<long>(dofs.num_interior()),
                                      static_cast<long>(dofs.num_interior()),
                                      static_cast<long>(dofs.num_face()), static_cast<long>(dofs.num_face()));
  const SpectrumReport r = extreme_eigs(S, &G, opt);
  const double h = mesh.h_max();
  return {r.lambda_min, r.lambda_max * h * h};
}

/// Extreme generalized eigenvalues, over all cells, of
///   ||grad_w(v,mu)||_T^2  versus  h^-2 ||v - m_T(mu)||_T^2 + h^-1 ||mu - m_T(mu)||_dT^2
/// on the complement of the constants (the common kernel).
inline Band local_equivalence_band(const Mesh& mesh, const SpaceConfig& cfg) {
  const int n = cfg.dim_local(), nb = 3 * cfg.dim_m();
  const Eigen::RowVectorXd r = cell_mean_row(cfg);
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(nb, nb) - Eigen::VectorXd::Ones(nb) * r;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
  const Eigen::MatrixXd Z = Eigen::MatrixXd(qr.householderQ()).rightCols(n - 1);
  Band b;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = mesh.geometry(c);
    const Eigen::MatrixXd K = local_stiffness(mesh, c, cfg, {});
    Eigen::RowVectorXd d = Eigen::RowVectorXd::Zero(n);
    d[0] = 1.0;
    d.tail(nb) = -r;
    Eigen::MatrixXd Q = g.area / (g.h * g.h) * d.transpose() * d;
    Q.bottomRightCorner(nb, nb) += J.transpose() * boundary_mass(g, cfg) * J / g.h;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Z.transpose() * K * Z,
                                                                       Z.transpose() * Q * Z);
    b.lo = std::min(b.lo, es.eigenvalues()[0]);
    b.hi = std::max(b.hi, es.eigenvalues()[n - 2]);
  }
  return b;
}

struct ApproximationRatios {
  double approximation = 0.0;  // ||x - I_h P_h lambda||_h / (h ||x||_A)
  double stability = 0.0;      // ||P_h lambda||_{A~} / ||x||_A
};

/// Maxima of the two ratios over `samples` seeded random vectors x = (u, lambda).
inline ApproximationRatios approximation_ratios(const Mesh& mesh, const SpaceConfig& cfg, int samples,
                                                std::uint64_t seed) {
  const DofMap dofs(mesh, cfg);
  const CoefficientField a = CoefficientField::constant(mesh);
  const BlockSystem s = assemble_system(mesh, dofs, cfg, a);
  const SparseMatrix P = build_prolongation(mesh, dofs, cfg);
  const SparseMatrix Ph = build_vertex_average(mesh, dofs, cfg);
  const SparseMatrix K = assemble_p1_stiffness(mesh, a);
  const double h = mesh.h_max();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ApproximationRatios out;
  for (int k = 0; k < samples; ++k) {
    Vector x(s.size());
    for (auto& v : x) v = u(rng);
    const Vector p = Ph * x.tail(s.N);
    const Vector y = x - P * p;
    const double xa = std::sqrt(x.dot(s.A * x));
    out.approximation = std::max(out.approximation, std::sqrt(y.dot(s.gram * y)) / (h * xa));
    out.stability = std::max(out.stability, std::sqrt(std::max(0.0, p.dot(K * p))) / xa);
  }
  return out;
}

/// Largest over smallest entry; 1 means a perfectly level-independent value.
inline double band_ratio(const std::vector<double>& v) {
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  return *mx / *mn;
}

struct VerifyOptions {
  double identity_tol = 1e-12;
  double annihilation_tol = 1e-13;
  double band_tol = 1.1;
  double drift_tol = 0.15;
  int samples = 20;
  std::uint64_t seed = 1;
};

/// Identity and norm-equivalence checks on hierarchy[0..]. Identities use
/// every level; the bands use levels >= 1.
inline std::vector<CheckResult> run_verify_suite(const std::vector<Mesh>& hierarchy,
                                                 const VerifyOptions& opt = {}) {
  std::vector<CheckResult> out;
  const SpaceConfig configs[] = {SpaceConfig::type1(), SpaceConfig::type2()};
  const Tensor2 aniso{3.0, 0.4, 0.5};

  for (const SpaceConfig& cfg : configs) {
    const std::string fam = to_string(cfg.family);
    double g = 0.0, sc = 0.0;
    for (const Mesh& m : hierarchy) {
      g = std::max(g, galerkin_identity_error(m, cfg, CoefficientField::constant(m)));
      g = std::max(g, galerkin_identity_error(m, cfg, CoefficientField::constant(m, aniso)));
      // the Type1 flux space only contains a * (x - p0) for scalar a
      const Tensor2 t = cfg.family == Family::Type2 ? aniso : Tensor2{}.scaled(2.5);
      if (m.num_cells() <= 4096) sc = std::max(sc, schur_error(m, cfg, CoefficientField::constant(m, t)));
    }
    out.push_back({"galerkin-coarse-" + fam, g <= opt.identity_tol, g, opt.identity_tol, "relative"});
    out.push_back({"schur-complement-" + fam, sc <= opt.identity_tol, sc, opt.identity_tol, "relative"});
    const double ann = constant_annihilation(cfg, 100, opt.seed);
    out.push_back({"constant-annihilation-" + fam, ann <= opt.annihilation_tol, ann, opt.annihilation_tol, ""});
  }

  if (hierarchy.size() >= 3) {
    for (const SpaceConfig& cfg : configs) {
      const std::string fam = to_string(cfg.family);
      std::vector<double> lmin, lmax, llo, lhi;
      for (std::size_t l = 1; l < hierarchy.size(); ++l) {
        const Band f = face_seminorm_band(hierarchy[l], cfg);
        lmin.push_back(f.lo);
        lmax.push_back(f.hi);
        const Band e = local_equivalence_band(hierarchy[l], cfg);
        llo.push_back(e.lo);
        lhi.push_back(e.hi);
      }
      for (auto [name, v] : {std::pair{"seminorm-lower-", &lmin}, std::pair{"seminorm-upper-h2-", &lmax},
                             std::pair{"local-equivalence-lower-", &llo},
                             std::pair{"local-equivalence-upper-", &lhi}}) {
        const double r = band_ratio(*v);
        out.push_back({name + fam, r < opt.band_tol, r, opt.band_tol, "max/min over levels"});
      }
      const auto fine = approximation_ratios(hierarchy.back(), cfg, opt.samples, opt.seed);
      const auto prev = approximation_ratios(hierarchy[hierarchy.size() - 2], cfg, opt.samples, opt.seed);
      const double da = relative_drift(prev.approximation, fine.approximation);
      const double ds = relative_drift(prev.stability, fine.stability);
      out.push_back({"approximation-ratio-drift-" + fam, da < opt.drift_tol, da, opt.drift_tol, "two finest levels"});
      out.push_back({"stability-ratio-drift-" + fam, ds < opt.drift_tol, ds, opt.drift_tol, "two finest levels"});
    }
  }
  return out;
}

}  // namespace wg
