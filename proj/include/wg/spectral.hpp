#pragma once

// Extreme eigenvalues and condition numbers of A x = lambda x or of the
// pencil A x = lambda M x. Small problems use a dense symmetric solver;
// larger ones use restarted Lanczos for lambda_max and Lanczos on the
// inverse (one sparse Cholesky factorization) for lambda_min.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "wg/assemble.hpp"
#include "wg/error.hpp"
#include "wg/mesh.hpp"

namespace wg {

struct SpectrumReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  std::string method;  // "dense" or "iterative"
  double residual_min = 0.0;  // |A x - lambda M x| / |x|
  double residual_max = 0.0;
};

struct EigenOptions {
  std::size_t dense_threshold = 2000;
  double tol = 1e-8;       // Lanczos Ritz residual relative to the Ritz value
  double value_tol = 1e-13;  // or: Ritz value unchanged to this relative accuracy
  int krylov_dim = 60;
  int max_restarts = 200;
  std::uint64_t seed = 12345;
};

struct RitzPair {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;
  int restarts = 0;
};

/// Largest eigenpair of a symmetric operator by thick-restart Lanczos with
/// full reorthogonalization. After each cycle the leading half of the Ritz
/// vectors is kept, together with their images under op.
inline RitzPair lanczos_largest(const std::function<Vector(const Vector&)>& op, Eigen::Index n,
                                const EigenOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  Vector v(n);
  for (auto& x : v) x = g(rng);
  v.normalize();

  const Eigen::Index m = std::min<Eigen::Index>(std::max(opt.krylov_dim, 2), n);
  const Eigen::Index keep = std::max<Eigen::Index>(1, m / 2);
  Eigen::MatrixXd V(n, m), W(n, m);
  V.col(0) = v;
  W.col(0) = op(v);
  Eigen::Index k = 1;
  RitzPair best;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    bool exhausted = false;
    while (k < m) {
      Vector w = W.col(k - 1);
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(k) * (V.leftCols(k).transpose() * w);
      const double nb = w.norm();
      if (nb <= 1e-12 * W.col(k - 1).norm()) {
        exhausted = true;
        break;
      }
      V.col(k) = w / nb;
      W.col(k) = op(V.col(k));
      ++k;
    }
    Eigen::MatrixXd H = V.leftCols(k).transpose() * W.leftCols(k);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double theta = es.eigenvalues()[k - 1];
    const Vector y = es.eigenvectors().col(k - 1);
    const double prev = best.value;
    best.value = theta;
    best.vector = V.leftCols(k) * y;
    best.residual = (W.leftCols(k) * y - theta * best.vector).norm();
    best.restarts = restart;
    if (best.residual <= opt.tol * std::abs(theta) || exhausted || k == n) break;
    if (restart > 0 && std::abs(theta - prev) <= opt.value_tol * std::abs(theta)) break;

    const Eigen::Index p = std::min(keep, k - 1);
    const Eigen::MatrixXd S = es.eigenvectors().rightCols(p);
    const Eigen::MatrixXd Vk = V.leftCols(k) * S;
    const Eigen::MatrixXd Wk = W.leftCols(k) * S;
    V.leftCols(p) = Vk;
    W.leftCols(p) = Wk;
    k = p;
  }
  best.vector.normalize();
  return best;
}

namespace detail {

inline SpectrumReport finish(SpectrumReport r, const char* method) {
  r.method = method;
  if (!(r.lambda_min > 0.0)) throw InvalidInputError("matrix pencil is not positive definite");
  r.kappa = r.lambda_max / r.lambda_min;
  return r;
}

inline double pencil_residual(const SparseMatrix& A, const SparseMatrix* M, const Vector& x,
                              double lambda) {
  const Vector Mx = M ? Vector(*M * x) : x;
  return (A * x - lambda * Mx).norm() / x.norm();
}

}  // namespace detail

inline SpectrumReport extreme_eigs_dense(const SparseMatrix& A, const SparseMatrix* M = nullptr) {
  const Eigen::MatrixXd Ad(A);
  SpectrumReport r;
  Eigen::VectorXd lam;
  Eigen::MatrixXd vec;
  if (M) {
    Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(*M)};
    if (llt.info() != Eigen::Success) throw InvalidInputError("mass matrix is not SPD");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Eigen::MatrixXd(*M));
    lam = es.eigenvalues();
    vec = es.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad);
    lam = es.eigenvalues();
    vec = es.eigenvectors();
  }
  const Eigen::Index n = lam.size();
  r.lambda_min = lam[0];
  r.lambda_max = lam[n - 1];
  r.residual_min = detail::pencil_residual(A, M, vec.col(0), r.lambda_min);
  r.residual_max = detail::pencil_residual(A, M, vec.col(n - 1), r.lambda_max);
  return detail::finish(r, "dense");
}

inline SpectrumReport extreme_eigs_iterative(const SparseMatrix& A, const SparseMatrix* M = nullptr,
                                             const EigenOptions& opt = {}) {
  using ColMajor = Eigen::SparseMatrix<double>;
  const Eigen::Index n = A.rows();

  // M = L L^T; the standard problem is C = L^{-1} A L^{-T}.
  Eigen::SimplicialLLT<ColMajor, Eigen::Lower, Eigen::NaturalOrdering<int>> mchol;
  if (M) {
    mchol.compute(ColMajor(*M));
    if (mchol.info() != Eigen::Success) throw InvalidInputError("mass matrix is not SPD");
  }
  const ColMajor L = M ? ColMajor(mchol.matrixL()) : ColMajor();
  auto apply_Linv = [&](const Vector& x) -> Vector {
    return M ? Vector(L.triangularView<Eigen::Lower>().solve(x)) : x;
  };
  auto apply_Linvt = [&](const Vector& x) -> Vector {
    return M ? Vector(L.transpose().triangularView<Eigen::Upper>().solve(x)) : x;
  };
  auto apply_L = [&](const Vector& x) -> Vector { return M ? Vector(L * x) : x; };
  auto apply_Lt = [&](const Vector& x) -> Vector { return M ? Vector(L.transpose() * x) : x; };

  const ColMajor Acol(A);
  Eigen::SimplicialLDLT<ColMajor> achol(Acol);
  if (achol.info() != Eigen::Success || (achol.vectorD().array() <= 0.0).any())
    throw InvalidInputError("matrix is not positive definite (factorization failed)");

  auto C = [&](const Vector& y) -> Vector { return apply_Linv(A * apply_Linvt(y)); };
  auto Cinv = [&](const Vector& y) -> Vector { return apply_Lt(achol.solve(apply_L(y))); };

  const RitzPair top = lanczos_largest(C, n, opt);
  EigenOptions inv_opt = opt;
  inv_opt.seed = opt.seed + 1;
  const RitzPair bottom = lanczos_largest(Cinv, n, inv_opt);

  SpectrumReport r;
  r.lambda_max = top.value;
  r.lambda_min = 1.0 / bottom.value;
  r.residual_max = detail::pencil_residual(A, M, apply_Linvt(top.vector), r.lambda_max);
  r.residual_min =
      detail::pencil_residual(A, M, apply_Linvt(bottom.vector), r.lambda_min);
  return detail::finish(r, "iterative");
}

/// Dense path up to opt.dense_threshold unknowns, iterative above.
inline SpectrumReport extreme_eigs(const SparseMatrix& A, const SparseMatrix* M = nullptr,
                                   const EigenOptions& opt = {}) {
  if (A.rows() != A.cols() || (M && (M->rows() != A.rows() || M->cols() != A.cols())))
    throw DimensionMismatchError("extreme_eigs: shape mismatch");
  if (static_cast<std::size_t>(A.rows()) <= opt.dense_threshold) return extreme_eigs_dense(A, M);
  return extreme_eigs_iterative(A, M, opt);
}

struct ConditionRow {
  int level = 0;
  double h = 0.0;
  std::size_t unknowns = 0;
  SpectrumReport matrix;  // A_h
  SpectrumReport pencil;  // (A_h, Gram)
};

/// Relative level-to-level change |x_{l+1} - x_l| / |x_l|.
inline double relative_drift(double a, double b) { return std::abs(b - a) / std::abs(a); }

inline void write_condition_csv(std::ostream& os, const std::vector<ConditionRow>& rows) {
  os << "level,h,unknowns,lambda_min,lambda_max,kappa,gram_lambda_min,gram_lambda_max,"
        "gram_lambda_max_h2,gram_kappa,method\n";
  for (const auto& r : rows) {
    os << r.level << ',' << format_double(r.h) << ',' << r.unknowns << ','
       << format_double(r.matrix.lambda_min) << ',' << format_double(r.matrix.lambda_max) << ','
       << format_double(r.matrix.kappa) << ',' << format_double(r.pencil.lambda_min) << ','
       << format_double(r.pencil.lambda_max) << ','
       << format_double(r.pencil.lambda_max * r.h * r.h) << ',' << format_double(r.pencil.kappa)
       << ',' << r.matrix.method << '\n';
  }
}

/// Scaling checks on a condition study: lambda_min of the pencil and
/// lambda_max(pencil) * h^2 change by less than `drift` per level beyond
/// level 2. Returns human-readable failures (empty when all hold).
inline std::vector<std::string> check_condition_study(const std::vector<ConditionRow>& rows,
                                                      double drift = 0.10) {
  std::vector<std::string> fails;
  for (const auto& r : rows) {
    if (!(r.matrix.lambda_min > 0.0 && r.matrix.kappa >= 1.0))
      fails.push_back("level " + std::to_string(r.level) + ": invalid spectrum of A_h");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].level < 2) continue;
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (relative_drift(a.pencil.lambda_min, b.pencil.lambda_min) >= drift)
      fails.push_back("pencil lambda_min drift between levels " + std::to_string(a.level) + " and " +
                      std::to_string(b.level));
    if (relative_drift(a.pencil.lambda_max * a.h * a.h, b.pencil.lambda_max * b.h * b.h) >= drift)
      fails.push_back("pencil lambda_max*h^2 drift between levels " + std::to_string(a.level) +
                      " and " + std::to_string(b.level));
  }
  return fails;
}

}  // namespace wg
