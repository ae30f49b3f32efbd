#pragma once

// Smoothers, the two-level preconditioner B_h, the stationary iteration
//   x_j = x_{j-1} + B_h (b - A x_{j-1}),
// a P1 V-cycle used as an inexact coarse solver, and power-iteration
// estimates of ||I - B_h A||_A and lambda_max(B_h A).

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "wg/assemble.hpp"
#include "wg/coarse.hpp"
#include "wg/error.hpp"
#include "wg/mesh.hpp"

namespace wg {

enum class SmootherKind { SGS, Richardson };
enum class CoarseKind { Exact, VCycle };

inline SmootherKind parse_smoother(std::string_view s) {
  if (s == "sgs") return SmootherKind::SGS;
  if (s == "richardson") return SmootherKind::Richardson;
  throw InvalidInputError("unknown smoother '" + std::string(s) + "'");
}
inline std::string to_string(SmootherKind k) { return k == SmootherKind::SGS ? "sgs" : "richardson"; }

inline CoarseKind parse_coarse(std::string_view s) {
  if (s == "exact") return CoarseKind::Exact;
  if (s == "vcycle") return CoarseKind::VCycle;
  throw InvalidInputError("unknown coarse solver '" + std::string(s) + "'");
}
inline std::string to_string(CoarseKind k) { return k == CoarseKind::Exact ? "exact" : "vcycle"; }

struct SmootherSpec {
  SmootherKind kind = SmootherKind::SGS;
  int sweeps = 1;
  double safety = 1.05;  // richardson: lambda_max overestimate factor
  int power_steps = 30;  // richardson: power iterations for lambda_max
};

using LinearMap = std::function<Vector(const Vector&)>;

/// Largest eigenvalue estimate of an SPD matrix by power iteration from a
/// fixed start vector.
inline double power_lambda_max(const SparseMatrix& A, int steps, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Vector x(A.rows());
  for (auto& v : x) v = u(rng);
  double lam = 0.0;
  for (int k = 0; k < steps; ++k) {
    x.normalize();
    const Vector y = A * x;
    lam = x.dot(y);
    x = y;
  }
  return lam;
}

/// Smoother R acting on residuals: z = R r, z built from zero by `sweeps`
/// symmetric Gauss-Seidel sweep pairs (forward then backward, unknowns in
/// index order) or damped Richardson steps. Both are self-adjoint, so
/// R^t = R.
class Smoother {
 public:
  Smoother(const SparseMatrix& A, const SmootherSpec& spec) : A_(&A), spec_(spec) {
    if (spec.sweeps < 1) throw InvalidInputError("smoother needs at least one sweep");
    diag_ = A.diagonal();
    if (spec.kind == SmootherKind::SGS) {
      for (Eigen::Index i = 0; i < diag_.size(); ++i)
        if (diag_[i] == 0.0) throw InvalidMatrixError("zero diagonal entry in row " + std::to_string(i));
    } else {
      lambda_hat_ = spec.safety * power_lambda_max(A, spec.power_steps);
      if (!(lambda_hat_ > 0.0)) throw InvalidMatrixError("non-positive spectral estimate");
    }
  }

  double damping() const { return 1.0 / lambda_hat_; }
  double lambda_hat() const { return lambda_hat_; }
  const SmootherSpec& spec() const { return spec_; }

  Vector apply(const Vector& r) const {
    Vector z = Vector::Zero(r.size());
    if (spec_.kind == SmootherKind::SGS) {
      for (int s = 0; s < spec_.sweeps; ++s) {
        forward(r, z);
        backward(r, z);
      }
    } else {
      const double w = damping();
      for (int s = 0; s < spec_.sweeps; ++s) z += w * (r - (*A_) * z);
    }
    return z;
  }

  // x <- one Gauss-Seidel pass for A x = r, ascending rows
  void forward(const Vector& r, Vector& x) const {
    const SparseMatrix& A = *A_;
    for (int i = 0; i < A.outerSize(); ++i) x[i] = relax(A, r, x, i);
  }
  void backward(const Vector& r, Vector& x) const {
    const SparseMatrix& A = *A_;
    for (int i = static_cast<int>(A.outerSize()) - 1; i >= 0; --i) x[i] = relax(A, r, x, i);
  }

 private:
  double relax(const SparseMatrix& A, const Vector& r, const Vector& x, int i) const {
    double s = r[i];
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      if (it.col() != i) s -= it.value() * x[it.col()];
    return s / diag_[i];
  }

  const SparseMatrix* A_;
  SmootherSpec spec_;
  Vector diag_;
  double lambda_hat_ = 1.0;
};

inline Vector smoother_apply(const SmootherSpec& spec, const SparseMatrix& A, const Vector& r) {
  return Smoother(A, spec).apply(r);
}

/// Approximate inverse of the P1 coarse operator. Implementations here are
/// self-adjoint, so the same apply() serves both coarse corrections.
class CoarseSolver {
 public:
  virtual ~CoarseSolver() = default;
  virtual Vector apply(const Vector& r) const = 0;
  virtual std::size_t size() const = 0;
};

class ExactCoarseSolver final : public CoarseSolver {
 public:
  explicit ExactCoarseSolver(const SparseMatrix& A) : n_(A.rows()) {
    if (n_ == 0) return;
    ldlt_.compute(Eigen::SparseMatrix<double>(A));
    if (ldlt_.info() != Eigen::Success) throw InvalidMatrixError("coarse operator factorization failed");
  }
  Vector apply(const Vector& r) const override {
    if (n_ == 0) return Vector::Zero(0);
    return ldlt_.solve(r);
  }
  std::size_t size() const override { return n_; }

 private:
  std::size_t n_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// One symmetric V(m,m)-cycle on nested P1 spaces. Level 0 is solved exactly;
/// transfers[l] maps level l-1 to level l.
class VCycleCoarseSolver final : public CoarseSolver {
 public:
  VCycleCoarseSolver(std::vector<SparseMatrix> operators, std::vector<SparseMatrix> transfers,
                     SmootherSpec smoother)
      : ops_(std::move(operators)), transfers_(std::move(transfers)) {
    if (ops_.empty()) throw InvalidInputError("V-cycle needs at least one level");
    if (transfers_.size() != ops_.size())
      throw InvalidInputError("V-cycle needs one transfer per level (entry 0 unused)");
    for (std::size_t l = 1; l < ops_.size(); ++l)
      if (transfers_[l].rows() != ops_[l].rows() || transfers_[l].cols() != ops_[l - 1].rows())
        throw DimensionMismatchError("V-cycle transfer shape mismatch at level " + std::to_string(l));
    bottom_ = std::make_unique<ExactCoarseSolver>(ops_.front());
    for (std::size_t l = 1; l < ops_.size(); ++l) smoothers_.emplace_back(ops_[l], smoother);
  }

  Vector apply(const Vector& r) const override { return cycle(ops_.size() - 1, r); }
  std::size_t size() const override { return ops_.back().rows(); }
  std::size_t levels() const { return ops_.size(); }

 private:
  Vector cycle(std::size_t l, const Vector& r) const {
    if (l == 0) return bottom_->apply(r);
    const SparseMatrix& A = ops_[l];
    const SparseMatrix& T = transfers_[l];
    const Smoother& S = smoothers_[l - 1];
    Vector x = S.apply(r);
    const Vector rc = T.transpose() * (r - A * x);
    x += T * cycle(l - 1, rc);
    x += S.apply(r - A * x);
    return x;
  }

  std::vector<SparseMatrix> ops_;
  std::vector<SparseMatrix> transfers_;
  std::vector<Smoother> smoothers_;
  std::unique_ptr<ExactCoarseSolver> bottom_;
};

/// V-cycle over the P1 spaces of a mesh hierarchy with a constant tensor.
inline std::unique_ptr<VCycleCoarseSolver> build_vcycle(const std::vector<Mesh>& hierarchy,
                                                        const Tensor2& a, SmootherSpec smoother) {
  std::vector<SparseMatrix> ops, transfers;
  for (std::size_t l = 0; l < hierarchy.size(); ++l) {
    ops.push_back(assemble_p1_stiffness(hierarchy[l], CoefficientField::constant(hierarchy[l], a)));
    transfers.push_back(l == 0 ? SparseMatrix()
                               : p1_refinement_transfer(hierarchy[l - 1], hierarchy[l]));
  }
  return std::make_unique<VCycleCoarseSolver>(std::move(ops), std::move(transfers), smoother);
}

/// B_h: smooth, coarse-correct, adjoint coarse-correct, adjoint smooth.
class TwoLevelPreconditioner {
 public:
  TwoLevelPreconditioner(const SparseMatrix& A, const SparseMatrix& P, const SmootherSpec& smoother,
                         std::shared_ptr<const CoarseSolver> coarse)
      : A_(&A), P_(&P), Pt_(P.transpose()), smoother_(A, smoother), coarse_(std::move(coarse)) {
    if (!coarse_) throw InvalidInputError("coarse solver not prepared");
    if (P.rows() != A.rows() || static_cast<std::size_t>(P.cols()) != coarse_->size())
      throw DimensionMismatchError("prolongation shape does not match operators");
  }

  Vector apply(const Vector& b) const {
    const SparseMatrix& A = *A_;
    Vector x = smoother_.apply(b);
    x += (*P_) * coarse_->apply(Pt_ * (b - A * x));
    x += (*P_) * coarse_->apply(Pt_ * (b - A * x));
    x += smoother_.apply(b - A * x);
    return x;
  }

  LinearMap as_map() const {
    return [this](const Vector& r) { return apply(r); };
  }
  const Smoother& smoother() const { return smoother_; }

 private:
  const SparseMatrix* A_;
  const SparseMatrix* P_;
  SparseMatrix Pt_;
  Smoother smoother_;
  std::shared_ptr<const CoarseSolver> coarse_;
};

inline double energy_norm(const SparseMatrix& A, const Vector& x) {
  return std::sqrt(std::max(0.0, x.dot(A * x)));
}

struct IterationReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // measured norm, entry 0 is the initial value
  double final_reduction = 1.0;
  double avg_rate = 0.0;
  Vector solution;
};

/// Runs the stationary iteration until the measured norm drops below
/// tol * initial. With b = 0 (or a given exact solution) the measure is the
/// energy norm of the error; otherwise sqrt(r' B r) of the residual.
inline IterationReport stationary_solve(const SparseMatrix& A, const Vector& b, const LinearMap& B,
                                        const Vector& x0, double tol, int max_iters,
                                        std::optional<Vector> exact = std::nullopt) {
  if (A.rows() != b.size() || x0.size() != b.size())
    throw DimensionMismatchError("stationary_solve: inconsistent sizes");
  if (!exact && b.isZero(0.0)) exact = Vector::Zero(b.size());

  IterationReport rep;
  Vector x = x0;
  Vector r = b - A * x;
  Vector z = B(r);
  auto measure = [&]() {
    return exact ? energy_norm(A, x - *exact) : std::sqrt(std::max(0.0, r.dot(z)));
  };
  const double initial = measure();
  rep.history.push_back(initial);
  if (initial == 0.0) {
    rep.converged = true;
    rep.final_reduction = 0.0;
    rep.solution = x;
    return rep;
  }
  while (rep.iterations < max_iters) {
    x += z;
    r = b - A * x;
    z = B(r);
    ++rep.iterations;
    const double m = measure();
    rep.history.push_back(m);
    if (m <= tol * initial) {
      rep.converged = true;
      break;
    }
  }
  rep.final_reduction = rep.history.back() / initial;
  rep.avg_rate = rep.final_reduction > 0.0 ? std::pow(rep.final_reduction, 1.0 / rep.iterations) : 0.0;
  rep.solution = std::move(x);
  return rep;
}

struct ContractionEstimate {
  double rho = 0.0;
  int iterations = 0;
};

namespace detail {

inline Vector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

// Lanczos in the A inner product for an operator that is self-adjoint in
// that inner product; returns the largest Ritz value. Full
// reorthogonalization keeps the basis A-orthonormal; the loop stops when the
// Ritz residual bound beta * |s_k| falls below rtol * theta or the Krylov
// space is exhausted.
inline ContractionEstimate a_lanczos_largest(const SparseMatrix& A, const LinearMap& op, int iters,
                                             std::uint64_t seed, double rtol) {
  const Eigen::Index n = A.rows();
  std::vector<Vector> V, AV;
  Vector x = random_vector(n, seed);
  const double nx = energy_norm(A, x);
  ContractionEstimate est;
  if (nx == 0.0) return est;
  V.push_back(x / nx);
  AV.push_back(A * V.back());
  std::vector<double> alpha, beta;
  for (int k = 0; k < iters; ++k) {
    Vector w = op(V.back());
    alpha.push_back(w.dot(AV.back()));
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < V.size(); ++j) w -= w.dot(AV[j]) * V[j];
    const double b = energy_norm(A, w);

    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    est.rho = es.eigenvalues()[m - 1];
    est.iterations = k + 1;
    const double bound = b * std::abs(es.eigenvectors()(m - 1, m - 1));
    if (bound <= rtol * std::abs(est.rho) || b <= 1e-14 * std::abs(alpha.back()) || m == n) break;
    beta.push_back(b);
    V.push_back(w / b);
    AV.push_back(A * V.back());
  }
  return est;
}

}  // namespace detail

/// rho = ||I - B A||_A as the largest eigenvalue of E = I - B A, which is
/// self-adjoint and positive semidefinite in the A inner product.
inline ContractionEstimate estimate_contraction(const SparseMatrix& A, const LinearMap& B, int iters,
                                                std::uint64_t seed = 1, double rtol = 1e-10) {
  auto E = [&](const Vector& x) -> Vector { return x - B(A * x); };
  ContractionEstimate est = detail::a_lanczos_largest(A, E, iters, seed, rtol);
  if (!(est.rho < 1.0))
    throw PreconditionerDefectError("contraction estimate " + std::to_string(est.rho) + " >= 1");
  return est;
}

/// lambda_max(B A) by Lanczos in the A inner product.
inline double estimate_lambda_max_BA(const SparseMatrix& A, const LinearMap& B, int iters,
                                     std::uint64_t seed = 2, double rtol = 1e-10) {
  auto BA = [&](const Vector& x) -> Vector { return B(A * x); };
  return detail::a_lanczos_largest(A, BA, iters, seed, rtol).rho;
}

}  // namespace wg
