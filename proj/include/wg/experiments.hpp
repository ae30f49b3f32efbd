#pragma once

// Level sweeps over a mesh hierarchy: conditioning tables and iteration
// counts of the two-level and multilevel stationary methods.

#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "wg/assemble.hpp"
#include "wg/coarse.hpp"
#include "wg/fespace.hpp"
#include "wg/mesh.hpp"
#include "wg/solve.hpp"
#include "wg/spectral.hpp"

namespace wg {

/// Everything needed to run solvers on one level.
struct Problem {
  const Mesh* mesh = nullptr;
  SpaceConfig config;
  DofMap dofs;
  BlockSystem system;
  SparseMatrix prolongation;
  SparseMatrix coarse;  // P1 stiffness on the same mesh

  Problem(const Mesh& m, const SpaceConfig& cfg, const CoefficientField& a)
      : mesh(&m),
        config(cfg),
        dofs(m, cfg),
        system(assemble_system(m, dofs, cfg, a)),
        prolongation(build_prolongation(m, dofs, cfg)),
        coarse(assemble_p1_stiffness(m, a)) {}
};

inline std::vector<ConditionRow> condition_study(const std::vector<Mesh>& hierarchy,
                                                 const SpaceConfig& cfg, const Tensor2& a = {},
                                                 const EigenOptions& opt = {}) {
  std::vector<ConditionRow> rows;
  for (const Mesh& m : hierarchy) {
    const DofMap dofs(m, cfg);
    const BlockSystem s = assemble_system(m, dofs, cfg, CoefficientField::constant(m, a));
    ConditionRow r;
    r.level = m.level();
    r.h = m.h_max();
    r.unknowns = s.size();
    r.matrix = extreme_eigs(s.A, nullptr, opt);
    r.pencil = extreme_eigs(s.A, &s.gram, opt);
    rows.push_back(r);
  }
  return rows;
}

struct SolveSettings {
  SmootherSpec smoother;
  CoarseKind coarse = CoarseKind::Exact;
  SmootherSpec coarse_smoother;  // V-cycle smoothing
  double tol = 1e-8;
  int max_iters = 500;
  int rho_iters = 60;  // Lanczos steps for the contraction estimate, 0 to skip
  std::uint64_t seed = 1;
};

struct SolveRow {
  int level = 0;
  int m = 1;
  SmootherKind smoother = SmootherKind::SGS;
  CoarseKind coarse = CoarseKind::Exact;
  int iterations = 0;
  bool converged = false;
  double avg_rate = 0.0;
  double rho_hat = std::nan("");
};

inline std::shared_ptr<const CoarseSolver> make_coarse_solver(const std::vector<Mesh>& hierarchy,
                                                              std::size_t level,
                                                              const Problem& prob,
                                                              const SolveSettings& s,
                                                              const Tensor2& a) {
  if (s.coarse == CoarseKind::Exact) return std::make_shared<ExactCoarseSolver>(prob.coarse);
  const std::vector<Mesh> nested(hierarchy.begin(), hierarchy.begin() + level + 1);
  return build_vcycle(nested, a, s.coarse_smoother);
}

/// Runs the stationary iteration on hierarchy[level] with b = 0 and x0 = ones,
/// stopping once the energy norm of the error is reduced by s.tol.
inline SolveRow run_stationary_level(const std::vector<Mesh>& hierarchy, std::size_t level,
                                     const SpaceConfig& cfg, const SolveSettings& s,
                                     const Tensor2& a = {}) {
  const Mesh& mesh = hierarchy.at(level);
  const Problem prob(mesh, cfg, CoefficientField::constant(mesh, a));
  const auto coarse = make_coarse_solver(hierarchy, level, prob, s, a);
  const TwoLevelPreconditioner B(prob.system.A, prob.prolongation, s.smoother, coarse);
  const Vector b = Vector::Zero(prob.system.size());
  const Vector x0 = Vector::Ones(prob.system.size());
  const IterationReport rep = stationary_solve(prob.system.A, b, B.as_map(), x0, s.tol, s.max_iters);

  SolveRow row;
  row.level = mesh.level();
  row.m = s.smoother.sweeps;
  row.smoother = s.smoother.kind;
  row.coarse = s.coarse;
  row.iterations = rep.iterations;
  row.converged = rep.converged;
  row.avg_rate = rep.avg_rate;
  if (s.rho_iters > 0)
    row.rho_hat = estimate_contraction(prob.system.A, B.as_map(), s.rho_iters, s.seed).rho;
  return row;
}

inline void write_solve_csv(std::ostream& os, const std::vector<SolveRow>& rows) {
  os << "level,m,smoother,coarse,iterations,avg_rate,rho_hat\n";
  for (const auto& r : rows) {
    os << r.level << ',' << r.m << ',' << to_string(r.smoother) << ',' << to_string(r.coarse) << ','
       << r.iterations << ',' << format_double(r.avg_rate) << ','
       << (std::isnan(r.rho_hat) ? std::string("nan") : format_double(r.rho_hat)) << '\n';
  }
}

}  // namespace wg
