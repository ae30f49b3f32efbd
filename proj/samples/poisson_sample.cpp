// Solves -div grad u = 2 pi^2 sin(pi x) sin(pi y) on the unit square with the
// two-level preconditioner and prints the cell-average error per level.

#include <cmath>
#include <iostream>
#include <numbers>

#include "wg/experiments.hpp"
#include "wg/quadrature.hpp"

int main() {
  using namespace wg;
  const double pi = std::numbers::pi;
  auto u = [pi](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  auto f = [&](const Point& x) { return 2 * pi * pi * u(x); };

  const auto h = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 4);
  const SpaceConfig cfg = SpaceConfig::type2();
  const auto q = triangle_quadrature(4);
  std::cout << "level,unknowns,iterations,cell_error\n";
  for (const Mesh& m : h) {
    const Problem p(m, cfg, CoefficientField::constant(m));
    const TwoLevelPreconditioner B(p.system.A, p.prolongation, {SmootherKind::SGS, 2},
                                   std::make_shared<ExactCoarseSolver>(p.coarse));
    const Vector b = assemble_load(m, p.dofs, cfg, f, 4);
    const IterationReport rep =
        stationary_solve(p.system.A, b, B.as_map(), Vector::Zero(b.size()), 1e-10, 200);

    // L2 distance between the cell unknowns and the cell averages of u
    double err = 0.0;
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const CellGeometry g = m.geometry(c);
      double avg = 0.0;
      for (std::size_t k = 0; k < q.weights.size(); ++k)
        avg += q.weights[k] * u(g.A * Point(q.points[k][1], q.points[k][2]) + g.b);
      avg *= 2.0;  // reference weights sum to 1/2
      const double d = rep.solution[p.dofs.cell_dof(c)] - avg;
      err += g.area * d * d;
    }
    std::cout << m.level() << ',' << p.system.size() << ',' << rep.iterations << ','
              << std::sqrt(err) << '\n';
  }
}
