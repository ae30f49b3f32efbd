#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wg/assemble.hpp"
#include "wg/coarse.hpp"

using namespace wg;

namespace {

CoefficientField random_field(const Mesh& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0), off(-0.3, 0.3);
  CoefficientField a;
  for (std::size_t c = 0; c < m.num_cells(); ++c) a.tensors.push_back({u(rng), off(rng), u(rng)});
  return a;
}

std::vector<Eigen::Matrix2d> matrices(const CoefficientField& a) {
  std::vector<Eigen::Matrix2d> out;
  for (const auto& t : a.tensors) out.push_back(t.matrix());
  return out;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

const SpaceConfig kConfigs[] = {SpaceConfig::type1(), SpaceConfig::type2()};

}  // namespace

TEST(Assemble, TwoTriangleGolden) {
  const Mesh m = build_initial_mesh(MeshPattern::TwoTriangle);
  const SpaceConfig cfg = SpaceConfig::type2();
  const DofMap d(m, cfg);
  const BlockSystem s = assemble_system(m, d, cfg, CoefficientField::constant(m));
  ASSERT_EQ(s.size(), 4u);
  const Eigen::MatrixXd ref =
      oracle::global_stiffness(m, true, 1, std::vector<Eigen::Matrix2d>(2, Eigen::Matrix2d::Identity()));
  const Eigen::MatrixXd A(s.A);
  EXPECT_LT((A - ref).cwiseAbs().maxCoeff(), 1e-13);
  // the two cells are congruent, so their diagonal entries agree
  EXPECT_NEAR(A(0, 0), A(1, 1), 1e-13);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues()[0], 0.0);
}

TEST(Assemble, MatchesOracleWithPiecewiseAnisotropicCoefficient) {
  const auto h = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 1);
  for (const Mesh& m : h) {
    const CoefficientField a = random_field(m, 3);
    for (const SpaceConfig& cfg : kConfigs) {
      const DofMap d(m, cfg);
      const BlockSystem s = assemble_system(m, d, cfg, a);
      const Eigen::MatrixXd ref =
          oracle::global_stiffness(m, cfg.family == Family::Type2, cfg.degree, matrices(a));
      EXPECT_LT(rel_diff(Eigen::MatrixXd(s.A), ref), 1e-12);
      EXPECT_EQ(s.M + s.N, static_cast<std::size_t>(ref.rows()));
    }
  }
}

TEST(Assemble, SymmetricPositiveDefiniteAndBlocks) {
  const Mesh m = refine_uniform(build_initial_mesh(MeshPattern::CrissCross, 1));
  for (const SpaceConfig& cfg : kConfigs) {
    const DofMap d(m, cfg);
    const BlockSystem s = assemble_system(m, d, cfg, random_field(m, 8));
    const Eigen::MatrixXd A(s.A);
    EXPECT_LT((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-14 * A.cwiseAbs().maxCoeff());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues()[0], 1e-8);
    // cell unknowns couple only through faces
    const Eigen::MatrixXd C(s.C());
    EXPECT_LT((C - Eigen::MatrixXd(C.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(s.B().rows(), static_cast<long>(s.N));
    EXPECT_EQ(s.D().cols(), static_cast<long>(s.N));
  }
}

TEST(Assemble, ScalingByConstant) {
  const Mesh m = build_initial_mesh(MeshPattern::CrissCross, 2);
  const SpaceConfig cfg = SpaceConfig::type2();
  const DofMap d(m, cfg);
  const BlockSystem s1 = assemble_system(m, d, cfg, CoefficientField::constant(m));
  const BlockSystem s3 = assemble_system(m, d, cfg, CoefficientField::constant(m, Tensor2{}.scaled(3.0)));
  EXPECT_LT(max_abs_diff(s3.A, SparseMatrix(3.0 * s1.A)), 1e-13 * max_abs(s3.A));
}

TEST(Assemble, RejectsMismatchedInputs) {
  const Mesh m = build_initial_mesh(MeshPattern::CrissCross, 1);
  const Mesh other = build_initial_mesh(MeshPattern::CrissCross, 2);
  const SpaceConfig cfg = SpaceConfig::type2();
  const DofMap d(other, cfg);
  EXPECT_THROW(assemble_system(m, d, cfg, CoefficientField::constant(m)), DimensionMismatchError);
  const DofMap dm(m, cfg);
  EXPECT_THROW(assemble_system(m, dm, SpaceConfig::type1(), CoefficientField::constant(m)),
               DimensionMismatchError);
  EXPECT_THROW(assemble_system(m, dm, cfg, CoefficientField::constant(m, {1, 3, 1})), InvalidInputError);
}

TEST(Gram, TwoTriangleEntries) {
  const Mesh m = build_initial_mesh(MeshPattern::TwoTriangle);
  const DofMap d(m, SpaceConfig::type2());
  const Eigen::MatrixXd G(assemble_gram(m, d, SpaceConfig::type2()));
  EXPECT_DOUBLE_EQ(G(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(G(0, 1), 0.0);
  // diagonal edge: length sqrt 2, two cells with diameter sqrt 2
  EXPECT_NEAR(G(2, 2), 4.0 / 3, 1e-14);
  EXPECT_NEAR(G(2, 3), 4.0 / 6, 1e-14);
  EXPECT_DOUBLE_EQ(G(0, 2), 0.0);
}

TEST(Load, ConstantAndLinearSources) {
  const Mesh m = build_initial_mesh(MeshPattern::CrissCross, 1);
  const SpaceConfig cfg = SpaceConfig::type2();
  const DofMap d(m, cfg);
  const Vector one = assemble_load(m, d, cfg, [](const Point&) { return 1.0; }, 0);
  const Vector lin = assemble_load(m, d, cfg, [](const Point& x) { return x.x(); }, 1);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const CellGeometry g = m.geometry(c);
    EXPECT_NEAR(one[c], 0.25, 1e-15);
    const Point centroid = g.A * Point(1.0 / 3, 1.0 / 3) + g.b;
    EXPECT_NEAR(lin[c], g.area * centroid.x(), 1e-15);
  }
  EXPECT_EQ(one.tail(d.num_face()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(P1, LocalStiffnessOnReferenceTriangle) {
  const Mesh m = Mesh::from_cells({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}});
  Eigen::Matrix3d expect;
  expect << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  EXPECT_LT((p1_local_stiffness(m.geometry(0), {}) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(P1, CrissCrossOneHasSingleUnknown) {
  const Mesh m = build_initial_mesh(MeshPattern::CrissCross, 1);
  const SparseMatrix K = assemble_p1_stiffness(m, CoefficientField::constant(m));
  ASSERT_EQ(K.rows(), 1);
  // four right angles at the center, each contributing (cot 45 + cot 45) / 2
  EXPECT_NEAR(K.coeff(0, 0), 4.0, 1e-14);
}

TEST(P1, MatchesCotangentFormula) {
  const Mesh m = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 2).back();
  const Eigen::MatrixXd K(assemble_p1_stiffness(m, CoefficientField::constant(m, Tensor2{}.scaled(2.0))));
  EXPECT_LT(rel_diff(K, oracle::p1_cotangent(m, 2.0)), 1e-13);
}

TEST(Prolongation, InterpolatesPiecewiseLinears) {
  const Mesh m = refine_uniform(build_initial_mesh(MeshPattern::CrissCross, 2));
  const P1Space p1(m);
  Vector z(p1.size());
  std::vector<double> nodal(m.num_vertices(), 0.0);
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (p1.dof(v) >= 0) z[p1.dof(v)] = nodal[v] = std::sin(3.0 * m.vertex(v).x()) + m.vertex(v).y();
  for (const SpaceConfig& cfg : kConfigs) {
    const DofMap d(m, cfg);
    const Vector w = build_prolongation(m, d, cfg) * z;
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const auto& t = m.cell(c);
      EXPECT_NEAR(w[d.cell_dof(c)], (nodal[t[0]] + nodal[t[1]] + nodal[t[2]]) / 3.0, 1e-15);
    }
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
      if (m.edge(e).boundary) continue;
      const auto& ev = m.edge(e).v;
      if (cfg.degree == 0) {
        EXPECT_NEAR(w[d.edge_dof(e)], 0.5 * (nodal[ev[0]] + nodal[ev[1]]), 1e-15);
      } else {
        EXPECT_NEAR(w[d.edge_dof(e, 0)], nodal[ev[0]], 1e-15);
        EXPECT_NEAR(w[d.edge_dof(e, 1)], nodal[ev[1]], 1e-15);
      }
    }
  }
}

TEST(Prolongation, GalerkinProductEqualsP1Stiffness) {
  const auto h = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 2);
  for (const Mesh& m : h) {
    for (const SpaceConfig& cfg : kConfigs) {
      const DofMap d(m, cfg);
      const CoefficientField a = random_field(m, 21);
      const BlockSystem s = assemble_system(m, d, cfg, a);
      const SparseMatrix G = galerkin_coarse(s.A, build_prolongation(m, d, cfg));
      const SparseMatrix K = assemble_p1_stiffness(m, a);
      EXPECT_LE(max_abs_diff(G, K), 1e-12 * max_abs(K));
      const SparseMatrix I = galerkin_coarse(assemble_system(m, d, cfg, CoefficientField::constant(m)).A,
                                             build_prolongation(m, d, cfg));
      EXPECT_LT(rel_diff(Eigen::MatrixXd(I), oracle::p1_cotangent(m)), 1e-12);
    }
  }
}

TEST(VertexAverage, SingleInteriorVertex) {
  const Mesh m = build_initial_mesh(MeshPattern::CrissCross, 1);
  const SpaceConfig cfg = SpaceConfig::type2();
  const DofMap d(m, cfg);
  const SparseMatrix Ph = build_vertex_average(m, d, cfg);
  ASSERT_EQ(Ph.rows(), 1);
  // each cell has one pinned boundary edge and two interior edges carrying 1
  const Vector ones = Vector::Ones(d.num_face());
  EXPECT_NEAR((Ph * ones)[0], 2.0 / 3, 1e-15);
}

TEST(VertexAverage, RowsSumToInteriorFraction) {
  const Mesh m = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 1).back();
  for (const SpaceConfig& cfg : kConfigs) {
    const DofMap d(m, cfg);
    const SparseMatrix Ph = build_vertex_average(m, d, cfg);
    const P1Space p1(m);
    const Vector s = Ph * Vector::Ones(d.num_face());
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      if (p1.dof(v) < 0) continue;
      // fraction of patch edges that are interior, weighted per cell
      double expect = 0.0;
      for (int c : m.vertex_patch(v)) {
        int interior = 0;
        for (int e : m.cell_edges(c)) interior += m.edge(e).boundary ? 0 : 1;
        expect += interior / 3.0;
      }
      expect /= static_cast<double>(m.vertex_patch(v).size());
      EXPECT_NEAR(s[p1.dof(v)], expect, 1e-15);
    }
  }
}

TEST(Transfer, NestedInterpolationIsExactForLinears) {
  const auto h = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 1);
  const SparseMatrix T = p1_refinement_transfer(h[0], h[1]);
  const P1Space pc(h[0]), pf(h[1]);
  auto f = [](const Point& x) { return x.x() * (1 - x.x()) + 0.0 * x.y(); };
  Vector zc(pc.size());
  for (std::size_t v = 0; v < h[0].num_vertices(); ++v)
    if (pc.dof(v) >= 0) zc[pc.dof(v)] = f(h[0].vertex(v));
  const Vector zf = T * zc;
  for (std::size_t v = 0; v < h[1].num_vertices(); ++v) {
    if (pf.dof(v) < 0) continue;
    const auto [a, b] = h[1].vertex_parents()[v];
    const double fa = h[0].is_boundary_vertex(a) ? 0.0 : f(h[0].vertex(a));
    const double fb = h[0].is_boundary_vertex(b) ? 0.0 : f(h[0].vertex(b));
    EXPECT_NEAR(zf[pf.dof(v)], 0.5 * (fa + fb), 1e-15);
  }
  EXPECT_THROW(p1_refinement_transfer(h[1], h[0]), InvalidInputError);
}

TEST(Hybrid, SchurComplementRecoversStiffness) {
  const auto h = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 1);
  for (const Mesh& m : h) {
    const DofMap d2(m, SpaceConfig::type2());
    const CoefficientField a = random_field(m, 4);
    const BlockSystem s2 = assemble_system(m, d2, SpaceConfig::type2(), a);
    EXPECT_LE(schur_check(assemble_hybrid(m, d2, SpaceConfig::type2(), a), s2), 1e-12 * max_abs(s2.A));

    CoefficientField scalar;
    for (std::size_t c = 0; c < m.num_cells(); ++c) scalar.tensors.push_back(Tensor2{}.scaled(1.0 + c % 3));
    const DofMap d1(m, SpaceConfig::type1());
    const BlockSystem s1 = assemble_system(m, d1, SpaceConfig::type1(), scalar);
    EXPECT_LE(schur_check(assemble_hybrid(m, d1, SpaceConfig::type1(), scalar), s1), 1e-12 * max_abs(s1.A));
  }
}

TEST(Hybrid, TypeOneWithAnisotropicCoefficientIsNotEquivalent) {
  // a (x - p0) leaves the lowest-order Raviart-Thomas space unless a is scalar
  const Mesh m = build_initial_mesh(MeshPattern::CrissCross, 2);
  const DofMap d(m, SpaceConfig::type1());
  const CoefficientField a = CoefficientField::constant(m, {2.0, 0.5, 1.0});
  const BlockSystem s = assemble_system(m, d, SpaceConfig::type1(), a);
  EXPECT_GT(schur_check(assemble_hybrid(m, d, SpaceConfig::type1(), a), s), 1e-6 * max_abs(s.A));
}

TEST(MatrixMarket, SymmetricLowerTriangle) {
  std::vector<Triplet> t{{0, 0, 2.0}, {1, 0, -1.0}, {0, 1, -1.0}, {1, 1, 0.5}};
  SparseMatrix A(2, 2);
  A.setFromTriplets(t.begin(), t.end());
  std::ostringstream os;
  write_matrix_market(os, A);
  EXPECT_EQ(os.str(),
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n2 1 -1\n2 2 0.5\n");
}
