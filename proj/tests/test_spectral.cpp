#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "wg/experiments.hpp"
#include "wg/spectral.hpp"

using namespace wg;

namespace {

SparseMatrix diag(std::initializer_list<double> d) {
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(d.begin(), static_cast<long>(d.size()));
  return SparseMatrix(Eigen::MatrixXd(v.asDiagonal()).sparseView());
}

EigenOptions force_iterative() {
  EigenOptions o;
  o.dense_threshold = 0;
  return o;
}

BlockSystem system_on(const Mesh& m, const SpaceConfig& cfg) {
  return assemble_system(m, DofMap(m, cfg), cfg, CoefficientField::constant(m));
}

}  // namespace

TEST(ExtremeEigs, DiagonalMatrix) {
  const SparseMatrix A = diag({1.0, 4.0, 2.5});
  for (const EigenOptions& o : {EigenOptions{}, force_iterative()}) {
    const SpectrumReport r = extreme_eigs(A, nullptr, o);
    EXPECT_NEAR(r.lambda_min, 1.0, 1e-12);
    EXPECT_NEAR(r.lambda_max, 4.0, 1e-12);
    EXPECT_NEAR(r.kappa, 4.0, 1e-12);
  }
  EXPECT_EQ(extreme_eigs(A).method, "dense");
  EXPECT_EQ(extreme_eigs(A, nullptr, force_iterative()).method, "iterative");
}

TEST(ExtremeEigs, PencilWithItselfHasUnitCondition) {
  const BlockSystem s = system_on(build_initial_mesh(MeshPattern::CrissCross, 2), SpaceConfig::type2());
  for (const EigenOptions& o : {EigenOptions{}, force_iterative()}) {
    const SpectrumReport r = extreme_eigs(s.A, &s.A, o);
    EXPECT_NEAR(r.lambda_min, 1.0, 1e-10);
    EXPECT_NEAR(r.kappa, 1.0, 1e-10);
  }
}

TEST(ExtremeEigs, DenseAndIterativeAgree) {
  const Mesh m = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 1).back();
  for (const SpaceConfig& cfg : {SpaceConfig::type1(), SpaceConfig::type2()}) {
    const BlockSystem s = system_on(m, cfg);
    for (const SparseMatrix* M : {static_cast<const SparseMatrix*>(nullptr), &s.gram}) {
      const SpectrumReport d = extreme_eigs(s.A, M);
      const SpectrumReport it = extreme_eigs(s.A, M, force_iterative());
      EXPECT_NEAR(it.lambda_min / d.lambda_min, 1.0, 1e-6);
      EXPECT_NEAR(it.lambda_max / d.lambda_max, 1.0, 1e-6);
      EXPECT_LT(it.residual_min, 1e-6 * it.lambda_max);
    }
  }
}

TEST(ExtremeEigs, RayleighQuotientsAreSandwiched) {
  const Mesh m = refine_uniform(build_initial_mesh(MeshPattern::CrissCross, 2));
  const BlockSystem s = system_on(m, SpaceConfig::type2());
  const SpectrumReport r = extreme_eigs(s.A, &s.gram);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    Vector x(s.size());
    for (auto& v : x) v = g(rng);
    const double q = x.dot(s.A * x) / x.dot(s.gram * x);
    EXPECT_GE(q, r.lambda_min * (1 - 1e-12));
    EXPECT_LE(q, r.lambda_max * (1 + 1e-12));
  }
}

TEST(ExtremeEigs, RejectsIndefiniteAndMismatched) {
  const SparseMatrix A = diag({1.0, -2.0});
  EXPECT_THROW(extreme_eigs(A), InvalidInputError);
  EXPECT_THROW(extreme_eigs(A, nullptr, force_iterative()), InvalidInputError);
  const SparseMatrix B = diag({1.0, 2.0, 3.0});
  EXPECT_THROW(extreme_eigs(B, &A), DimensionMismatchError);
}

TEST(Lanczos, LargestOfKnownSpectrum) {
  const int n = 500;
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = 1.0 + i * (i % 7 == 0 ? 0.01 : 0.002);
  const RitzPair p = lanczos_largest([&](const Vector& x) { return Vector(d.cwiseProduct(x)); }, n, {});
  EXPECT_NEAR(p.value, d.maxCoeff(), 1e-9);
}

// Reference values for the unit square cut by both diagonals (criss-cross, n = 1).
TEST(ConditionStudy, CrissCrossOneReferenceValues) {
  const auto h = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 1), 5);
  const auto rows = condition_study(h, SpaceConfig::type2());
  const double lmax[] = {27.63, 33.31, 33.46, 33.47, 33.47, 33.47};
  const double kappa[] = {50.1, 121.1, 444.8, 1746.7, 6954.6, 27792};
  const double lmin[] = {0.55, 0.28, 0.075, 0.019, 0.0048, 0.0012};
  for (int l = 0; l <= 5; ++l) {
    EXPECT_NEAR(rows[l].matrix.lambda_max, lmax[l], 0.006) << l;
    EXPECT_NEAR(rows[l].matrix.kappa / kappa[l], 1.0, 1e-3) << l;
    EXPECT_NEAR(rows[l].matrix.lambda_min / lmin[l], 1.0, 0.02) << l;
  }
}

TEST(ConditionStudy, CsvAndScalingChecks) {
  const auto h = build_hierarchy(build_initial_mesh(MeshPattern::CrissCross, 2), 3);
  const auto rows = condition_study(h, SpaceConfig::type1());
  EXPECT_TRUE(check_condition_study(rows).empty());
  std::ostringstream os;
  write_condition_csv(os, rows);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(text.rfind("level,h,unknowns,lambda_min,lambda_max,kappa,", 0), 0u);
  EXPECT_DOUBLE_EQ(relative_drift(2.0, 2.5), 0.25);
}
