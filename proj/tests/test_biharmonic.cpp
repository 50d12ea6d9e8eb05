#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bitension/biharmonic.hpp"
#include "support/perturbed.hpp"

using namespace bitension;
using bitension::testing::perturbed_hypersurface;
using bitension::testing::perturbed_submanifold;
using bitension::testing::random_charts;
using bitension::testing::random_hypersurfaces;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// |tau2| for S^m(r) in S^{m+1}: umbilical with principal curvature
// k = sqrt(1 - r^2) / r, so |A|^2 = m k^2, f = k, grad f = 0 and the
// hypersurface system gives |tau2| = m^2 k |1 - k^2|.
double sphere_tau2(int m, double r) {
  const double k = std::sqrt(1 - r * r) / r;
  return m * m * k * std::abs(1 - k * k);
}

std::vector<PointGeometry> geometries(const ChartSpec& c, int count, std::uint64_t seed = 42) {
  std::vector<PointGeometry> out;
  for (const auto& p : sample_points(c, count, seed)) out.push_back(compute_geometry(c, p));
  return out;
}

std::vector<ChartSpec> biharmonic_catalog() {
  return {catalog_chart("small-hypersphere", {{"m", 2}}),
          catalog_chart("small-hypersphere", {{"m", 3}}),
          catalog_chart("product-spheres"),
          catalog_chart("clifford-torus-b3"),
          catalog_chart("veronese"),
          catalog_chart("generalized-clifford")};
}

}  // namespace

TEST(SphereOracle, FrozenValuesMatchClosedForm) {
  EXPECT_NEAR(sphere_tau2(2, 0.5), 13.856406460551014, 1e-12);
  EXPECT_NEAR(sphere_tau2(2, 0.6), 4.148148148148151, 1e-12);
  EXPECT_NEAR(sphere_tau2(2, 0.9), 1.4828627407381165, 1e-12);
  EXPECT_NEAR(sphere_tau2(3, 0.6), 9.33333333333334, 1e-12);
  EXPECT_NEAR(sphere_tau2(2, kInvSqrt2), 0.0, 1e-14);
  EXPECT_NEAR(sphere_tau2(2, 1.0), 0.0, 1e-14);
}

TEST(Tau2, SmallHypersphereMatchesClosedForm) {
  for (int m : {2, 3, 4}) {
    for (double r : {0.5, 0.6, kInvSqrt2, 0.9, 0.95, 1.0}) {
      const auto c = catalog_chart("small-hypersphere", {{"m", m}, {"r", r}});
      for (const auto& g : geometries(c, 12)) {
        EXPECT_NEAR(tau2_direct(g).norm(), sphere_tau2(m, r), 1e-8 * (1 + sphere_tau2(m, r))) << m << " " << r;
      }
    }
  }
}

TEST(Tau2, SmallHypersphereExamples) {
  for (const auto& g : geometries(catalog_chart("small-hypersphere", {{"m", 3}}), 32)) {
    EXPECT_LT(tau2_direct(g).norm(), 1e-7);
  }
  for (const auto& g : geometries(catalog_chart("small-hypersphere", {{"r", 0.6}}), 32)) {
    EXPECT_GT(tau2_direct(g).norm(), 1e-2);
  }
  for (const auto& g : geometries(catalog_chart("small-hypersphere", {{"r", 1.0}}), 32)) {
    EXPECT_LT(tau2_direct(g).norm(), 1e-9);
    EXPECT_LT(g.H_norm, 1e-12);
  }
}

TEST(Tau2, SphereCurvatureTraceIsMinusMH) {
  for (const auto& c : random_charts(6, 8)) {
    for (const auto& g : geometries(c, 4)) {
      const Vec direct = sphere_curvature_trace(g, g.H);
      EXPECT_LT((direct + g.m * g.H).norm(), 1e-12);
      // Direct R(X, Y)Z = <Y, Z> X - <X, Z> Y on frame vectors.
      Vec sum = Vec::Zero(g.n + 1);
      for (int a = 0; a < g.m; ++a) {
        const Vec e = g.tangent_frame.col(a);
        sum += g.H.dot(e) * e - e.dot(e) * g.H;
      }
      EXPECT_LT((sum - direct).norm(), 1e-14);
    }
  }
}

TEST(Split, DirectAndSplitAgreeEverywhere) {
  auto charts = random_charts(20, 31);
  for (const auto& c : biharmonic_catalog()) charts.push_back(c);
  charts.push_back(catalog_chart("small-hypersphere", {{"r", 0.6}}));
  charts.push_back(catalog_chart("veronese", {{"r", 0.9}}));
  for (const auto& c : charts) {
    for (const auto& g : geometries(c, 8)) {
      const Vec tau = tau2_direct(g);
      const auto s = split_residuals(g);
      EXPECT_LT((tau + g.m * (s.normal + s.tangent)).norm(), 1e-7 * (1 + tau.norm())) << c.name;
      // The tangent part lies in d phi(TM), the normal part in the normal bundle.
      EXPECT_LT((s.tangent - g.tangent_frame * (g.tangent_frame.transpose() * s.tangent)).norm(),
                1e-9 * (1 + s.tangent.norm()))
          << c.name;
      EXPECT_LT((g.tangent_frame.transpose() * s.normal).norm(), 1e-9 * (1 + s.normal.norm())) << c.name;
    }
  }
}

TEST(Split, CatalogExamples) {
  for (const auto& c : {catalog_chart("product-spheres"), catalog_chart("veronese")}) {
    for (const auto& g : geometries(c, 16)) {
      const auto s = split_residuals(g);
      EXPECT_LT(s.normal.norm(), 1e-7) << c.name;
      EXPECT_LT(s.tangent.norm(), 1e-7) << c.name;
    }
  }
  for (const auto& g : geometries(catalog_chart("product-spheres", {{"m1", 1}, {"m2", 1}}), 16)) {
    EXPECT_LT(g.H_norm, 1e-12);
    const auto s = split_residuals(g);
    EXPECT_LT(s.normal.norm(), 1e-9);
    EXPECT_LT(s.tangent.norm(), 1e-9);
  }
}

TEST(Hypersurface, SmallHypersphereSystem) {
  for (const auto& g : geometries(catalog_chart("small-hypersphere", {{"m", 3}}), 16)) {
    const auto r = hypersurface_residuals(g);
    EXPECT_LT(r.res_i, 1e-7);
    EXPECT_LT(r.res_ii, 1e-9);
    EXPECT_NEAR(g.hypersurface->laplacian_f, 0.0, 1e-7);
    EXPECT_NEAR(g.A_norm2, 3.0, 1e-10);
  }
  EXPECT_THROW(hypersurface_residuals(geometries(catalog_chart("veronese"), 1)[0]), GeometryError);
}

TEST(Hypersurface, SystemReconstructsBitensionNorm) {
  // tau2 = -m (normal + tangent) with |normal| = res_i and |tangent| = 2 res_ii.
  for (const auto& c : random_hypersurfaces(10, 12)) {
    for (const auto& g : geometries(c, 8)) {
      const auto r = hypersurface_residuals(g);
      const double tau = tau2_direct(g).norm();
      EXPECT_NEAR(g.m * std::hypot(r.res_i, 2 * r.res_ii), tau, 1e-7 * (1 + tau)) << c.name;
    }
  }
}

TEST(Hypersurface, PerturbedChartsFailTheSystem) {
  for (const auto& c : random_hypersurfaces(6, 13)) {
    double worst = 0;
    for (const auto& g : geometries(c, 16)) {
      const auto r = hypersurface_residuals(g);
      worst = std::max(worst, std::max(r.res_i, r.res_ii));
    }
    EXPECT_GT(worst, 1e-3) << c.name;
  }
}

TEST(Hypersurface, CmcChartsHaveVanishingSecondEquation) {
  for (double r : {0.5, 0.8}) {
    for (const auto& g : geometries(catalog_chart("small-hypersphere", {{"m", 2}, {"r", r}}), 16)) {
      EXPECT_LT(hypersurface_residuals(g).res_ii, 1e-10);
    }
  }
}

TEST(Pmc, GeneralizedCliffordSatisfiesBothSystems) {
  for (const auto& params : {ParamMap{}, ParamMap{{"m1", 1}, {"m2", 2}, {"n1", 2}, {"n2", 3}}}) {
    const auto c = catalog_chart("generalized-clifford", params);
    const auto geos = geometries(c, 16);
    const PmcBlock b = pmc_check(geos);
    EXPECT_LT(b.parallel_norm, 1e-7);
    EXPECT_LT(b.trace_identity, 1e-7);
    ASSERT_TRUE(b.frame_cross && b.frame_norm);
    EXPECT_LT(*b.frame_cross, 1e-7);
    EXPECT_LT(*b.frame_norm, 1e-7);
    EXPECT_TRUE(b.applicable);
    EXPECT_TRUE(b.equivalent);
    EXPECT_TRUE(b.trace_holds && b.frame_holds);
  }
  for (const auto& g : geometries(catalog_chart("generalized-clifford"), 8)) EXPECT_NEAR(g.H_norm, 1.0 / 3.0, 1e-12);
}

TEST(Pmc, CompositionChartsArePseudoUmbilicalWithUnitMeanCurvature) {
  for (const auto& c : {catalog_chart("clifford-torus-b3"), catalog_chart("veronese")}) {
    for (const auto& g : geometries(c, 16)) {
      EXPECT_NEAR(g.A_H().squaredNorm(), g.m * g.H_norm * g.H_norm, 1e-9);
      EXPECT_NEAR(g.H_norm, 1.0, 1e-9);
    }
  }
}

TEST(Pmc, NonParallelMeanCurvatureIsNotApplicable) {
  for (const auto& c : {perturbed_submanifold(3), perturbed_hypersurface(4)}) {
    const PmcBlock b = pmc_check(geometries(c, 16));
    EXPECT_GT(b.parallel_norm, 1e-3) << c.name;
    EXPECT_FALSE(b.applicable);
  }
}

TEST(Pmc, NonBiharmonicPmcChartsFailBothEquations) {
  // S^2(0.6) has parallel H but is not biharmonic: eq. 4 and eq. 5 agree on failure.
  const PmcBlock b = pmc_check(geometries(catalog_chart("small-hypersphere", {{"r", 0.6}}), 8));
  EXPECT_TRUE(b.applicable);
  EXPECT_FALSE(b.trace_holds);
  EXPECT_FALSE(b.frame_holds);
  EXPECT_TRUE(b.equivalent);
}

TEST(Pmc, VanishingMeanCurvatureSkipsTheFrameEquations) {
  const auto geos = geometries(catalog_chart("product-spheres", {{"m1", 1}, {"m2", 1}}), 8);
  const PmcBlock b = pmc_check(geos);
  EXPECT_EQ(b.zero_H_samples, 8);
  EXPECT_FALSE(b.frame_cross.has_value());
  EXPECT_THROW(pmc_check(std::span<const PointGeometry>()), GeometryError);
}

TEST(Verdict, Rules) {
  const Tolerances t;
  EXPECT_EQ(decide_verdict(1e-9, 1e-8, 0.0, t), Verdict::Minimal);
  EXPECT_EQ(decide_verdict(1e-9, 1.0, 1.0, t), Verdict::BiharmonicProper);
  EXPECT_EQ(decide_verdict(1e-9, 1.0, 1e-8, t), Verdict::Inconclusive);
  EXPECT_EQ(decide_verdict(1e-2, 1.0, 1.0, t), Verdict::NotBiharmonic);
  EXPECT_EQ(decide_verdict(1e-4, 1.0, 1.0, t), Verdict::Inconclusive);
  EXPECT_STREQ(to_string(Verdict::BiharmonicProper), "biharmonic-proper");
  EXPECT_EQ(verdict_from_string("not-biharmonic"), Verdict::NotBiharmonic);
}

TEST(Verdict, TighteningPassTolNeverPromotesFailures) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logv(-12, 1);
  for (int i = 0; i < 2000; ++i) {
    const double tau = std::pow(10.0, logv(rng));
    const double hmin = std::pow(10.0, logv(rng));
    const double hmax = hmin * (1 + std::pow(10.0, logv(rng)));
    const Tolerances loose{std::pow(10.0, logv(rng) / 2 - 3), 1e-3};
    if (!(loose.pass_tol < loose.fail_tol)) continue;
    const Tolerances tight{loose.pass_tol / 10, loose.fail_tol};
    const Verdict a = decide_verdict(tau, hmax, hmin, loose);
    const Verdict b = decide_verdict(tau, hmax, hmin, tight);
    if (a == Verdict::NotBiharmonic) {
      EXPECT_NE(b, Verdict::BiharmonicProper) << tau << " " << hmin;
      EXPECT_EQ(b, Verdict::NotBiharmonic);
    }
    if (a == Verdict::Inconclusive && tau >= loose.pass_tol) EXPECT_NE(b, Verdict::BiharmonicProper);
  }
  for (double pass : {1e-6, 1e-8, 1e-10}) {
    EvalOptions opt;
    opt.points = 16;
    opt.tol.pass_tol = pass;
    EXPECT_EQ(evaluate_chart(catalog_chart("small-hypersphere", {{"r", 0.6}}), opt).verdict, Verdict::NotBiharmonic);
  }
}

TEST(Verdict, MinimalImpliesBiharmonic) {
  for (const auto& c : {catalog_chart("small-hypersphere", {{"m", 3}, {"r", 1.0}}),
                        catalog_chart("product-spheres", {{"m1", 1}, {"m2", 1}}),
                        catalog_chart("product-spheres", {{"m1", 2}, {"m2", 1}, {"r1", std::sqrt(2.0 / 3.0)}}),
                        catalog_chart("veronese", {{"r", 1.0}}),
                        catalog_chart("generalized-clifford", {{"m1", 2}, {"m2", 2}})}) {
    const auto rep = evaluate_chart(c);
    if (rep.H_norm.max < 1e-9) {
      EXPECT_LT(rep.tau2_direct_max, 1e-7) << c.name;
      EXPECT_EQ(rep.verdict, Verdict::Minimal) << c.name;
    } else {
      ADD_FAILURE() << c.name << " expected to be minimal, |H| = " << rep.H_norm.max;
    }
  }
}

TEST(Report, CatalogVerdictsAndAgreement) {
  for (const auto& c : biharmonic_catalog()) {
    const auto rep = evaluate_chart(c);
    EXPECT_EQ(rep.verdict, Verdict::BiharmonicProper) << c.name;
    EXPECT_LT(rep.tau2_direct_max, 1e-6) << c.name;
    EXPECT_TRUE(rep.hypersurface_agrees) << c.name;
    EXPECT_EQ(rep.samples_used, 64);
    EXPECT_TRUE(rep.failures.empty());
    EXPECT_LE(rep.tau2_normalized_max, rep.tau2_direct_max);
  }
  for (const auto& c : random_hypersurfaces(6, 40)) {
    const auto rep = evaluate_chart(c, {16, 42, {}, 1});
    EXPECT_TRUE(rep.hypersurface_agrees) << c.name;
    EXPECT_EQ(rep.verdict, Verdict::NotBiharmonic) << c.name;
  }
}

TEST(Report, ParallelEvaluationIsOrderIndependent) {
  const auto c = perturbed_submanifold(11);
  const auto a = evaluate_chart(c, {24, 7, {}, 1});
  const auto b = evaluate_chart(c, {24, 7, {}, 3});
  ASSERT_EQ(a.per_sample.size(), b.per_sample.size());
  for (std::size_t i = 0; i < a.per_sample.size(); ++i) {
    EXPECT_EQ(a.per_sample[i].tau2_direct_norm, b.per_sample[i].tau2_direct_norm);
    EXPECT_EQ(a.per_sample[i].point, b.per_sample[i].point);
  }
  EXPECT_EQ(a.tau2_direct_max, b.tau2_direct_max);
}

TEST(Report, FailingSamplesAreSkippedOrRethrown) {
  const auto half = expression_chart("half", 1, 2, {"sqrt(u1)*cos(u1)", "sqrt(u1)*sin(u1)", "sqrt(1 - u1)"},
                                     {{-0.5, 0.9}}, {}, true);
  const auto rep = evaluate_chart(half, {16, 1, {}, 1});
  EXPECT_GT(rep.failures.size(), 0u);
  EXPECT_GT(rep.samples_used, 0);
  EXPECT_EQ(rep.samples_used + static_cast<int>(rep.failures.size()), 16);

  const auto flat = expression_chart("flat", 2, 3, {"cos(u1)", "sin(u1)", "0", "0"}, {{0, 6}, {0, 6}});
  EXPECT_THROW(evaluate_chart(flat, {8, 1, {}, 1}), GeometryError);
}

TEST(Audit, HypersurfaceQuantities) {
  const auto rep = evaluate_chart(catalog_chart("small-hypersphere", {{"m", 3}}));
  ASSERT_FALSE(rep.audit.empty());
  for (const auto& a : rep.audit) EXPECT_TRUE(a.holds) << a.name;
  EXPECT_NEAR(rep.scalar_curvature.mean, 12.0, 1e-7);

  const auto prod = evaluate_chart(catalog_chart("product-spheres"));
  bool boundary = false;
  for (const auto& a : prod.audit) {
    EXPECT_TRUE(a.holds) << a.name;
    if (a.name == "mean_curvature_gap") {
      EXPECT_NEAR(a.measured, 1.0 / 3.0, 1e-9);
      boundary = a.note.find("boundary") != std::string::npos;
    }
  }
  EXPECT_TRUE(boundary);
}

TEST(Audit, BoundedSecondFundamentalFormValues) {
  auto value = [](const ResidualReport& r) -> std::optional<AuditEntry> {
    for (const auto& a : r.audit)
      if (a.name == "B_norm2_rigidity") return a;
    return std::nullopt;
  };
  const auto torus = value(evaluate_chart(catalog_chart("clifford-torus-b3")));
  ASSERT_TRUE(torus);
  EXPECT_NEAR(torus->measured, 6.0, 1e-6);
  EXPECT_TRUE(torus->holds);
  const auto ver = value(evaluate_chart(catalog_chart("veronese")));
  ASSERT_TRUE(ver);
  EXPECT_NEAR(ver->measured, 14.0 / 3.0, 1e-6);
  EXPECT_TRUE(ver->holds);
}

TEST(Audit, OnlyForProperBiharmonicReports) {
  EXPECT_TRUE(evaluate_chart(catalog_chart("small-hypersphere", {{"r", 0.6}}), {16, 42, {}, 1}).audit.empty());
  EXPECT_TRUE(evaluate_chart(catalog_chart("small-hypersphere", {{"r", 1.0}}), {16, 42, {}, 1}).audit.empty());
}
