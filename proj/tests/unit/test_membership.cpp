#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spcm/core.hpp"
#include "spcm/error.hpp"
#include "spcm/init.hpp"
#include "spcm/membership.hpp"

using namespace spcm;
namespace fz = spcm::oracle::frozen;

namespace {
ClusterSolverContext reference_context() { return build_context(1.0, 0.80325, 0.5); }
}  // namespace

TEST(SolverContext, ThresholdsMatchHighPrecisionValues) {
  const auto ctx = reference_context();
  EXPECT_NEAR(ctx.u_min, fz::kUMin, 1e-15);
  EXPECT_NEAR(ctx.u_hat, fz::kUHat, 1e-15);
  EXPECT_NEAR(ctx.radius_sq, fz::kRadiusSq, 1e-14);
  EXPECT_NEAR(ctx.u_max, fz::kUMax, 1e-13);
  EXPECT_LT(std::abs(f_value(ctx.u_max, 0.0, ctx)), 1e-10);
  EXPECT_EQ(ctx.bisection_iters, 30);
}

TEST(SolverContext, DerivativeAtQuarter) {
  EXPECT_NEAR(f_value(0.25, 0.0, reference_context()), fz::kFQuarter, 1e-15);
}

TEST(SolverContext, DerivativeAtMinMembershipIsDistanceMinusRadius) {
  const auto ctx = build_context(0.7, 0.1, 0.3);
  for (double d : {0.0, 0.3, 1.7}) EXPECT_NEAR(f_value(ctx.u_min, d, ctx), d - ctx.radius_sq, 1e-13);
}

TEST(SolverContext, RadiusBoundIsEnforced) {
  // K at the radius bound makes R^2 = 0 exactly; just above must be rejected.
  const double p = 0.5, gamma = 1.0;
  const double K = radius_bound(p) * (1.0 + 1e-9);
  const double lambda = compute_lambda(std::vector<double>{gamma}, K, p);
  EXPECT_THROW(build_context(gamma, lambda, p), ParameterError);
  EXPECT_NO_THROW(build_context(gamma, compute_lambda(std::vector<double>{gamma}, 0.9, p), p));
}

TEST(SolverContext, RejectsInvalidParameters) {
  EXPECT_THROW(build_context(0.0, 0.1, 0.5), ParameterError);
  EXPECT_THROW(build_context(1.0, -0.1, 0.5), ParameterError);
  EXPECT_THROW(build_context(1.0, 0.1, 0.0), ParameterError);
  EXPECT_THROW(build_context(1.0, 0.1, 1.0), ParameterError);
  EXPECT_THROW(build_context(1.0, 0.1, 0.5, BisectionSettings{0}), ParameterError);
}

TEST(SolverContext, LambdaZeroIsClosedForm) {
  const auto ctx = build_context(2.0, 0.0, 0.5);
  EXPECT_TRUE(ctx.closed_form());
  EXPECT_TRUE(std::isinf(ctx.radius_sq));
  EXPECT_EQ(solve_membership(3.0, ctx), std::exp(-1.5));
  EXPECT_EQ(solve_membership_by_radius(3.0, ctx), std::exp(-1.5));
  EXPECT_EQ(pcm2_membership(0.0, 1.0), 1.0);
}

TEST(Bisection, LargerRootAtDistance04) {
  const auto ctx = reference_context();
  const auto r = bisect_largest_root(0.4, ctx);
  EXPECT_EQ(r.iterations, 30);
  EXPECT_LE(r.lo, fz::kRootD04);
  EXPECT_GE(r.hi, fz::kRootD04);
  EXPECT_LE(r.hi - r.lo, std::ldexp(1.0, -30));
  EXPECT_NEAR(r.estimate, fz::kRootD04, 1e-12);
  EXPECT_NEAR(solve_membership(0.4, ctx), fz::kRootD04, 1e-12);
}

TEST(Bisection, NoSignChangeIsALogicError) {
  const auto ctx = reference_context();
  EXPECT_THROW(bisect_largest_root(10.0, ctx), std::logic_error);
  EXPECT_THROW(f_value(0.0, 1.0, ctx), std::domain_error);
}

TEST(SolveMembership, ZeroOutsideTheInfluenceRadius) {
  const auto ctx = reference_context();
  EXPECT_EQ(solve_membership(10.0, ctx), 0.0);
  EXPECT_EQ(solve_membership(ctx.radius_sq * (1.0 + 1e-9), ctx), 0.0);
  const double inside = solve_membership(ctx.radius_sq * (1.0 - 1e-9), ctx);
  EXPECT_GE(inside, ctx.u_min);
  EXPECT_NEAR(inside, ctx.u_min, 1e-4);
  EXPECT_NEAR(solve_membership(0.0, ctx), ctx.u_max, 1e-12);
}

TEST(SolveMembership, BoundaryDistanceCountsAsInside) {
  const auto ctx = reference_context();
  EXPECT_GE(solve_membership_by_radius(ctx.radius_sq, ctx), ctx.u_min);
  EXPECT_GE(solve_membership(ctx.radius_sq, ctx), ctx.u_min);
}

// The chosen membership must minimise the per-point cost over [0, 1].
TEST(SolveMembership, MinimisesThePointCostOnAGrid) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double p = 0.1 + 0.8 * unit(rng);
    const double gamma = std::exp(-2.0 + 4.0 * unit(rng));
    const double K = radius_bound(p) * (0.05 + 0.9 * unit(rng));
    const double lambda = compute_lambda(std::vector<double>{gamma}, K, p);
    const auto ctx = build_context(gamma, lambda, p);
    const double d = ctx.radius_sq * 2.0 * unit(rng);
    const double u = solve_membership(d, ctx);
    const double best = point_term_cost(d, u, gamma, lambda, p);
    for (int g = 0; g <= 2000; ++g) {
      const double v = g / 2000.0;
      ASSERT_LE(best, point_term_cost(d, v, gamma, lambda, p) + 1e-12 * (1.0 + std::abs(best)))
          << "trial " << trial << " d=" << d << " u=" << u << " v=" << v;
    }
  }
}
