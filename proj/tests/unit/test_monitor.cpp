#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spcm/blobs.hpp"
#include "spcm/driver.hpp"
#include "spcm/error.hpp"
#include "spcm/monitor.hpp"

using namespace spcm;

namespace {

RunResult converged_blobs(std::uint64_t seed, bool pcm2 = false, double theta_tol = 1e-6) {
  BlobSpec s;
  s.seed = seed;
  s.noise_fraction = 0.1;
  static std::vector<BlobData> keep;
  keep.push_back(generate_blobs(s));
  SolverConfig c;
  c.fcm.seed = seed;
  c.theta_tol = theta_tol;
  return pcm2 ? run_pcm2(keep.back().data, 3, c) : run(keep.back().data, 3, c);
}

DataSet blob_data(std::uint64_t seed) {
  BlobSpec s;
  s.seed = seed;
  s.noise_fraction = 0.1;
  return generate_blobs(s).data;
}

// Memberships of one point set at its exact optimum for a given theta.
MembershipMatrix optimal_memberships(const DataSet& x, const ModelState& s) {
  const auto ctx = build_contexts(s);
  MembershipMatrix u(x.size(), s.clusters());
  const DistanceMatrix d(x, s);
  for (std::size_t j = 0; j < s.clusters(); ++j) {
    for (std::size_t i = 0; i < x.size(); ++i) u.set(i, j, solve_membership(d(i, j), ctx[j]));
  }
  return u;
}

}  // namespace

TEST(Hessian, SinglePointAtTheRepresentative) {
  const DataSet x(1, 2, std::vector<double>{0.4, -0.1});
  const ModelState s(2, {0.4, -0.1}, {0.5}, 0.1, 0.5);
  MembershipMatrix u(1, 1);
  const auto ctx = build_context(0.5, 0.1, 0.5);
  u.set(0, 0, ctx.u_max);
  const auto h = assemble_hessian(x, s, u, 0);
  ASSERT_EQ(h.rows(), 3);
  const double g = 0.5 / ctx.u_max - 0.1 * 0.25 * std::pow(ctx.u_max, -1.5);
  EXPECT_DOUBLE_EQ(h(0, 0), g);
  EXPECT_GT(g, 0.0);
  EXPECT_GE(g, 0.5 * 0.5 / ctx.u_max);
  EXPECT_EQ(h(0, 1), 0.0);
  EXPECT_EQ(h(2, 0), 0.0);
  EXPECT_EQ(h(1, 1), 2.0 * ctx.u_max);
  EXPECT_EQ(h(2, 2), 2.0 * ctx.u_max);
  EXPECT_EQ(h(1, 2), 0.0);
  EXPECT_TRUE(is_positive_definite(h));

  const auto rep = check_fixed_point(x, s, u);
  EXPECT_TRUE(rep.hessian_ok);
  EXPECT_TRUE(rep.lower_bound_ok);
}

TEST(Hessian, Pcm2DiagonalIsGammaOverU) {
  const DataSet x(1, 1, std::vector<double>{0.0});
  const ModelState s(1, {0.0}, {0.5}, 0.0, 0.5);
  MembershipMatrix u(1, 1);
  u.set(0, 0, 0.8);
  EXPECT_DOUBLE_EQ(assemble_hessian(x, s, u, 0)(0, 0), 0.5 / 0.8);
  EXPECT_EQ(epsilon_bound(0.5, 0.0, 0.5), 0.5 * std::sqrt(0.25));
  EXPECT_EQ(epsilon_bound(0.5, 0.1, 0.5), 0.5 * std::sqrt(0.125));
}

TEST(Hessian, SymmetricWithExactSparsityPattern) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const DataSet x = blob_data(2);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelState s(2, {unit(rng) - 0.5, unit(rng) - 0.5}, {0.05 + unit(rng)}, 0.01, 0.5);
    const auto u = optimal_memberships(x, s);
    if (u.active_count(0) == 0) continue;
    const auto h = assemble_hessian(x, s, u, 0);
    const auto k = static_cast<Eigen::Index>(u.active_count(0));
    EXPECT_EQ(h, h.transpose());
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        if (a != b) EXPECT_EQ(h(a, b), 0.0);
      }
    }
    EXPECT_EQ(h(k, k + 1), 0.0);
    EXPECT_EQ(h(k, k), h(k + 1, k + 1));
  }
}

TEST(Hessian, MatchesFiniteDifferencesAtSymmetricFixedPoint) {
  const DataSet x(2, 1, std::vector<double>{-0.1, 0.1});
  const ModelState s(1, {0.0}, {0.05}, 0.02, 0.5);
  const auto u = optimal_memberships(x, s);
  ASSERT_EQ(u.active_count(0), 2u);
  const auto h = assemble_hessian(x, s, u, 0);
  const auto fd = oracle::finite_difference_hessian(x, s, u, 0);
  EXPECT_LT(oracle::max_relative_error(h, fd), 1e-4);
  EXPECT_LT(gradient_residual(x, s, u), 1e-12);
}

TEST(Hessian, MatchesFiniteDifferencesOnRandomStates) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    const std::size_t l = 1 + trial % 3;
    const std::size_t n = 2 + trial % 5;
    std::vector<double> pts(n * l);
    for (auto& v : pts) v = unit(rng) - 0.5;
    const DataSet x(n, l, pts);
    std::vector<double> theta(l);
    for (auto& v : theta) v = 0.2 * (unit(rng) - 0.5);
    const double gamma = 0.1 + unit(rng);
    const double p = 0.2 + 0.6 * unit(rng);
    const double lambda = 0.3 * gamma * unit(rng) * p / (p * (1 - p) * std::exp(2 - p));
    const ModelState s(l, theta, {gamma}, lambda, p);
    const auto u = optimal_memberships(x, s);
    if (u.active_count(0) == 0) continue;
    ++checked;
    const auto h = assemble_hessian(x, s, u, 0);
    const auto fd = oracle::finite_difference_hessian(x, s, u, 0);
    EXPECT_LT(oracle::max_relative_error(h, fd), 1e-4) << "trial " << trial;
  }
  EXPECT_GE(checked, 20);
}

TEST(Hessian, StructuredFormEqualsDenseProduct) {
  const auto r = converged_blobs(4);
  const auto& x = blob_data(4);
  const auto active = active_indices(r.raw_memberships, 0);
  std::vector<double> ua;
  for (auto i : active) ua.push_back(r.raw_memberships(i, 0));
  const auto th = r.raw_state.representative(0);
  const auto h = assemble_hessian(x, active, ua, th, r.raw_state.gamma(0), r.raw_state.lambda(), r.raw_state.p());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd z(h.rows());
    for (Eigen::Index a = 0; a < z.size(); ++a) z(a) = nd(rng);
    std::vector<double> zu(z.data(), z.data() + active.size());
    std::vector<double> zt(z.data() + active.size(), z.data() + z.size());
    const double dense = z.dot(h * z);
    EXPECT_NEAR(hessian_form(x, active, ua, th, r.raw_state.gamma(0), r.raw_state.lambda(), r.raw_state.p(), zu, zt),
                dense, 1e-10 * (1.0 + std::abs(dense)));
  }
}

TEST(Hessian, EmptyClusterHasNoBlock) {
  const DataSet x(1, 1, std::vector<double>{0.0});
  const ModelState s(1, {0.0}, {0.5}, 0.1, 0.5);
  EXPECT_THROW(assemble_hessian(x, s, MembershipMatrix(1, 1), 0), AssumptionViolation);
}

TEST(GradientResidual, SmallAtConvergence) {
  const auto r = converged_blobs(3);
  ASSERT_EQ(r.termination, Termination::Converged);
  EXPECT_LT(gradient_residual(blob_data(3), r.raw_state, r.raw_memberships), 1e-6);
}

TEST(GradientResidual, ThetaShiftShowsUpLinearly) {
  const auto r = converged_blobs(3);
  const auto x = blob_data(3);
  std::vector<double> reps(r.raw_state.representatives().begin(), r.raw_state.representatives().end());
  reps[0] += 0.1;
  const auto moved = r.raw_state.with_representatives(reps);
  double mass = 0.0;
  for (double v : r.raw_memberships.column(0)) mass += v;
  // theta-part of the residual is sum u_i (theta - x_i): the 0.1 shift times sum u
  // (half of the full gradient 2 sum u_i (theta - x_i)).
  const double res = cluster_gradient_residual(x, moved, r.raw_memberships, 0);
  EXPECT_NEAR(res, 0.1 * mass, 1e-5);
  EXPECT_GT(res, 0.0);
}

TEST(GradientResidual, Pcm2MembershipPartVanishes) {
  const auto r = converged_blobs(6, true);
  const auto x = blob_data(6);
  // Fresh closed-form memberships at the final theta: only the theta part remains.
  const auto u = optimal_memberships(x, r.raw_state);
  double theta_part = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t q = 0; q < 2; ++q) {
      double g = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) g += u(i, j) * (r.raw_state.representative(j)[q] - x.coord(i, q));
      theta_part = std::max(theta_part, std::abs(g));
    }
  }
  double f_part = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const auto d = squared_distances_to(x, r.raw_state.representative(j));
    for (std::size_t i = 0; i < x.size(); ++i) {
      f_part = std::max(f_part, std::abs(d[i] + r.raw_state.gamma(j) * std::log(u(i, j))));
    }
  }
  EXPECT_LT(f_part, 1e-12);
  EXPECT_NEAR(gradient_residual(x, r.raw_state, u), std::max(theta_part, f_part), 1e-15);
}

TEST(GradientResidual, LargeAwayFromAFixedPoint) {
  const auto x = blob_data(3);
  const ModelState s(2, {0.2, 0.1}, {0.1}, 0.01, 0.5);
  MembershipMatrix u(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) u.set(i, 0, 0.5);
  EXPECT_GT(gradient_residual(x, s, u), 1e-3);
}

TEST(FixedPoint, ConvergedRunPassesEveryCheck) {
  const auto r = converged_blobs(9);
  ASSERT_EQ(r.termination, Termination::Converged);
  const auto rep = check_fixed_point(blob_data(9), r.raw_state, r.raw_memberships);
  EXPECT_TRUE(rep.grad_ok) << rep.grad_norm;
  EXPECT_TRUE(rep.hessian_ok);
  EXPECT_TRUE(rep.valley_ok);
  EXPECT_TRUE(rep.lower_bound_ok);
  EXPECT_TRUE(rep.geometric_ok);
  EXPECT_TRUE(rep.all_ok());
  for (const auto& c : rep.clusters) EXPECT_EQ(c.samples, 2 * (c.active_count + 2) + 1000);
}

TEST(FixedPoint, Pcm2RunPassesEveryCheck) {
  // Every point is active under PCM2, so the residual is roughly sum u times
  // the last step; a tighter stop makes it clear 1e-6.
  const auto r = converged_blobs(9, true, 1e-9);
  ASSERT_EQ(r.termination, Termination::Converged);
  const auto rep = check_fixed_point(blob_data(9), r.raw_state, r.raw_memberships);
  EXPECT_TRUE(rep.all_ok()) << rep.grad_norm;
}

TEST(Replay, ResidualStaysAwayFromZeroWhileDescending) {
  BlobSpec bs;
  bs.seed = 13;
  bs.noise_fraction = 0.1;
  const auto b = generate_blobs(bs);
  InitSettings is;
  is.fcm.seed = 13;
  const auto init = initialize(b.data, 3, is);
  const auto r = iterate(b.data, init.state, SolverConfig{});
  ASSERT_EQ(r.termination, Termination::Converged);
  const auto res = replay_residuals(b.data, init.state, r.trace);
  ASSERT_EQ(res.size(), r.trace.size());
  for (std::size_t t = 1; t + 1 < r.trace.size(); ++t) {
    if (r.trace[t].cost() < r.trace[t - 1].cost()) EXPECT_GT(res[t], 1e-9) << t;
  }
  EXPECT_NEAR(res.back(), gradient_residual(b.data, r.raw_state, r.raw_memberships), 1e-12);
}

TEST(RatioInequality, EqualityCases) {
  const std::vector<double> u{0.2, 0.5, 0.9};
  const auto e = evaluate_ratio_inequality(u, u);
  EXPECT_TRUE(e.holds);
  EXPECT_TRUE(e.equality);
  const auto one = evaluate_ratio_inequality(std::vector<double>{0.3}, std::vector<double>{0.8});
  EXPECT_TRUE(one.holds);
  EXPECT_TRUE(one.equality);
  const auto strict = evaluate_ratio_inequality(std::vector<double>{0.2, 0.8}, std::vector<double>{0.8, 0.2});
  EXPECT_TRUE(strict.holds);
  EXPECT_FALSE(strict.equality);
}

TEST(RatioInequality, ScaledCopyIsEquality) {
  const std::vector<double> u{0.2, 0.5, 0.9, 0.01};
  std::vector<double> up;
  for (double v : u) up.push_back(3.0 * v);
  EXPECT_TRUE(evaluate_ratio_inequality(u, up).equality);
}

TEST(RatioInequality, RejectsNonPositiveInput) {
  EXPECT_THROW(ratio_inequality_holds(std::vector<double>{0.0}, std::vector<double>{1.0}), ParameterError);
  EXPECT_THROW(ratio_inequality_holds(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), ParameterError);
}

TEST(RatioInequality, RandomPairsNeverViolate) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(1e-6, 1.0);
  for (int t = 0; t < 20000; ++t) {
    const std::size_t k = 1 + t % 16;
    std::vector<double> u(k), up(k);
    for (std::size_t i = 0; i < k; ++i) {
      u[i] = unit(rng);
      up[i] = unit(rng);
    }
    ASSERT_TRUE(ratio_inequality_holds(u, up));
  }
}
