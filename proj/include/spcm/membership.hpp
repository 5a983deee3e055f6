#pragma once

// Scalar solver for one (point, cluster) degree of compatibility.
//
// For fixed (gamma, lambda, p) the derivative of the cost with respect to
// a membership u is
//     f(u) = d + gamma ln u + lambda p u^(p-1),
// which is convex-shaped on (0, 1] with its minimum at u_hat. The optimal
// membership is the larger root of f when that root is at least u_min, and
// 0 otherwise; equivalently, it is nonzero exactly when d <= radius_sq.

#include <cstddef>

namespace spcm {

struct BisectionSettings {
  int iterations = 30;
};

/// Per-cluster constants derived from (gamma, lambda, p). Immutable once built.
struct ClusterSolverContext {
  double gamma = 1.0;
  double lambda = 0.0;
  double p = 0.5;
  double u_hat = 0.0;      // argmin of f on (0, 1]
  double u_min = 0.0;      // smallest attainable nonzero membership
  double u_max = 1.0;      // larger root of f at d = 0
  double radius_sq = 0.0;  // squared influence radius; +inf when lambda == 0
  int bisection_iters = 30;

  bool closed_form() const noexcept { return lambda == 0.0; }
};

/// Throws ParameterError for gamma <= 0, lambda < 0, p outside (0,1), or
/// parameters that make radius_sq non-positive (K too large for this p).
ClusterSolverContext build_context(double gamma, double lambda, double p, BisectionSettings settings = {});

/// f(u) for squared distance d. Throws std::domain_error for u <= 0.
double f_value(double u, double d, const ClusterSolverContext& ctx);

/// Bisection bracket around the larger root of f. Requires f(u_hat) < 0.
struct RootBracket {
  double lo;
  double hi;
  double estimate;  // secant readout of the final bracket, always in [lo, hi]
  int iterations;
};

/// Bisects f on [u_hat, 1] for the configured number of iterations.
/// Throws std::logic_error if the bracket is not sign-changing.
RootBracket bisect_largest_root(double d, const ClusterSolverContext& ctx);

/// Optimal membership via the u_min comparison on the bisected root.
double solve_membership(double d, const ClusterSolverContext& ctx);

/// Same optimum, branching on d <= radius_sq instead. The boundary
/// d == radius_sq is inside the ball.
double solve_membership_by_radius(double d, const ClusterSolverContext& ctx);

/// lambda = 0 closed form exp(-d / gamma).
double pcm2_membership(double d, double gamma);

}  // namespace spcm
