#include "spcm/membership.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spcm/error.hpp"

namespace spcm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Bracket [lo, hi] with f(lo) < 0 < f(hi); halve `iterations` times or
// until the midpoint stops moving. While the bracket spans more than a factor
// of 64 it is split at the geometric mean: for p near 1, u_hat can be far
// below 1e-9 and linear halving would never resolve a root down there.
RootBracket bisect(double d, const ClusterSolverContext& ctx, double lo, double hi, int iterations) {
  double f_lo = f_value(lo, d, ctx);
  double f_hi = f_value(hi, d, ctx);
  if (!(f_lo < 0.0) || !(f_hi > 0.0)) {
    throw std::logic_error("membership bracket is not sign-changing");
  }
  int it = 0;
  for (; it < iterations; ++it) {
    const double mid = hi > 64.0 * lo ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f_value(mid, d, ctx);
    if (f_mid == 0.0) return {mid, mid, mid, it + 1};
    if (f_mid < 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  const double secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
  return {lo, hi, std::clamp(secant, lo, hi), it};
}

}  // namespace

double f_value(double u, double d, const ClusterSolverContext& ctx) {
  if (!(u > 0.0)) throw std::domain_error("f is defined for u > 0 only");
  double v = d + ctx.gamma * std::log(u);
  if (ctx.lambda != 0.0) v += ctx.lambda * ctx.p * std::pow(u, ctx.p - 1.0);
  return v;
}

ClusterSolverContext build_context(double gamma, double lambda, double p, BisectionSettings settings) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive and finite");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be finite and >= 0");
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("p must lie in the open interval (0, 1)");
  if (settings.iterations < 1) throw ParameterError("bisection needs at least one iteration");

  ClusterSolverContext ctx;
  ctx.gamma = gamma;
  ctx.lambda = lambda;
  ctx.p = p;
  ctx.bisection_iters = settings.iterations;

  if (lambda == 0.0) {
    ctx.u_hat = 0.0;
    ctx.u_min = 0.0;
    ctx.u_max = 1.0;
    ctx.radius_sq = std::numeric_limits<double>::infinity();
    return ctx;
  }

  const double inv = 1.0 / (1.0 - p);
  const double ratio = lambda * (1.0 - p) / gamma;
  ctx.radius_sq = gamma * inv * (-std::log(ratio) - p);
  if (!(ctx.radius_sq > 0.0)) {
    throw ParameterError(
        "influence radius is not positive for these (gamma, lambda, p); "
        "K must stay below p*exp(2(1-p))");
  }
  ctx.u_hat = std::pow(lambda / gamma * p * (1.0 - p), inv);
  ctx.u_min = std::pow(ratio, inv);
  if (!(ctx.u_hat > 0.0)) throw ParameterError("u_hat underflows; p is too close to 1 for this lambda/gamma");

  // u_max is computed once per cluster, so bisect it to full precision.
  ctx.u_max = bisect(0.0, ctx, ctx.u_hat, 1.0, 200).estimate;
  return ctx;
}

RootBracket bisect_largest_root(double d, const ClusterSolverContext& ctx) {
  return bisect(d, ctx, ctx.u_hat, 1.0, ctx.bisection_iters);
}

double solve_membership(double d, const ClusterSolverContext& ctx) {
  if (ctx.closed_form()) return pcm2_membership(d, ctx.gamma);
  if (!(f_value(ctx.u_hat, d, ctx) < 0.0)) return 0.0;  // no root, or the single tangent root

  const RootBracket root = bisect_largest_root(d, ctx);
  if (root.hi < ctx.u_min) return 0.0;
  if (root.lo >= ctx.u_min) return std::min(root.estimate, ctx.u_max);

  // u_min lies inside the final bracket; f is increasing on [u_hat, 1], so
  // the true root is >= u_min exactly when f(u_min) <= 0. Ties go to membership.
  const double lambda_term = ctx.lambda * ctx.p * std::pow(ctx.u_min, ctx.p - 1.0);
  const double log_term = ctx.gamma * std::log(ctx.u_min);
  const double tie = 8.0 * kEps * (std::abs(d) + std::abs(log_term) + lambda_term);
  if (d + log_term + lambda_term <= tie) return std::clamp(root.estimate, ctx.u_min, ctx.u_max);
  return 0.0;
}

double solve_membership_by_radius(double d, const ClusterSolverContext& ctx) {
  if (ctx.closed_form()) return pcm2_membership(d, ctx.gamma);
  if (d > ctx.radius_sq) return 0.0;
  return std::clamp(bisect_largest_root(d, ctx).estimate, ctx.u_min, ctx.u_max);
}

double pcm2_membership(double d, double gamma) { return std::exp(-d / gamma); }

}  // namespace spcm
