#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's numerics beyond plain data access.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "spcm/core.hpp"
#include "spcm/driver.hpp"
#include "spcm/monitor.hpp"

namespace spcm::oracle {

// High-precision reference values (50-digit evaluation, rounded).
namespace frozen {
inline constexpr double kCostAtHalf = 0.21911183466926536481;      // h(d=1, u=.5, gamma=1, lambda=.8, p=.5)
inline constexpr double kLambdaK09 = 0.80326857653434738416;       // K=.9, p=.5, gamma_bar=1
inline constexpr double kFQuarter = -0.58304436111989061883;       // f(.25; d=0, gamma=1, lambda=.80325, p=.5)
inline constexpr double kUMin = 0.161302640625;                    // lambda=.80325
inline constexpr double kRadiusSq = 0.82447292309222904153;
inline constexpr double kUHat = 0.04032566015625;
inline constexpr double kUMax = 0.59381384137285422908;
inline constexpr double kRootD04 = 0.33485763699367714372;         // larger root at d=.4
inline constexpr double kActivityBound = 1.35236217063972609033;   // p=.5, mu_max=.01
inline constexpr double kRadiusBound = 1.35914091422952261768;     // p=.5
}  // namespace frozen

inline long double f_ld(long double u, long double d, long double gamma, long double lambda, long double p) {
  return d + gamma * std::log(u) + lambda * p * std::pow(u, p - 1.0L);
}

struct GridRoots {
  int sign_changes = 0;
  bool has_root = false;
  long double largest = 0.0L;
};

// Dense log+linear grid on (0, 1] plus the analytic minimizer of f, then
// long-double bisection of the right-most upward sign change.
inline GridRoots grid_roots(double d, double gamma, double lambda, double p) {
  const long double g = gamma, l = lambda, pp = p;
  const long double u_hat = std::pow(l / g * pp * (1.0L - pp), 1.0L / (1.0L - pp));
  std::vector<long double> grid;
  const long double lo = std::min<long double>(1e-12L, u_hat * 1e-6L);
  const int n_log = 8000;
  const int n_lin = 8000;
  for (int k = 0; k <= n_log; ++k) grid.push_back(lo * std::pow(1.0L / lo, static_cast<long double>(k) / n_log));
  for (int k = 1; k <= n_lin; ++k) grid.push_back(static_cast<long double>(k) / n_lin);
  if (u_hat > 0.0L) grid.push_back(u_hat);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  GridRoots r;
  long double prev_u = grid[0];
  long double prev_f = f_ld(prev_u, d, gamma, lambda, p);
  long double br_lo = 0.0L;
  long double br_hi = 0.0L;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const long double u = grid[k];
    const long double fu = f_ld(u, d, gamma, lambda, p);
    if ((prev_f < 0.0L) != (fu < 0.0L)) {
      ++r.sign_changes;
      if (prev_f < 0.0L) {  // upward crossing: a candidate larger root
        br_lo = prev_u;
        br_hi = u;
        r.has_root = true;
      }
    }
    prev_u = u;
    prev_f = fu;
  }
  if (r.has_root) {
    for (int it = 0; it < 200; ++it) {
      const long double mid = 0.5L * (br_lo + br_hi);
      if (f_ld(mid, d, gamma, lambda, p) < 0.0L) br_lo = mid;
      else br_hi = mid;
    }
    r.largest = 0.5L * (br_lo + br_hi);
  }
  return r;
}

// One point's share of the cluster cost, and the sum of the magnitudes of its
// parts (the scale its rounding error is relative to).
struct TermCost {
  long double value = 0.0L;
  long double scale = 0.0L;
};

inline TermCost term_cost_ld(const DataSet& x, std::size_t i, long double u, const std::vector<long double>& theta,
                             long double gamma, long double lambda, long double p) {
  long double d = 0.0L;
  for (std::size_t q = 0; q < theta.size(); ++q) {
    const long double diff = static_cast<long double>(x.coord(i, q)) - theta[q];
    d += diff * diff;
  }
  const long double a = u * d;
  const long double b = gamma * u * std::log(u);
  const long double c = gamma * u;
  const long double e = lambda != 0.0L ? lambda * std::pow(u, p) : 0.0L;
  return {a + b - c + e, std::abs(a) + std::abs(b) + std::abs(c) + std::abs(e)};
}

struct FdHessian {
  Eigen::MatrixXd h;
  Eigen::MatrixXd roundoff;  // estimated absolute rounding error of each entry
};

// Central second differences of the cluster cost over (u_active, theta).
// Membership steps are relative (rel_step * u, at most `step`) so tiny PCM2
// memberships are differenced in place. The cost is a sum of per-point terms
// and u_a enters only term a, so entries touching u_a difference that term
// alone; the theta block differences the full sum.
inline FdHessian finite_difference_hessian(const DataSet& x, const ModelState& state, const MembershipMatrix& um,
                                           std::size_t j, double step = 1e-5, double rel_step = 1e-3) {
  const auto active = active_indices(um, j);
  const std::size_t k = active.size();
  const std::size_t l = x.dims();
  const std::size_t n = k + l;
  std::vector<long double> z(n), hs(n);
  for (std::size_t a = 0; a < k; ++a) {
    z[a] = um(active[a], j);
    hs[a] = std::min<long double>(step, rel_step * z[a]);
  }
  for (std::size_t q = 0; q < l; ++q) {
    z[k + q] = state.representative(j)[q];
    hs[k + q] = step;
  }
  const long double gamma = state.gamma(j);
  const long double lambda = state.lambda();
  const long double p = state.p();

  // only < 0: every term
  auto cost = [&](const std::vector<long double>& zz, std::ptrdiff_t only) {
    std::vector<long double> th(zz.begin() + static_cast<std::ptrdiff_t>(k), zz.end());
    TermCost total;
    for (std::size_t a = 0; a < k; ++a) {
      if (only >= 0 && static_cast<std::size_t>(only) != a) continue;
      const auto t = term_cost_ld(x, active[a], zz[a], th, gamma, lambda, p);
      total.value += t.value;
      total.scale += t.scale;
    }
    return total;
  };

  constexpr long double kEpsLd = std::numeric_limits<long double>::epsilon();
  FdHessian out;
  out.h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.roundoff = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const auto ia = static_cast<Eigen::Index>(a);
      const auto ib = static_cast<Eigen::Index>(b);
      if (a < k && b < k && a != b) continue;  // distinct terms: exactly zero
      const std::ptrdiff_t only = a < k ? static_cast<std::ptrdiff_t>(a) : -1;
      const auto base = cost(z, only);
      long double v;
      auto zz = z;
      if (a == b) {
        zz[a] = z[a] + hs[a];
        const long double fp = cost(zz, only).value;
        zz[a] = z[a] - hs[a];
        const long double fm = cost(zz, only).value;
        v = (fp - 2.0L * base.value + fm) / (hs[a] * hs[a]);
      } else {
        long double s = 0.0L;
        for (int sa : {1, -1}) {
          for (int sb : {1, -1}) {
            zz = z;
            zz[a] += sa * hs[a];
            zz[b] += sb * hs[b];
            s += sa * sb * cost(zz, only).value;
          }
        }
        v = s / (4.0L * hs[a] * hs[b]);
      }
      const double ro = static_cast<double>(64.0L * kEpsLd * (base.scale + 1e-300L) / (hs[a] * hs[b]));
      out.h(ia, ib) = out.h(ib, ia) = static_cast<double>(v);
      out.roundoff(ia, ib) = out.roundoff(ib, ia) = ro;
    }
  }
  return out;
}

// Largest entrywise relative error, with the differencing roundoff as the
// floor of the denominator.
inline double max_relative_error(const Eigen::MatrixXd& analytic, const FdHessian& fd) {
  double worst = 0.0;
  for (Eigen::Index a = 0; a < analytic.rows(); ++a) {
    for (Eigen::Index b = 0; b < analytic.cols(); ++b) {
      const double diff = std::abs(analytic(a, b) - fd.h(a, b));
      const double ro = fd.roundoff(a, b);
      if (diff <= ro) continue;
      const double scale = std::max({std::abs(analytic(a, b)), std::abs(fd.h(a, b)), ro});
      worst = std::max(worst, diff / scale);
    }
  }
  return worst;
}

}  // namespace spcm::oracle
