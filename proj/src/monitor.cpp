#include "spcm/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "spcm/error.hpp"

namespace spcm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::vector<double> weighted_mean(const DataSet& x, std::span<const std::size_t> active, std::span<const double> w) {
  std::vector<double> m(x.dims(), 0.0);
  double mass = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    mass += w[a];
    for (std::size_t q = 0; q < x.dims(); ++q) m[q] += w[a] * x.coord(active[a], q);
  }
  for (double& v : m) v /= mass;
  return m;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) s += (a[q] - b[q]) * (a[q] - b[q]);
  return std::sqrt(s);
}

// Memberships near u_star whose weighted mean stays within eps of theta_star.
// The perturbation is halved until it fits; u_star itself always fits at a
// fixed point since theta_star is its weighted mean.
std::vector<double> sample_memberships(const DataSet& x, std::span<const std::size_t> active,
                                       std::span<const double> u_star, std::span<const double> theta_star,
                                       double lo, double hi, double eps, std::mt19937_64& rng,
                                       std::optional<std::size_t> axis) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::size_t k = active.size();
  std::vector<double> delta(k, 0.0);
  if (axis) {
    delta[*axis] = (unit(rng) < 0.0 ? lo : hi) - u_star[*axis];
  } else {
    const double scale = 0.5 * (1.0 + unit(rng)) * (hi - lo);
    for (auto& v : delta) v = unit(rng) * scale;
  }
  std::vector<double> u(k);
  for (int halvings = 0; halvings < 80; ++halvings) {
    for (std::size_t a = 0; a < k; ++a) u[a] = std::clamp(u_star[a] + delta[a], lo, hi);
    if (distance(theta_star, weighted_mean(x, active, u)) < eps) return u;
    for (auto& v : delta) v *= 0.5;
  }
  return {u_star.begin(), u_star.end()};
}

}  // namespace

std::vector<std::size_t> active_indices(const MembershipMatrix& u, std::size_t j) {
  std::vector<std::size_t> idx;
  const auto col = u.column(j);
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] > 0.0) idx.push_back(i);
  }
  return idx;
}

double cluster_gradient_residual(const DataSet& x, const ModelState& state, const MembershipMatrix& u,
                                 std::size_t j) {
  const auto theta = state.representative(j);
  const auto col = u.column(j);
  const double gamma = state.gamma(j);
  const double lambda = state.lambda();
  const double p = state.p();
  std::vector<double> g(x.dims(), 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(col[i] > 0.0)) continue;
    double d = 0.0;
    for (std::size_t q = 0; q < x.dims(); ++q) {
      const double diff = theta[q] - x.coord(i, q);
      g[q] += col[i] * diff;
      d += diff * diff;
    }
    double f = d + gamma * std::log(col[i]);
    if (lambda != 0.0) f += lambda * p * std::pow(col[i], p - 1.0);
    worst = std::max(worst, std::abs(f));
  }
  for (double v : g) worst = std::max(worst, std::abs(v));
  return worst;
}

double gradient_residual(const DataSet& x, const ModelState& state, const MembershipMatrix& u) {
  double worst = 0.0;
  for (std::size_t j = 0; j < state.clusters(); ++j) worst = std::max(worst, cluster_gradient_residual(x, state, u, j));
  return worst;
}

double hessian_diagonal(double u, double gamma, double lambda, double p) {
  double g = gamma / u;
  if (lambda != 0.0) g -= lambda * p * (1.0 - p) * std::pow(u, p - 2.0);
  return g;
}

Eigen::MatrixXd assemble_hessian(const DataSet& x, std::span<const std::size_t> active, std::span<const double> u_active,
                                 std::span<const double> theta, double gamma, double lambda, double p) {
  const auto k = static_cast<Eigen::Index>(active.size());
  const auto l = static_cast<Eigen::Index>(x.dims());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k + l, k + l);
  double mass = 0.0;
  for (Eigen::Index a = 0; a < k; ++a) {
    const double ua = u_active[static_cast<std::size_t>(a)];
    mass += ua;
    h(a, a) = hessian_diagonal(ua, gamma, lambda, p);
    for (Eigen::Index q = 0; q < l; ++q) {
      const double off = 2.0 * (theta[static_cast<std::size_t>(q)] -
                                x.coord(active[static_cast<std::size_t>(a)], static_cast<std::size_t>(q)));
      h(a, k + q) = off;
      h(k + q, a) = off;
    }
  }
  for (Eigen::Index q = 0; q < l; ++q) h(k + q, k + q) = 2.0 * mass;
  return h;
}

Eigen::MatrixXd assemble_hessian(const DataSet& x, const ModelState& state, const MembershipMatrix& u, std::size_t j) {
  const auto active = active_indices(u, j);
  if (active.empty()) throw AssumptionViolation("Hessian requested for a cluster with no active point", j);
  std::vector<double> ua;
  ua.reserve(active.size());
  for (auto i : active) ua.push_back(u(i, j));
  return assemble_hessian(x, active, ua, state.representative(j), state.gamma(j), state.lambda(), state.p());
}

double hessian_form(const DataSet& x, std::span<const std::size_t> active, std::span<const double> u_active,
                    std::span<const double> theta, double gamma, double lambda, double p,
                    std::span<const double> z_u, std::span<const double> z_theta) {
  double mass = 0.0;
  double diag = 0.0;
  double cross = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    mass += u_active[a];
    diag += hessian_diagonal(u_active[a], gamma, lambda, p) * z_u[a] * z_u[a];
    double dot = 0.0;
    for (std::size_t q = 0; q < theta.size(); ++q) dot += z_theta[q] * (theta[q] - x.coord(active[a], q));
    cross += z_u[a] * dot;
  }
  double tn = 0.0;
  for (double v : z_theta) tn += v * v;
  return diag + 4.0 * cross + 2.0 * mass * tn;
}

bool is_positive_definite(const Eigen::MatrixXd& h) {
  if (h.rows() == 0 || h.rows() != h.cols()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  return llt.info() == Eigen::Success;
}

double epsilon_bound(double gamma, double lambda, double p) {
  const double factor = lambda == 0.0 ? 1.0 : 1.0 - p;
  return 0.5 * std::sqrt(factor * gamma / 2.0);
}

FixedPointReport check_fixed_point(const DataSet& x, const ModelState& state, const MembershipMatrix& u,
                                   const FixedPointTolerances& tol) {
  FixedPointReport rep;
  rep.hessian_ok = rep.valley_ok = rep.lower_bound_ok = rep.geometric_ok = true;
  std::mt19937_64 rng(tol.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lambda = state.lambda();
  const double p = state.p();
  const std::size_t l = x.dims();

  for (std::size_t j = 0; j < state.clusters(); ++j) {
    ClusterFixedPointReport c;
    const auto ctx = build_context(state.gamma(j), lambda, p);
    const auto active = active_indices(u, j);
    const auto theta = state.representative(j);
    c.active_count = active.size();
    c.epsilon_bound = epsilon_bound(ctx.gamma, lambda, p);
    c.epsilon = tol.epsilon_fraction * c.epsilon_bound;

    // Points inside the influence ball are exactly the active ones.
    const auto d = squared_distances_to(x, theta);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool inside = d[i] <= ctx.radius_sq;
      if (inside != (u(i, j) > 0.0)) ++c.geometric_violations;
    }
    c.geometric_ok = c.geometric_violations == 0;

    if (active.empty()) {
      c.grad_norm = 0.0;
      rep.clusters.push_back(c);
      rep.hessian_ok = rep.valley_ok = rep.lower_bound_ok = false;
      rep.geometric_ok = rep.geometric_ok && c.geometric_ok;
      continue;
    }
    c.grad_norm = cluster_gradient_residual(x, state, u, j);

    std::vector<double> u_star;
    for (auto i : active) u_star.push_back(u(i, j));
    const Eigen::MatrixXd h = assemble_hessian(x, active, u_star, theta, ctx.gamma, lambda, p);
    c.hessian_ok = is_positive_definite(h);

    const double floor_factor = lambda == 0.0 ? 1.0 : 1.0 - p;
    c.lower_bound_ok = true;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double bound = floor_factor * ctx.gamma / u_star[a];
      if (h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) < bound * (1.0 - 1e-12)) {
        c.lower_bound_ok = false;
      }
    }

    // Valley samples z' = (u', theta'): u' in [u_lo, u_hi]^k with its weighted
    // mean within epsilon of theta*, theta' an arbitrary direction.
    const std::size_t k = active.size();
    const double u_lo = ctx.u_min > 0.0 ? ctx.u_min : 1e-3 * *std::min_element(u_star.begin(), u_star.end());
    const double u_hi = ctx.u_max;
    const double mass_star = std::accumulate(u_star.begin(), u_star.end(), 0.0);
    const std::size_t axis_samples = 2 * (k + l);
    const std::size_t total = axis_samples + static_cast<std::size_t>(std::max(0, tol.random_samples));
    c.min_form = std::numeric_limits<double>::infinity();

    for (std::size_t s = 0; s < total; ++s) {
      std::optional<std::size_t> u_axis;
      std::optional<std::size_t> theta_axis;
      if (s < 2 * k) u_axis = s / 2;
      else if (s < axis_samples) theta_axis = (s - 2 * k) / 2;

      const auto up = sample_memberships(x, active, u_star, theta, u_lo, u_hi, c.epsilon, rng, u_axis);
      const double mass_prime = std::accumulate(up.begin(), up.end(), 0.0);
      std::vector<double> tp(l, 0.0);
      // Magnitudes straddle the minimiser of phi, about eps * sum u' / sum u*.
      const double radius = 4.0 * unit(rng) * c.epsilon * mass_prime / mass_star;
      if (theta_axis) {
        tp[*theta_axis] = (s % 2 == 0 ? 1.0 : -1.0) * radius;
      } else {
        double nrm = 0.0;
        for (auto& v : tp) {
          v = normal(rng);
          nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        for (auto& v : tp) v = nrm > 0.0 ? v / nrm * radius : 0.0;
      }
      const double form = hessian_form(x, active, u_star, theta, ctx.gamma, lambda, p, up, tp);
      double znorm2 = 0.0;
      for (double v : up) znorm2 += v * v;
      for (double v : tp) znorm2 += v * v;
      c.min_form = std::min(c.min_form, form / znorm2);
      if (!(form > 0.0)) ++c.form_failures;

      double tnorm = 0.0;
      for (double v : tp) tnorm += v * v;
      tnorm = std::sqrt(tnorm);
      double ratio_sum = 0.0;
      for (std::size_t a = 0; a < k; ++a) ratio_sum += up[a] * up[a] / u_star[a];
      const double phi = 2.0 * mass_star * tnorm * tnorm - 4.0 * mass_prime * tnorm * c.epsilon +
                         floor_factor * ctx.gamma * ratio_sum;
      const double slack = 1e-9 * (std::abs(form) + std::abs(phi));
      if (!(phi > 0.0) || form < phi - slack) ++c.bound_failures;

      // Same direction against the Hessian at another point of the valley.
      const auto uz = sample_memberships(x, active, u_star, theta, u_lo, u_hi, c.epsilon, rng, std::nullopt);
      const auto theta_z = weighted_mean(x, active, uz);
      if (!(hessian_form(x, active, uz, theta_z, ctx.gamma, lambda, p, up, tp) > 0.0)) ++c.shifted_failures;
      ++c.samples;
    }

    rep.hessian_ok = rep.hessian_ok && c.hessian_ok;
    rep.valley_ok = rep.valley_ok && c.valley_ok();
    rep.lower_bound_ok = rep.lower_bound_ok && c.lower_bound_ok;
    rep.geometric_ok = rep.geometric_ok && c.geometric_ok;
    rep.clusters.push_back(c);
  }

  for (const auto& c : rep.clusters) {
    rep.grad_norm = std::max(rep.grad_norm, c.grad_norm);
    rep.epsilon_bound.push_back(c.epsilon_bound);
    rep.active_counts.push_back(c.active_count);
  }
  rep.grad_ok = rep.grad_norm < tol.gradient;
  return rep;
}

std::vector<double> replay_residuals(const DataSet& x, const ModelState& initial,
                                     std::span<const IterationTrace> trace, BisectionSettings settings) {
  const auto contexts = build_contexts(initial, settings);
  std::vector<double> out;
  out.reserve(trace.size());
  ModelState prev = initial;
  for (const auto& rec : trace) {
    const DistanceMatrix dist(x, prev);
    MembershipMatrix u(x.size(), initial.clusters());
    for (std::size_t j = 0; j < initial.clusters(); ++j) {
      auto col = u.column_mut(j);
      const auto dj = dist.column(j);
      for (std::size_t i = 0; i < x.size(); ++i) col[i] = solve_membership(dj[i], contexts[j]);
    }
    ModelState cur = prev.with_representatives(rec.representatives);
    out.push_back(gradient_residual(x, cur, u));
    prev = std::move(cur);
  }
  return out;
}

RatioInequality evaluate_ratio_inequality(std::span<const double> u, std::span<const double> u_prime) {
  if (u.size() != u_prime.size() || u.empty()) throw ParameterError("inequality check needs two equal-length, nonempty vectors");
  RatioInequality r;
  double su = 0.0;
  double sp = 0.0;
  double ratio = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0) || !(u_prime[i] > 0.0)) throw ParameterError("inequality check needs strictly positive entries");
    su += u[i];
    sp += u_prime[i];
    ratio += u_prime[i] * u_prime[i] / u[i];
  }
  r.lhs = sp * sp;
  r.rhs = su * ratio;
  const double allowance = 4.0 * static_cast<double>(u.size() + 2) * kEps * r.rhs;
  r.holds = r.lhs <= r.rhs + allowance;
  r.equality = std::abs(r.rhs - r.lhs) <= allowance;
  return r;
}

bool ratio_inequality_holds(std::span<const double> u, std::span<const double> u_prime) {
  return evaluate_ratio_inequality(u, u_prime).holds;
}

}  // namespace spcm
