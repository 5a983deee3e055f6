#include "spcm/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spcm/error.hpp"
#include "spcm/kernels.hpp"

namespace spcm {

namespace {

constexpr double kBoundSlack = 1e-9;

bool no_worse(double next, double prev, double slack) {
  return next <= prev + slack * std::max(std::abs(prev), std::abs(next));
}

}  // namespace

const char* termination_name(Termination t) noexcept {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::IterationCap: return "iteration-cap";
    case Termination::EmptyCluster: return "empty-cluster";
  }
  return "unknown";
}

double StepMetrics::max_displacement() const noexcept {
  return displacement.empty() ? 0.0 : *std::max_element(displacement.begin(), displacement.end());
}

std::vector<ClusterSolverContext> build_contexts(const ModelState& state, BisectionSettings settings) {
  std::vector<ClusterSolverContext> ctx;
  ctx.reserve(state.clusters());
  for (std::size_t j = 0; j < state.clusters(); ++j) {
    ctx.push_back(build_context(state.gamma(j), state.lambda(), state.p(), settings));
  }
  return ctx;
}

std::vector<double> update_theta(const DataSet& x, std::span<const double> u_col) {
  if (u_col.size() != x.size()) throw ParameterError("membership column length does not match N");
  const double mass = kernels::sum(u_col);
  if (!(mass > 0.0)) throw AssumptionViolation("cluster has no active point; representative is undefined", 0);
  std::vector<double> theta(x.dims());
  for (std::size_t q = 0; q < x.dims(); ++q) theta[q] = kernels::dot(u_col, x.column(q)) / mass;
  return theta;
}

StepResult spcm_step(const DataSet& x, const ModelState& state, std::span<const ClusterSolverContext> contexts,
                     const MembershipMatrix* previous, double descent_slack) {
  const std::size_t n = x.size();
  const std::size_t m = state.clusters();
  const std::size_t dims = x.dims();
  if (contexts.size() != m) throw ParameterError("one solver context per cluster is required");

  const DistanceMatrix dist(x, state);
  MembershipMatrix next_u(n, m);
  StepMetrics mt;
  mt.active_counts.assign(m, 0);
  mt.displacement.assign(m, 0.0);

  for (std::size_t j = 0; j < m; ++j) {
    const auto& ctx = contexts[j];
    auto col = next_u.column_mut(j);
    const auto d = dist.column(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = solve_membership(d[i], ctx);
      col[i] = u;
      if (u > 0.0) {
        ++mt.active_counts[j];
        if (u < ctx.u_min - kBoundSlack || u > ctx.u_max + kBoundSlack) mt.bounds_ok = false;
      }
    }
  }

  if (previous != nullptr) {
    mt.has_previous = true;
    mt.cost_before = total_cost(dist, *previous, state);
  }
  mt.cost_mid = total_cost(dist, next_u, state);
  if (mt.has_previous) mt.membership_descent = no_worse(mt.cost_mid, mt.cost_before, descent_slack);

  std::vector<double> reps(state.representatives().begin(), state.representatives().end());
  for (std::size_t j = 0; j < m; ++j) {
    if (mt.active_counts[j] == 0) {
      if (!mt.empty_cluster) mt.empty_cluster = j;
      continue;
    }
    const auto col = next_u.column(j);
    const auto theta = update_theta(x, col);

    // Convex-combination certificate for the new representative.
    const double mass = kernels::scalar::sum(col);
    double wsum = 0.0;
    for (double u : col) {
      const double w = u / mass;
      if (w < 0.0) mt.convex_weights_ok = false;
      wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12) mt.convex_weights_ok = false;

    double disp = 0.0;
    for (std::size_t q = 0; q < dims; ++q) {
      const double tol = 1e-12 * (1.0 + std::abs(theta[q]));
      if (theta[q] < x.bbox_min()[q] - tol || theta[q] > x.bbox_max()[q] + tol) mt.inside_bbox = false;
      disp = std::max(disp, std::abs(theta[q] - reps[j * dims + q]));
      reps[j * dims + q] = theta[q];
    }
    mt.displacement[j] = disp;

    // Some point active at t must stay within R_j of theta_j(t+1).
    const double r2 = contexts[j].radius_sq;
    if (std::isfinite(r2)) {
      const auto d_new = squared_distances_to(x, theta);
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (col[i] > 0.0) nearest = std::min(nearest, d_new[i]);
      }
      if (nearest > r2 * (1.0 + 1e-12)) mt.activity_carried = false;
    }
  }

  ModelState next_state = state.with_representatives(std::move(reps));
  mt.cost_after = mt.empty_cluster ? mt.cost_mid : total_cost(x, next_u, next_state);
  mt.theta_descent = no_worse(mt.cost_after, mt.cost_mid, descent_slack);
  return {std::move(next_u), std::move(next_state), std::move(mt)};
}

StepResult spcm_step(const DataSet& x, const ModelState& state, const MembershipMatrix* previous) {
  const auto contexts = build_contexts(state);
  return spcm_step(x, state, contexts, previous);
}

RunResult iterate(const DataSet& x, const ModelState& initial, const SolverConfig& config) {
  if (config.max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (!(config.theta_tol > 0.0)) throw ParameterError("theta tolerance must be positive");

  const auto contexts = build_contexts(initial, BisectionSettings{config.bisection_iters});
  ModelState state = initial;
  std::optional<MembershipMatrix> u_prev;
  std::vector<IterationTrace> trace;
  Termination term = Termination::IterationCap;

  for (int t = 1; t <= config.max_iters; ++t) {
    StepResult step = spcm_step(x, state, contexts, u_prev ? &*u_prev : nullptr, config.descent_slack);
    const bool empty = step.metrics.empty_cluster.has_value();
    const double shift = step.metrics.max_displacement();
    trace.push_back({t, std::vector<double>(step.state.representatives().begin(), step.state.representatives().end()),
                     std::move(step.metrics)});
    u_prev = std::move(step.memberships);
    if (empty) {
      term = Termination::EmptyCluster;
      break;
    }
    state = std::move(step.state);
    if (shift < config.theta_tol) {
      term = Termination::Converged;
      break;
    }
  }

  RunResult res{state, *u_prev, state, *u_prev, std::move(trace), term, {}, std::nullopt, contexts};
  if (term == Termination::EmptyCluster) {
    res.dedup_mapping.resize(state.clusters());
    for (std::size_t j = 0; j < state.clusters(); ++j) res.dedup_mapping[j] = j;
    return res;
  }
  const double threshold = config.dedup_threshold.value_or(1e-3 * x.bbox_diagonal());
  DedupResult dd = deduplicate(state, *u_prev, threshold);
  res.state = std::move(dd.state);
  res.memberships = std::move(dd.memberships);
  res.dedup_mapping = std::move(dd.mapping);
  return res;
}

RunResult run(const DataSet& x, std::size_t m, const SolverConfig& config) {
  InitSettings is;
  is.p = config.p;
  is.K = config.K;
  is.lambda_override = config.lambda_override;
  is.fcm = config.fcm;
  Initialization init = initialize(x, m, is);
  RunResult res = iterate(x, init.state, config);
  res.init = std::move(init.report);
  return res;
}

RunResult run_pcm2(const DataSet& x, std::size_t m, const SolverConfig& config) {
  SolverConfig cfg = config;
  cfg.lambda_override = 0.0;
  return run(x, m, cfg);
}

DedupResult deduplicate(const ModelState& state, const MembershipMatrix& u, double threshold) {
  const std::size_t m = state.clusters();
  const std::size_t dims = state.dims();
  const std::size_t n = u.rows();
  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> mapping(m, kUnassigned);
  std::vector<std::size_t> retained;

  for (std::size_t j = 0; j < m; ++j) {
    if (mapping[j] != kUnassigned) continue;
    mapping[j] = retained.size();
    retained.push_back(j);
    const auto a = state.representative(j);
    for (std::size_t k = j + 1; k < m; ++k) {
      if (mapping[k] != kUnassigned) continue;
      const auto b = state.representative(k);
      double s = 0.0;
      for (std::size_t q = 0; q < dims; ++q) s += (a[q] - b[q]) * (a[q] - b[q]);
      if (std::sqrt(s) < threshold) mapping[k] = mapping[j];
    }
  }

  std::vector<double> reps;
  std::vector<double> gammas;
  MembershipMatrix merged(n, retained.size());
  for (std::size_t r = 0; r < retained.size(); ++r) {
    const auto rep = state.representative(retained[r]);
    reps.insert(reps.end(), rep.begin(), rep.end());
    gammas.push_back(state.gamma(retained[r]));
  }
  for (std::size_t j = 0; j < m; ++j) {
    auto dst = merged.column_mut(mapping[j]);
    const auto src = u.column(j);
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::max(dst[i], src[i]);
  }
  return {std::move(mapping), std::move(retained),
          ModelState(dims, std::move(reps), std::move(gammas), state.lambda(), state.p()), std::move(merged)};
}

}  // namespace spcm
