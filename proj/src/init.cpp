#include "spcm/init.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "spcm/error.hpp"
#include "spcm/kernels.hpp"

namespace spcm {

namespace {

std::vector<std::size_t> seed_indices(const DataSet& x, std::size_t m, std::mt19937_64& rng) {
  const std::size_t n = x.size();
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  chosen.push_back(std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n))));
  taken[chosen.back()] = true;
  std::vector<double> nearest = squared_distances_to(x, x.point(chosen.back()));

  while (chosen.size() < m) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += taken[i] ? 0.0 : nearest[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    if (pick == n) {
      // Remaining points coincide with chosen ones (or rounding ran off the end).
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      pick = free[std::min(free.size() - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(free.size())))];
    }
    chosen.push_back(pick);
    taken[pick] = true;
    const auto d = squared_distances_to(x, x.point(pick));
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], d[i]);
  }
  return chosen;
}

void fcm_memberships(const DataSet& x, std::span<const double> reps, std::size_t m, double fuzzifier,
                     MembershipMatrix& u) {
  const std::size_t n = x.size();
  const std::size_t dims = x.dims();
  std::vector<double> d(n * m);
  for (std::size_t j = 0; j < m; ++j) {
    kernels::squared_distances(x.columns(), n, reps.subspan(j * dims, dims), {d.data() + j * n, n});
  }
  const double expo = 1.0 / (fuzzifier - 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t zeros = 0;
    for (std::size_t j = 0; j < m; ++j) zeros += d[j * n + i] == 0.0 ? 1 : 0;
    if (zeros > 0) {
      for (std::size_t j = 0; j < m; ++j) u.set(i, j, d[j * n + i] == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0);
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      double denom = 0.0;
      for (std::size_t k = 0; k < m; ++k) denom += std::pow(d[j * n + i] / d[k * n + i], expo);
      u.set(i, j, 1.0 / denom);
    }
  }
}

}  // namespace

FcmResult run_fcm(const DataSet& x, std::size_t m, const FcmSettings& settings) {
  const std::size_t n = x.size();
  const std::size_t dims = x.dims();
  if (m < 1 || m > n) throw ParameterError("FCM needs 1 <= m <= N");
  if (!(settings.fuzzifier > 1.0)) throw ParameterError("FCM fuzzifier must exceed 1");

  std::mt19937_64 rng(settings.seed);
  FcmResult res{std::vector<double>(m * dims), MembershipMatrix(n, m), 0, false, {}};
  const auto seeds = seed_indices(x, m, rng);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t q = 0; q < dims; ++q) res.representatives[j * dims + q] = x.coord(seeds[j], q);
  }

  std::vector<double> weights(n);
  for (res.iterations = 0; res.iterations < settings.max_iters;) {
    fcm_memberships(x, res.representatives, m, settings.fuzzifier, res.memberships);
    ++res.iterations;
    double shift = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto col = res.memberships.column(j);
      for (std::size_t i = 0; i < n; ++i) weights[i] = std::pow(col[i], settings.fuzzifier);
      const double total = kernels::sum(weights);
      if (!(total > 0.0)) continue;  // cluster holds no mass; keep its representative
      double disp = 0.0;
      for (std::size_t q = 0; q < dims; ++q) {
        const double v = kernels::dot(weights, x.column(q)) / total;
        disp += (v - res.representatives[j * dims + q]) * (v - res.representatives[j * dims + q]);
        res.representatives[j * dims + q] = v;
      }
      shift = std::max(shift, std::sqrt(disp));
    }
    if (shift < settings.tolerance) {
      res.converged = true;
      break;
    }
  }
  fcm_memberships(x, res.representatives, m, settings.fuzzifier, res.memberships);
  if (!res.converged) {
    res.warnings.push_back("FCM did not converge within " + std::to_string(settings.max_iters) +
                           " iterations; using the last iterate");
  }
  return res;
}

std::vector<double> compute_gammas(const DataSet& x, std::span<const double> representatives,
                                   const MembershipMatrix& u_fcm) {
  const std::size_t dims = x.dims();
  const std::size_t m = u_fcm.cols();
  if (representatives.size() != m * dims || u_fcm.rows() != x.size()) {
    throw ParameterError("gamma initialization: shape mismatch");
  }
  std::vector<double> gammas(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto d = squared_distances_to(x, representatives.subspan(j * dims, dims));
    const double mass = kernels::sum(u_fcm.column(j));
    if (!(mass > 0.0)) throw DataError("cluster " + std::to_string(j) + " has zero FCM membership mass");
    gammas[j] = kernels::dot(u_fcm.column(j), d) / mass;
    if (!(gammas[j] > 0.0)) {
      throw DataError("cluster " + std::to_string(j) +
                      " is degenerate: every weighted point coincides with its representative (gamma = 0)");
    }
  }
  return gammas;
}

double compute_lambda(std::span<const double> gammas, double K, double p) {
  if (gammas.empty()) throw ParameterError("no gammas");
  if (!(K > 0.0)) throw ParameterError("K must be positive");
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("p must lie in the open interval (0, 1)");
  const double gamma_bar = *std::min_element(gammas.begin(), gammas.end());
  return K * gamma_bar / (p * (1.0 - p) * std::exp(2.0 - p));
}

std::vector<double> compute_mu(const DataSet& x, std::span<const double> representatives,
                               std::span<const double> gammas) {
  const std::size_t dims = x.dims();
  std::vector<double> mu(gammas.size());
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    const auto d = squared_distances_to(x, representatives.subspan(j * dims, dims));
    mu[j] = *std::min_element(d.begin(), d.end()) / gammas[j];
  }
  return mu;
}

double radius_bound(double p) { return p * std::exp(2.0 * (1.0 - p)); }

double activity_bound(double p, double mu_max) { return p * std::exp((2.0 - mu_max) * (1.0 - p)); }

double default_K(double p, double mu_max) {
  if (p == 0.5) return 0.9;
  return 0.66 * activity_bound(p, mu_max);
}

InitReport validate_K(double K, std::span<const double> gammas, double p, std::span<const double> mu) {
  InitReport r;
  r.K = K;
  r.p = p;
  r.gammas.assign(gammas.begin(), gammas.end());
  r.mu.assign(mu.begin(), mu.end());
  r.mu_max = mu.empty() ? 0.0 : *std::max_element(mu.begin(), mu.end());
  r.bound_radius = radius_bound(p);
  r.bound_activity = activity_bound(p, r.mu_max);
  if (!gammas.empty() && K > 0.0) r.lambda = compute_lambda(gammas, K, p);

  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  r.radius_positive = K < r.bound_radius;
  if (!r.radius_positive) {
    r.warnings.push_back("K = " + fmt(K) + " >= p*exp(2(1-p)) = " + fmt(r.bound_radius) +
                         ": influence radii are not guaranteed positive");
  }
  r.initial_activity = K <= r.bound_activity;
  if (!r.initial_activity) {
    r.warnings.push_back("K = " + fmt(K) + " > p*exp((2-mu_max)(1-p)) = " + fmt(r.bound_activity) +
                         ": some initial cluster may have no active point");
  }

  if (!gammas.empty()) {
    const auto [gmin, gmax] = std::minmax_element(gammas.begin(), gammas.end());
    r.all_clusters_active = true;
    for (std::size_t j = 0; j < gammas.size() && j < mu.size(); ++j) {
      const double bound = gammas[j] / *gmin * p * std::exp((2.0 - mu[j]) * (1.0 - p));
      const bool ok = K <= bound;
      r.cluster_activity.push_back(ok);
      if (!ok) {
        r.all_clusters_active = false;
        r.warnings.push_back("cluster " + std::to_string(j) + ": K exceeds its activity bound " + fmt(bound));
      }
    }
    // Uniqueness of fixed points per active set; evaluated with the largest
    // gamma ratio, which is the binding one over all clusters.
    const double ratio = *gmax / *gmin;
    if (ratio < std::exp((1.0 - p) * (1.0 - p) / 2.0) / p) {
      const double lo = ratio * p * std::exp(2.0 - (1.0 + p) * (1.0 + p) / 2.0);
      r.uniqueness_range = std::make_pair(lo, r.bound_radius);
      r.in_uniqueness_range = K >= lo && K <= r.bound_radius;
    }
  }
  return r;
}

Initialization initialize(const DataSet& x, std::size_t m, const InitSettings& settings) {
  if (!(settings.p > 0.0 && settings.p < 1.0)) throw ParameterError("p must lie in the open interval (0, 1)");
  FcmResult fcm = run_fcm(x, m, settings.fcm);
  auto gammas = compute_gammas(x, fcm.representatives, fcm.memberships);
  const auto mu = compute_mu(x, fcm.representatives, gammas);
  const double mu_max = *std::max_element(mu.begin(), mu.end());
  const double gamma_bar = *std::min_element(gammas.begin(), gammas.end());

  double K = settings.K.value_or(default_K(settings.p, mu_max));
  if (settings.lambda_override) {
    K = *settings.lambda_override * settings.p * (1.0 - settings.p) * std::exp(2.0 - settings.p) / gamma_bar;
  }
  if (!(K > 0.0) && !settings.lambda_override) throw ParameterError("K must be positive");

  InitReport report = validate_K(K, gammas, settings.p, mu);
  report.theta0 = fcm.representatives;
  report.lambda = settings.lambda_override ? *settings.lambda_override : compute_lambda(gammas, K, settings.p);
  report.warnings.insert(report.warnings.begin(), fcm.warnings.begin(), fcm.warnings.end());

  ModelState state(x.dims(), fcm.representatives, std::move(gammas), report.lambda, settings.p);
  return {std::move(state), std::move(report), std::move(fcm)};
}

}  // namespace spcm
