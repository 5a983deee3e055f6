#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spcm/core.hpp"

namespace spcm {

struct FcmSettings {
  double fuzzifier = 2.0;
  double tolerance = 1e-6;  // max representative displacement
  int max_iters = 300;
  std::uint64_t seed = 0;
};

struct FcmResult {
  std::vector<double> representatives;  // m x l, row-major
  MembershipMatrix memberships;         // rows sum to 1
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Fuzzy c-means with D^2-weighted seeding. Deterministic for a given seed.
/// Non-convergence is reported in the result, not thrown.
FcmResult run_fcm(const DataSet& x, std::size_t m, const FcmSettings& settings = {});

/// gamma_j = sum_i u_ij ||x_i - theta_j||^2 / sum_i u_ij.
/// Throws DataError on a zero column sum or a zero gamma (all mass on theta_j).
std::vector<double> compute_gammas(const DataSet& x, std::span<const double> representatives,
                                   const MembershipMatrix& u_fcm);

/// lambda = K * min(gamma) / (p (1-p) e^(2-p)).
double compute_lambda(std::span<const double> gammas, double K, double p);

/// mu_j = min_i ||x_i - theta_j||^2 / gamma_j.
std::vector<double> compute_mu(const DataSet& x, std::span<const double> representatives,
                               std::span<const double> gammas);

/// Upper bound on K keeping every influence radius positive: p e^(2(1-p)).
double radius_bound(double p);

/// Upper bound on K keeping every initial cluster active: p e^((2 - mu_max)(1-p)).
double activity_bound(double p, double mu_max);

/// 0.9 for p = 0.5, otherwise 0.66 * activity_bound(p, mu_max).
double default_K(double p, double mu_max);

struct InitReport {
  std::vector<double> theta0;  // m x l, row-major
  std::vector<double> gammas;
  double lambda = 0.0;
  double K = 0.0;
  double p = 0.5;
  std::vector<double> mu;
  double mu_max = 0.0;
  double bound_activity = 0.0;  // activity_bound(p, mu_max)
  double bound_radius = 0.0;    // radius_bound(p)

  bool radius_positive = false;            // K < bound_radius
  bool initial_activity = false;           // K <= bound_activity
  std::vector<bool> cluster_activity;      // K <= (gamma_j / gamma_bar) p e^((2 - mu_j)(1-p))
  bool all_clusters_active = false;
  std::optional<std::pair<double, double>> uniqueness_range;  // only when gamma_max/gamma_bar is small enough
  std::optional<bool> in_uniqueness_range;

  std::vector<std::string> warnings;
};

/// Evaluates every K bound. Never throws for finite inputs; failures become warnings.
InitReport validate_K(double K, std::span<const double> gammas, double p, std::span<const double> mu);

struct InitSettings {
  double p = 0.5;
  std::optional<double> K;               // default_K when unset
  std::optional<double> lambda_override; // bypasses the K formula (used for the near-PCM2 limit)
  FcmSettings fcm;
};

struct Initialization {
  ModelState state;
  InitReport report;
  FcmResult fcm;
};

/// FCM, gammas, lambda and the bound report in one call.
Initialization initialize(const DataSet& x, std::size_t m, const InitSettings& settings);

}  // namespace spcm
