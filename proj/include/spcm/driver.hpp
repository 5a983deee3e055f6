#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spcm/core.hpp"
#include "spcm/init.hpp"
#include "spcm/membership.hpp"

namespace spcm {

struct SolverConfig {
  double p = 0.5;
  std::optional<double> K;                // default_K when unset
  std::optional<double> lambda_override;  // bypasses K (near-PCM2 experiments)
  double theta_tol = 1e-6;                // max_j ||delta theta_j||_inf
  int max_iters = 500;
  int bisection_iters = 30;
  std::optional<double> dedup_threshold;  // default 1e-3 * bounding-box diagonal
  double descent_slack = 1e-12;           // relative slack of the descent checks
  FcmSettings fcm;
};

enum class Termination { Converged, IterationCap, EmptyCluster };

const char* termination_name(Termination t) noexcept;

/// What one full iteration (memberships, then representatives) did.
struct StepMetrics {
  double cost_before = 0.0;  // J(U_prev, Theta_prev); only meaningful when has_previous
  double cost_mid = 0.0;     // J(U_next, Theta_prev)
  double cost_after = 0.0;   // J(U_next, Theta_next)
  bool has_previous = false;

  bool membership_descent = true;  // cost_mid <= cost_before (+ slack)
  bool theta_descent = true;       // cost_after <= cost_mid (+ slack)

  std::vector<double> displacement;  // ||theta_j(t+1) - theta_j(t)||_inf
  std::vector<std::size_t> active_counts;

  bool bounds_ok = true;          // nonzero u within [u_min, u_max] (1e-9 slack)
  bool convex_weights_ok = true;  // u_i / sum u: nonnegative, sum to 1 within 1e-12
  bool inside_bbox = true;
  bool activity_carried = true;   // theta_j(t+1) within R_j of a point active at t

  std::optional<std::size_t> empty_cluster;

  double max_displacement() const noexcept;
};

struct StepResult {
  MembershipMatrix memberships;
  ModelState state;
  StepMetrics metrics;
};

struct IterationTrace {
  int t = 0;                            // 1-based iteration index
  std::vector<double> representatives; // Theta after the step, m x l
  StepMetrics metrics;

  double cost() const noexcept { return metrics.cost_after; }
};

struct DedupResult {
  std::vector<std::size_t> mapping;   // original cluster -> retained cluster
  std::vector<std::size_t> retained;  // original indices that survive, ascending
  ModelState state;
  MembershipMatrix memberships;
};

struct RunResult {
  ModelState state;               // after duplicate removal
  MembershipMatrix memberships;   // after duplicate removal
  ModelState raw_state;           // terminal iterate, before duplicate removal
  MembershipMatrix raw_memberships;
  std::vector<IterationTrace> trace;
  Termination termination = Termination::IterationCap;
  std::vector<std::size_t> dedup_mapping;
  std::optional<InitReport> init;
  std::vector<ClusterSolverContext> contexts;  // one per raw cluster

  int iterations() const noexcept { return static_cast<int>(trace.size()); }
};

std::vector<ClusterSolverContext> build_contexts(const ModelState& state, BisectionSettings settings = {});

/// theta = sum u_i x_i / sum u_i. Throws AssumptionViolation (cluster 0) if every u is zero.
std::vector<double> update_theta(const DataSet& x, std::span<const double> u_col);

/// Memberships from the current representatives, then representatives from
/// those memberships. `previous` enables the first half-step descent check.
StepResult spcm_step(const DataSet& x, const ModelState& state, std::span<const ClusterSolverContext> contexts,
                     const MembershipMatrix* previous = nullptr, double descent_slack = 1e-12);
StepResult spcm_step(const DataSet& x, const ModelState& state, const MembershipMatrix* previous = nullptr);

/// Iterates from a given state until the representatives stop moving, the
/// cap is hit, or a cluster empties. Duplicate removal is applied unless the
/// run aborted.
RunResult iterate(const DataSet& x, const ModelState& initial, const SolverConfig& config);

/// FCM initialization followed by iterate().
RunResult run(const DataSet& x, std::size_t m, const SolverConfig& config);

/// run() with lambda forced to 0: closed-form memberships, every point active.
RunResult run_pcm2(const DataSet& x, std::size_t m, const SolverConfig& config);

/// Merges representatives closer than `threshold` into the lowest index;
/// merged memberships are the pointwise max of the merged columns.
DedupResult deduplicate(const ModelState& state, const MembershipMatrix& u, double threshold);

}  // namespace spcm
