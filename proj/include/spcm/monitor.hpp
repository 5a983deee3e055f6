#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spcm/core.hpp"
#include "spcm/driver.hpp"
#include "spcm/membership.hpp"

namespace spcm {

struct FixedPointTolerances {
  double gradient = 1e-6;
  double epsilon_fraction = 0.99;  // epsilon = fraction * epsilon_bound
  int random_samples = 1000;       // on top of the 2(k+l) axis samples
  std::uint64_t seed = 0;
};

struct ClusterFixedPointReport {
  std::size_t active_count = 0;
  double grad_norm = 0.0;
  bool hessian_ok = false;          // Cholesky of the active-block Hessian succeeded
  double epsilon_bound = 0.0;       // 1/2 sqrt((1-p) gamma / 2); 1/2 sqrt(gamma / 2) with lambda = 0
  double epsilon = 0.0;             // radius actually sampled
  std::size_t samples = 0;
  std::size_t form_failures = 0;    // z'^T H z' <= 0 at the fixed point
  std::size_t bound_failures = 0;   // lower-bound polynomial phi not positive, or above the form
  std::size_t shifted_failures = 0; // z'^T H_z z' <= 0 with z elsewhere in the valley (2 epsilon)
  double min_form = 0.0;            // smallest z'^T H z' / ||z'||^2 seen
  bool lower_bound_ok = false;      // g_i >= (1-p) gamma / u_i for every active u_i
  bool geometric_ok = false;
  std::size_t geometric_violations = 0;

  bool valley_ok() const noexcept { return samples > 0 && form_failures == 0 && bound_failures == 0 && shifted_failures == 0; }
};

struct FixedPointReport {
  double grad_norm = 0.0;  // max over clusters
  bool grad_ok = false;
  bool hessian_ok = false;
  bool valley_ok = false;
  bool lower_bound_ok = false;
  bool geometric_ok = false;
  std::vector<double> epsilon_bound;
  std::vector<std::size_t> active_counts;
  std::vector<ClusterFixedPointReport> clusters;

  bool all_ok() const noexcept { return grad_ok && hessian_ok && valley_ok && lower_bound_ok && geometric_ok; }
};

/// Indices i with U(i, j) > 0, ascending.
std::vector<std::size_t> active_indices(const MembershipMatrix& u, std::size_t j);

/// Stationarity residual of cluster j: max(||sum u_i (theta - x_i)||_inf, max_active |f(u_i)|).
double cluster_gradient_residual(const DataSet& x, const ModelState& state, const MembershipMatrix& u,
                                 std::size_t j);
double gradient_residual(const DataSet& x, const ModelState& state, const MembershipMatrix& u);

/// Second derivative of the per-point cost in u: gamma/u - lambda p (1-p) u^(p-2).
double hessian_diagonal(double u, double gamma, double lambda, double p);

/// Hessian of J over cluster j's active memberships and its representative,
/// ordered (u_a1 .. u_ak, theta_1 .. theta_l).
Eigen::MatrixXd assemble_hessian(const DataSet& x, const ModelState& state, const MembershipMatrix& u, std::size_t j);

/// Same block structure for arbitrary active points, memberships and representative.
Eigen::MatrixXd assemble_hessian(const DataSet& x, std::span<const std::size_t> active, std::span<const double> u_active,
                                 std::span<const double> theta, double gamma, double lambda, double p);

/// z^T H z for z = (z_u, z_theta) without forming H; O(k l).
double hessian_form(const DataSet& x, std::span<const std::size_t> active, std::span<const double> u_active,
                    std::span<const double> theta, double gamma, double lambda, double p,
                    std::span<const double> z_u, std::span<const double> z_theta);

/// Symmetric positive definiteness via Cholesky.
bool is_positive_definite(const Eigen::MatrixXd& h);

double epsilon_bound(double gamma, double lambda, double p);

FixedPointReport check_fixed_point(const DataSet& x, const ModelState& state, const MembershipMatrix& u,
                                   const FixedPointTolerances& tol = {});

/// Re-derives U(t) = F(Theta(t-1)) for every trace record and evaluates the
/// residual at (U(t), Theta(t)). `initial` supplies Theta(0) and the parameters.
std::vector<double> replay_residuals(const DataSet& x, const ModelState& initial,
                                     std::span<const IterationTrace> trace, BisectionSettings settings = {});

/// (sum u')^2 <= sum u * sum(u'^2 / u), with a relative rounding allowance.
bool ratio_inequality_holds(std::span<const double> u, std::span<const double> u_prime);

struct RatioInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool equality = false;  // sides agree to rounding
};
RatioInequality evaluate_ratio_inequality(std::span<const double> u, std::span<const double> u_prime);

}  // namespace spcm
