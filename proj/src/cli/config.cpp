#include <cmath>
#include <sstream>

#include "spcm/cli.hpp"
#include "spcm/error.hpp"

namespace spcm::cli {

const char* algorithm_name(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Spcm: return "spcm";
    case Algorithm::Pcm2: return "pcm2";
    case Algorithm::Fcm: return "fcm";
  }
  return "unknown";
}

void validate_config(const RunConfig& c) {
  std::ostringstream msg;
  msg.precision(6);
  if (c.clusters < 1) throw ParameterError("--clusters must be >= 1");
  if (!(c.p > 0.0 && c.p < 1.0)) {
    msg << "--p = " << c.p << " is outside the open interval (0, 1)";
    throw ParameterError(msg.str());
  }
  if (c.K) {
    if (!(*c.K > 0.0) || !std::isfinite(*c.K)) {
      msg << "--K = " << *c.K << " must be positive";
      throw ParameterError(msg.str());
    }
    const double bound = radius_bound(c.p);
    if (c.algorithm == Algorithm::Spcm && *c.K >= bound) {
      msg << "--K = " << *c.K << " violates the influence-radius bound K < p*exp(2(1-p)) = " << bound
          << " for p = " << c.p << "; every R_j^2 would be non-positive";
      throw ParameterError(msg.str());
    }
  }
  if (!(c.theta_tol > 0.0)) throw ParameterError("--theta-tol must be positive");
  if (c.max_iters < 1) throw ParameterError("--max-iters must be >= 1");
  if (c.bisection_iters < 1) throw ParameterError("--bisection-iters must be >= 1");
  if (c.dedup_threshold && !(*c.dedup_threshold >= 0.0)) throw ParameterError("--dedup must be 'auto' or >= 0");
  if (!(c.fcm_fuzzifier > 1.0)) throw ParameterError("fcm-fuzzifier must exceed 1");
  if (!(c.fcm_tolerance > 0.0)) throw ParameterError("fcm-tolerance must be positive");
  if (c.fcm_max_iters < 1) throw ParameterError("fcm-max-iters must be >= 1");
}

SolverConfig solver_config(const RunConfig& c) {
  SolverConfig s;
  s.p = c.p;
  s.K = c.K;
  s.theta_tol = c.theta_tol;
  s.max_iters = c.max_iters;
  s.bisection_iters = c.bisection_iters;
  s.dedup_threshold = c.dedup_threshold;
  s.fcm.fuzzifier = c.fcm_fuzzifier;
  s.fcm.tolerance = c.fcm_tolerance;
  s.fcm.max_iters = c.fcm_max_iters;
  s.fcm.seed = c.seed;
  return s;
}

}  // namespace spcm::cli
