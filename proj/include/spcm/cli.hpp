#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spcm/blobs.hpp"
#include "spcm/driver.hpp"
#include "spcm/init.hpp"
#include "spcm/monitor.hpp"

namespace spcm::cli {

enum class Algorithm { Spcm, Pcm2, Fcm };

const char* algorithm_name(Algorithm a) noexcept;

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeViolation = 3, kIoError = 4 };

struct RunConfig {
  Algorithm algorithm = Algorithm::Spcm;
  std::size_t clusters = 3;
  double p = 0.5;
  std::optional<double> K;
  double theta_tol = 1e-6;
  int max_iters = 500;
  int bisection_iters = 30;
  std::optional<double> dedup_threshold;  // empty: automatic
  std::uint64_t seed = 0;
  std::string input;
  std::string out_dir = ".";
  bool trace = false;
  bool plot_data = false;
  double fcm_fuzzifier = 2.0;
  double fcm_tolerance = 1e-6;
  int fcm_max_iters = 300;
};

/// Throws ParameterError naming the violated bound.
void validate_config(const RunConfig& c);

SolverConfig solver_config(const RunConfig& c);

/// Full-precision serializations of a finished run.
std::string summary_json(const RunConfig& c, const RunResult& r, const FixedPointReport* fixed_point,
                         const std::vector<std::string>& warnings);
std::string trace_jsonl(const RunResult& r);
std::string objective_table(const RunResult& r);
std::string trajectory_table(const RunResult& r, std::size_t dims);
std::string memberships_csv(const MembershipMatrix& u);

/// Executes a validated run, writing outputs under c.out_dir. Messages go to `log`.
int run_command(const RunConfig& c, std::ostream& log);

/// Writes the data CSV and one label per line.
int generate_command(const BlobSpec& spec, const std::string& data_path, const std::string& labels_path,
                     std::ostream& log);

/// Prints the K bounds for (p, K); with an input file also the data-dependent ones.
int validate_params_command(const RunConfig& c, std::ostream& out);

/// Parses argv and dispatches to a subcommand; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace spcm::cli
