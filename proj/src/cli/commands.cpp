#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spcm/cli.hpp"
#include "spcm/error.hpp"
#include "spcm/io.hpp"

namespace spcm::cli {

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::optional<double> parse_auto(const std::string& flag, const std::string& v) {
  if (v.empty() || v == "auto") return std::nullopt;
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw ParameterError(flag + " expects a number or 'auto', got '" + v + "'");
  return d;
}

Algorithm parse_algorithm(const std::string& v) {
  if (v == "spcm") return Algorithm::Spcm;
  if (v == "pcm2") return Algorithm::Pcm2;
  if (v == "fcm") return Algorithm::Fcm;
  throw ParameterError("--algorithm must be one of spcm, pcm2, fcm; got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::string field;
  std::istringstream in(v);
  while (std::getline(in, field, ';')) {
    std::istringstream inner(field);
    std::string num;
    while (std::getline(inner, num, ',')) {
      const auto d = parse_auto("--centers", num);
      if (!d) throw ParameterError("--centers entries must be numbers");
      out.push_back(*d);
    }
  }
  return out;
}

struct RawRunFlags {
  std::string algorithm = "spcm";
  std::string K = "auto";
  std::string dedup = "auto";
};

void add_model_flags(CLI::App* cmd, RunConfig& c, RawRunFlags& raw) {
  cmd->add_option("--algorithm", raw.algorithm, "spcm, pcm2 or fcm")->capture_default_str();
  cmd->add_option("--clusters,-m", c.clusters, "initial number of clusters")->capture_default_str();
  cmd->add_option("--p", c.p, "sparsity exponent in (0, 1)")->capture_default_str();
  cmd->add_option("--K", raw.K, "lambda scale, or 'auto' for the default rule")->capture_default_str();
  cmd->add_option("--seed", c.seed, "seed for the FCM initialization")->capture_default_str();
  cmd->add_option("--input,-i", c.input, "input CSV");
}

void finish_model_flags(RunConfig& c, const RawRunFlags& raw) {
  c.algorithm = parse_algorithm(raw.algorithm);
  c.K = parse_auto("--K", raw.K);
  c.dedup_threshold = parse_auto("--dedup", raw.dedup);
}

void write_outputs(const RunConfig& c, const RunResult& r, const FixedPointReport* fp,
                   const std::vector<std::string>& warnings) {
  io::write_file(join(c.out_dir, "memberships.csv"), memberships_csv(r.memberships));
  io::write_file(join(c.out_dir, "summary.json"), summary_json(c, r, fp, warnings));
  if (c.trace) io::write_file(join(c.out_dir, "trace.jsonl"), trace_jsonl(r));
  if (c.plot_data) {
    io::write_file(join(c.out_dir, "objective.csv"), objective_table(r));
    io::write_file(join(c.out_dir, "theta_trajectory.csv"), trajectory_table(r, r.state.dims()));
  }
}

int run_fcm_only(const RunConfig& c, const DataSet& x, std::ostream& log) {
  const auto fcm = run_fcm(x, c.clusters, solver_config(c).fcm);
  nlohmann::ordered_json j;
  j["algorithm"] = "fcm";
  j["termination"] = fcm.converged ? "converged" : "iteration-cap";
  j["iterations"] = fcm.iterations;
  j["clusters_requested"] = c.clusters;
  auto reps = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < c.clusters; ++k) {
    reps.push_back(std::vector<double>(fcm.representatives.begin() + static_cast<std::ptrdiff_t>(k * x.dims()),
                                       fcm.representatives.begin() + static_cast<std::ptrdiff_t>((k + 1) * x.dims())));
  }
  j["representatives"] = std::move(reps);
  j["warnings"] = fcm.warnings;
  io::write_file(join(c.out_dir, "memberships.csv"), memberships_csv(fcm.memberships));
  io::write_file(join(c.out_dir, "summary.json"), j.dump(2) + "\n");
  for (const auto& w : fcm.warnings) log << "warning: " << w << "\n";
  return kOk;
}

}  // namespace

int run_command(const RunConfig& c, std::ostream& log) {
  try {
    validate_config(c);
  } catch (const ParameterError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  std::optional<DataSet> x;
  try {
    if (c.input.empty()) throw IoError("--input is required");
    x = io::read_csv(c.input);
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const DataError& e) {
    log << "I/O error: " << e.what() << "\n";
    return kIoError;
  }

  try {
    if (c.algorithm == Algorithm::Fcm) return run_fcm_only(c, *x, log);

    const auto cfg = solver_config(c);
    const RunResult r = c.algorithm == Algorithm::Pcm2 ? run_pcm2(*x, c.clusters, cfg) : run(*x, c.clusters, cfg);

    std::vector<std::string> warnings;
    if (r.init) warnings = r.init->warnings;
    std::optional<FixedPointReport> fp;
    if (r.termination != Termination::EmptyCluster) {
      FixedPointTolerances tol;
      tol.seed = c.seed;
      fp = check_fixed_point(*x, r.raw_state, r.raw_memberships, tol);
    }
    int code = kOk;
    if (r.termination == Termination::IterationCap) {
      warnings.push_back("iteration cap of " + std::to_string(c.max_iters) + " reached before the representatives settled");
    } else if (r.termination == Termination::EmptyCluster) {
      const auto& last = r.trace.back().metrics;
      warnings.push_back("cluster " + std::to_string(*last.empty_cluster) + " lost every active point at iteration " +
                         std::to_string(r.iterations()) + "; K is likely too large for this data");
      code = kRuntimeViolation;
    }
    write_outputs(c, r, fp ? &*fp : nullptr, warnings);
    for (const auto& w : warnings) log << "warning: " << w << "\n";
    log << algorithm_name(c.algorithm) << ": " << termination_name(r.termination) << " after " << r.iterations()
        << " iterations, " << r.state.clusters() << " clusters retained\n";
    return code;
  } catch (const ParameterError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const AssumptionViolation& e) {
    log << "runtime violation: " << e.what() << "\n";
    return kRuntimeViolation;
  } catch (const DataError& e) {
    log << "runtime violation: " << e.what() << "\n";
    return kRuntimeViolation;
  }
}

int generate_command(const BlobSpec& spec, const std::string& data_path, const std::string& labels_path,
                     std::ostream& log) {
  std::optional<BlobData> generated;
  try {
    generated = generate_blobs(spec);
  } catch (const ParameterError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  const BlobData& b = *generated;
  try {
    io::write_file(data_path, io::format_dataset(b.data));
    if (!labels_path.empty()) {
      std::string labels;
      for (int v : b.labels) labels += std::to_string(v) + "\n";
      io::write_file(labels_path, labels);
    }
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << "\n";
    return kIoError;
  }
  log << "wrote " << b.data.size() << " points (" << b.data.size() - spec.blobs * spec.points_per_blob
      << " noise) to " << data_path << "\n";
  return kOk;
}

int validate_params_command(const RunConfig& c, std::ostream& out) {
  RunConfig probe = c;
  try {
    validate_config(probe);
  } catch (const ParameterError& e) {
    out << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  nlohmann::ordered_json j;
  j["p"] = c.p;
  j["radius_bound"] = radius_bound(c.p);
  j["activity_bound_mu0"] = activity_bound(c.p, 0.0);
  j["default_K_mu0"] = default_K(c.p, 0.0);

  if (!c.input.empty()) {
    try {
      const DataSet x = io::read_csv(c.input);
      InitSettings is;
      is.p = c.p;
      is.K = c.K;
      is.fcm = solver_config(c).fcm;
      const auto init = initialize(x, c.clusters, is);
      const auto& r = init.report;
      j["K"] = r.K;
      j["lambda"] = r.lambda;
      j["gammas"] = r.gammas;
      j["mu"] = r.mu;
      j["activity_bound"] = r.bound_activity;
      j["radius_positive"] = r.radius_positive;
      j["initial_activity"] = r.initial_activity;
      j["cluster_activity"] = r.cluster_activity;
      j["all_clusters_active"] = r.all_clusters_active;
      if (r.uniqueness_range) {
        j["uniqueness_range"] = {r.uniqueness_range->first, r.uniqueness_range->second};
        j["in_uniqueness_range"] = *r.in_uniqueness_range;
      }
      j["warnings"] = r.warnings;
    } catch (const IoError& e) {
      out << "I/O error: " << e.what() << "\n";
      return kIoError;
    } catch (const DataError& e) {
      out << "I/O error: " << e.what() << "\n";
      return kIoError;
    } catch (const ParameterError& e) {
      out << "config error: " << e.what() << "\n";
      return kConfigError;
    }
  } else {
    const double K = c.K.value_or(default_K(c.p, 0.0));
    j["K"] = K;
    j["radius_positive"] = K < radius_bound(c.p);
    j["initial_activity_mu0"] = K <= activity_bound(c.p, 0.0);
  }
  out << j.dump(2) << "\n";
  return kOk;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Sparse possibilistic c-means clustering"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file; run options go under [run]; command-line flags win");

  RunConfig rc;
  RawRunFlags raw;
  auto* run_cmd = app.add_subcommand("run", "cluster a CSV dataset");
  run_cmd->fallthrough();
  add_model_flags(run_cmd, rc, raw);
  run_cmd->add_option("--theta-tol", rc.theta_tol, "stop when max ||delta theta||_inf falls below this")
      ->capture_default_str();
  run_cmd->add_option("--max-iters", rc.max_iters, "iteration cap")->capture_default_str();
  run_cmd->add_option("--bisection-iters", rc.bisection_iters, "bisection steps per membership")->capture_default_str();
  run_cmd->add_option("--dedup", raw.dedup, "duplicate distance, or 'auto' (1e-3 x bounding-box diagonal)")
      ->capture_default_str();
  run_cmd->add_option("--out-dir,-o", rc.out_dir, "output directory")->capture_default_str();
  run_cmd->add_flag("--trace", rc.trace, "write trace.jsonl");
  run_cmd->add_flag("--plot-data", rc.plot_data, "write objective.csv and theta_trajectory.csv");
  run_cmd->add_option("--fcm-fuzzifier", rc.fcm_fuzzifier)->capture_default_str();
  run_cmd->add_option("--fcm-tolerance", rc.fcm_tolerance)->capture_default_str();
  run_cmd->add_option("--fcm-max-iters", rc.fcm_max_iters)->capture_default_str();

  BlobSpec bs;
  std::string centers;
  std::string data_path;
  std::string labels_path;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic Gaussian-blob dataset");
  gen_cmd->add_option("--blobs", bs.blobs)->capture_default_str();
  gen_cmd->add_option("--per-blob", bs.points_per_blob)->capture_default_str();
  gen_cmd->add_option("--dims", bs.dims)->capture_default_str();
  gen_cmd->add_option("--sigma", bs.sigma)->capture_default_str();
  gen_cmd->add_option("--noise", bs.noise_fraction, "noise points as a fraction of blob points")->capture_default_str();
  gen_cmd->add_option("--noise-margin", bs.noise_margin)->capture_default_str();
  gen_cmd->add_option("--noise-clearance", bs.noise_clearance)->capture_default_str();
  gen_cmd->add_option("--centers", centers, "x,y;x,y;... (default: unit-side polygon)");
  gen_cmd->add_option("--seed", bs.seed)->capture_default_str();
  gen_cmd->add_option("--out,-o", data_path, "data CSV")->required();
  gen_cmd->add_option("--labels", labels_path, "labels file, one per line");

  RunConfig vc;
  RawRunFlags vraw;
  auto* val_cmd = app.add_subcommand("validate-params", "check K against its bounds");
  add_model_flags(val_cmd, vc, vraw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) {
      finish_model_flags(rc, raw);
      return run_command(rc, std::cerr);
    }
    if (*gen_cmd) {
      if (!centers.empty()) bs.centers = parse_list(centers);
      return generate_command(bs, data_path, labels_path, std::cerr);
    }
    finish_model_flags(vc, vraw);
    return validate_params_command(vc, std::cout);
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace spcm::cli
