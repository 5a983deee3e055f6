#include <cmath>
#include <string>

#include "json.hpp"
#include "spcm/cli.hpp"
#include "spcm/io.hpp"

namespace spcm::cli {

namespace {

using nlohmann::ordered_json;

ordered_json rows(std::span<const double> row_major, std::size_t cols) {
  ordered_json out = ordered_json::array();
  for (std::size_t k = 0; k < row_major.size(); k += cols) {
    out.push_back(std::vector<double>(row_major.begin() + static_cast<std::ptrdiff_t>(k),
                                      row_major.begin() + static_cast<std::ptrdiff_t>(k + cols)));
  }
  return out;
}

ordered_json bounds_json(const InitReport& b) {
  ordered_json j;
  j["K"] = b.K;
  j["lambda"] = b.lambda;
  j["radius_bound"] = b.bound_radius;
  j["activity_bound"] = b.bound_activity;
  j["mu"] = b.mu;
  j["mu_max"] = b.mu_max;
  j["radius_positive"] = b.radius_positive;
  j["initial_activity"] = b.initial_activity;
  j["cluster_activity"] = b.cluster_activity;
  j["all_clusters_active"] = b.all_clusters_active;
  if (b.uniqueness_range) {
    j["uniqueness_range"] = {b.uniqueness_range->first, b.uniqueness_range->second};
    j["in_uniqueness_range"] = *b.in_uniqueness_range;
  } else {
    j["uniqueness_range"] = nullptr;
    j["in_uniqueness_range"] = nullptr;
  }
  j["initial_representatives"] = b.theta0;
  return j;
}

ordered_json fixed_point_json(const FixedPointReport& f) {
  ordered_json j;
  j["grad_norm"] = f.grad_norm;
  j["grad_ok"] = f.grad_ok;
  j["hessian_ok"] = f.hessian_ok;
  j["valley_ok"] = f.valley_ok;
  j["lower_bound_ok"] = f.lower_bound_ok;
  j["geometric_ok"] = f.geometric_ok;
  j["epsilon_bound"] = f.epsilon_bound;
  j["active_counts"] = f.active_counts;
  ordered_json clusters = ordered_json::array();
  for (const auto& c : f.clusters) {
    ordered_json e;
    e["active"] = c.active_count;
    e["grad_norm"] = c.grad_norm;
    e["hessian_ok"] = c.hessian_ok;
    e["epsilon"] = c.epsilon;
    e["samples"] = c.samples;
    e["form_failures"] = c.form_failures;
    e["bound_failures"] = c.bound_failures;
    e["shifted_failures"] = c.shifted_failures;
    e["min_form"] = std::isfinite(c.min_form) ? ordered_json(c.min_form) : ordered_json(nullptr);
    e["lower_bound_ok"] = c.lower_bound_ok;
    e["geometric_violations"] = c.geometric_violations;
    clusters.push_back(std::move(e));
  }
  j["clusters"] = std::move(clusters);
  return j;
}

}  // namespace

std::string summary_json(const RunConfig& c, const RunResult& r, const FixedPointReport* fixed_point,
                         const std::vector<std::string>& warnings) {
  ordered_json j;
  j["algorithm"] = algorithm_name(c.algorithm);
  j["termination"] = termination_name(r.termination);
  j["iterations"] = r.iterations();
  j["clusters_requested"] = c.clusters;
  j["clusters_retained"] = r.state.clusters();
  j["representatives"] = rows(r.state.representatives(), r.state.dims());
  j["gammas"] = std::vector<double>(r.state.gammas().begin(), r.state.gammas().end());
  j["lambda"] = r.state.lambda();
  j["K"] = r.init ? ordered_json(r.init->K) : ordered_json(nullptr);
  j["p"] = r.state.p();
  j["dedup_mapping"] = r.dedup_mapping;
  j["final_cost"] = r.trace.empty() ? ordered_json(nullptr) : ordered_json(r.trace.back().cost());

  bool strict = true, half = true, bounds = true, convex = true, bbox = true, carried = true;
  for (std::size_t t = 0; t < r.trace.size(); ++t) {
    const auto& m = r.trace[t].metrics;
    if (t > 0 && t + 1 < r.trace.size() && !(m.cost_after < r.trace[t - 1].cost())) strict = false;
    half = half && m.membership_descent && m.theta_descent;
    bounds = bounds && m.bounds_ok;
    convex = convex && m.convex_weights_ok;
    bbox = bbox && m.inside_bbox;
    carried = carried && m.activity_carried;
  }
  j["checks"] = {{"strict_descent", strict},   {"half_step_descent", half}, {"membership_bounds", bounds},
                 {"convex_weights", convex},   {"inside_bbox", bbox},       {"activity_carried", carried}};
  j["bounds"] = r.init ? bounds_json(*r.init) : ordered_json(nullptr);
  j["fixed_point"] = fixed_point ? fixed_point_json(*fixed_point) : ordered_json(nullptr);
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

std::string trace_jsonl(const RunResult& r) {
  std::string out;
  for (std::size_t t = 0; t < r.trace.size(); ++t) {
    const auto& rec = r.trace[t];
    const auto& m = rec.metrics;
    ordered_json j;
    j["t"] = rec.t;
    j["J"] = m.cost_after;
    j["J_after_memberships"] = m.cost_mid;
    j["J_before"] = m.has_previous ? ordered_json(m.cost_before) : ordered_json(nullptr);
    j["delta_theta"] = m.displacement;
    j["active"] = m.active_counts;
    j["membership_descent"] = m.membership_descent;
    j["theta_descent"] = m.theta_descent;
    j["strict_descent"] = t == 0 ? ordered_json(nullptr) : ordered_json(m.cost_after < r.trace[t - 1].cost());
    j["bounds_ok"] = m.bounds_ok;
    j["convex_weights_ok"] = m.convex_weights_ok;
    j["inside_bbox"] = m.inside_bbox;
    j["activity_carried"] = m.activity_carried;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string objective_table(const RunResult& r) {
  std::string out = "t,J\n";
  for (const auto& rec : r.trace) {
    out += std::to_string(rec.t) + "," + io::format_double(rec.cost()) + "\n";
  }
  return out;
}

std::string trajectory_table(const RunResult& r, std::size_t dims) {
  // First two coordinates of every representative; one coordinate in 1-D.
  const std::size_t shown = std::min<std::size_t>(dims, 2);
  std::string out = shown == 2 ? "t,cluster,x0,x1\n" : "t,cluster,x0\n";
  auto emit = [&](int t, std::span<const double> reps) {
    for (std::size_t j = 0; j * dims < reps.size(); ++j) {
      out += std::to_string(t) + "," + std::to_string(j);
      for (std::size_t q = 0; q < shown; ++q) out += "," + io::format_double(reps[j * dims + q]);
      out += '\n';
    }
  };
  if (r.init) emit(0, r.init->theta0);
  for (const auto& rec : r.trace) emit(rec.t, rec.representatives);
  return out;
}

std::string memberships_csv(const MembershipMatrix& u) {
  std::vector<double> rowm(u.rows() * u.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) rowm[i * u.cols() + j] = u(i, j);
  }
  return io::format_csv(rowm, u.cols());
}

}  // namespace spcm::cli
