#include "spcm/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spcm/error.hpp"
#include "spcm/kernels.hpp"

namespace spcm {

DataSet::DataSet(std::size_t n, std::size_t dims, std::span<const double> row_major)
    : n_(n), dims_(dims) {
  if (n == 0 || dims == 0) throw DataError("data set must contain at least one point of dimension >= 1");
  if (row_major.size() != n * dims) {
    throw DataError("data set buffer holds " + std::to_string(row_major.size()) + " values, expected " +
                    std::to_string(n * dims));
  }
  columns_.resize(n * dims);
  bbox_min_.assign(dims, 0.0);
  bbox_max_.assign(dims, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t q = 0; q < dims; ++q) {
      const double v = row_major[i * dims + q];
      if (!std::isfinite(v)) {
        throw DataError("non-finite coordinate at point " + std::to_string(i) + ", dimension " + std::to_string(q));
      }
      columns_[q * n + i] = v;
    }
  }
  for (std::size_t q = 0; q < dims; ++q) {
    const auto col = column(q);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    bbox_min_[q] = *lo;
    bbox_max_[q] = *hi;
  }
}

DataSet DataSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DataError("data set is empty");
  const std::size_t dims = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * dims);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dims) {
      throw DataError("point " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " coordinates, expected " + std::to_string(dims));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return DataSet(rows.size(), dims, flat);
}

std::vector<double> DataSet::point(std::size_t i) const {
  std::vector<double> p(dims_);
  for (std::size_t q = 0; q < dims_; ++q) p[q] = coord(i, q);
  return p;
}

double DataSet::bbox_diagonal() const noexcept {
  double s = 0.0;
  for (std::size_t q = 0; q < dims_; ++q) {
    const double w = bbox_max_[q] - bbox_min_[q];
    s += w * w;
  }
  return std::sqrt(s);
}

ModelState::ModelState(std::size_t dims, std::vector<double> representatives, std::vector<double> gammas,
                       double lambda, double p)
    : dims_(dims), reps_(std::move(representatives)), gammas_(std::move(gammas)), lambda_(lambda), p_(p) {
  if (gammas_.empty()) throw ParameterError("model needs at least one cluster");
  if (dims_ == 0 || reps_.size() != gammas_.size() * dims_) {
    throw ParameterError("representatives buffer does not match " + std::to_string(gammas_.size()) +
                         " clusters of dimension " + std::to_string(dims_));
  }
  for (double g : gammas_) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError("every gamma must be positive and finite");
  }
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw ParameterError("lambda must be finite and >= 0");
  if (!(p_ > 0.0 && p_ < 1.0)) throw ParameterError("p must lie in the open interval (0, 1)");
  gamma_bar_ = *std::min_element(gammas_.begin(), gammas_.end());
}

ModelState ModelState::with_representatives(std::vector<double> representatives) const {
  return ModelState(dims_, std::move(representatives), gammas_, lambda_, p_);
}

ModelState ModelState::with_lambda(double lambda) const { return ModelState(dims_, reps_, gammas_, lambda, p_); }

MembershipMatrix::MembershipMatrix(std::size_t n, std::size_t m) : n_(n), m_(m), values_(n * m, 0.0) {}

void MembershipMatrix::set(std::size_t i, std::size_t j, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("membership outside [0, 1]");
  values_[j * n_ + i] = u;
}

std::size_t MembershipMatrix::active_count(std::size_t j) const noexcept {
  const auto col = column(j);
  return static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [](double u) { return u > 0.0; }));
}

DistanceMatrix::DistanceMatrix(const DataSet& x, const ModelState& state)
    : n_(x.size()), values_(x.size() * state.clusters()) {
  if (x.dims() != state.dims()) throw ParameterError("data and representatives differ in dimension");
  for (std::size_t j = 0; j < state.clusters(); ++j) {
    kernels::squared_distances(x.columns(), n_, state.representative(j), {values_.data() + j * n_, n_});
  }
}

std::vector<double> squared_distances_to(const DataSet& x, std::span<const double> point) {
  if (point.size() != x.dims()) throw ParameterError("point dimension does not match the data");
  std::vector<double> out(x.size());
  kernels::squared_distances(x.columns(), x.size(), point, out);
  return out;
}

double point_term_cost(double d, double u, double gamma, double lambda, double p) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("membership outside [0, 1]");
  if (u == 0.0) return 0.0;  // u ln u -> 0 and u^p -> 0
  return u * d + gamma * (u * std::log(u) - u) + lambda * std::pow(u, p);
}

namespace {

void check_shapes(std::size_t n, std::size_t dims, const MembershipMatrix& u, const ModelState& state) {
  if (u.rows() != n || u.cols() != state.clusters()) {
    throw ParameterError("membership matrix is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                         ", expected " + std::to_string(n) + "x" + std::to_string(state.clusters()));
  }
  if (dims != state.dims()) throw ParameterError("data and representatives differ in dimension");
}

}  // namespace

double cluster_cost(const DataSet& x, const MembershipMatrix& u, const ModelState& state, std::size_t j) {
  check_shapes(x.size(), x.dims(), u, state);
  const auto d = squared_distances_to(x, state.representative(j));
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += point_term_cost(d[i], u(i, j), state.gamma(j), state.lambda(), state.p());
  }
  return acc;
}

double total_cost(const DistanceMatrix& d, const MembershipMatrix& u, const ModelState& state) {
  if (u.cols() != state.clusters()) throw ParameterError("membership columns do not match cluster count");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) {
      acc += point_term_cost(d(i, j), u(i, j), state.gamma(j), state.lambda(), state.p());
    }
  }
  return acc;
}

double total_cost(const DataSet& x, const MembershipMatrix& u, const ModelState& state) {
  check_shapes(x.size(), x.dims(), u, state);
  return total_cost(DistanceMatrix(x, state), u, state);
}

}  // namespace spcm
