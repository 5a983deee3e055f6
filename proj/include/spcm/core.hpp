#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spcm {

/// N points in R^l. Stored feature-major so the kernels can stream over
/// points; the bounding box is computed once at construction.
class DataSet {
 public:
  /// `row_major` holds n*dims values, point after point.
  /// Throws DataError on empty input, size mismatch or non-finite values.
  DataSet(std::size_t n, std::size_t dims, std::span<const double> row_major);

  static DataSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  std::size_t dims() const noexcept { return dims_; }

  double coord(std::size_t i, std::size_t q) const noexcept { return columns_[q * n_ + i]; }
  std::span<const double> column(std::size_t q) const noexcept { return {columns_.data() + q * n_, n_}; }
  /// All coordinates, feature-major (the layout kernels:: expects).
  std::span<const double> columns() const noexcept { return columns_; }
  std::vector<double> point(std::size_t i) const;

  std::span<const double> bbox_min() const noexcept { return bbox_min_; }
  std::span<const double> bbox_max() const noexcept { return bbox_max_; }
  double bbox_diagonal() const noexcept;

 private:
  std::size_t n_;
  std::size_t dims_;
  std::vector<double> columns_;
  std::vector<double> bbox_min_;
  std::vector<double> bbox_max_;
};

/// Full parameter state of one run: representatives, per-cluster gamma,
/// the global sparsity weight lambda and the exponent p.
class ModelState {
 public:
  /// `representatives` is m*dims values, row-major (one representative per row).
  /// Throws ParameterError if m == 0, any gamma <= 0, lambda < 0 or p outside (0,1).
  ModelState(std::size_t dims, std::vector<double> representatives, std::vector<double> gammas,
             double lambda, double p);

  std::size_t clusters() const noexcept { return gammas_.size(); }
  std::size_t dims() const noexcept { return dims_; }

  std::span<const double> representative(std::size_t j) const noexcept {
    return {reps_.data() + j * dims_, dims_};
  }
  std::span<const double> representatives() const noexcept { return reps_; }
  double gamma(std::size_t j) const noexcept { return gammas_[j]; }
  std::span<const double> gammas() const noexcept { return gammas_; }
  double gamma_bar() const noexcept { return gamma_bar_; }
  double lambda() const noexcept { return lambda_; }
  double p() const noexcept { return p_; }

  ModelState with_representatives(std::vector<double> representatives) const;
  ModelState with_lambda(double lambda) const;

 private:
  std::size_t dims_;
  std::vector<double> reps_;
  std::vector<double> gammas_;
  double lambda_;
  double p_;
  double gamma_bar_;
};

/// N x m degrees of compatibility, stored cluster-major (one contiguous
/// column per cluster).
class MembershipMatrix {
 public:
  MembershipMatrix(std::size_t n, std::size_t m);

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return m_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * n_ + i]; }
  /// Throws std::domain_error for values outside [0, 1].
  void set(std::size_t i, std::size_t j, double u);

  std::span<const double> column(std::size_t j) const noexcept { return {values_.data() + j * n_, n_}; }
  std::span<double> column_mut(std::size_t j) noexcept { return {values_.data() + j * n_, n_}; }

  /// Number of strictly positive entries in column j.
  std::size_t active_count(std::size_t j) const noexcept;

  bool operator==(const MembershipMatrix&) const = default;

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<double> values_;
};

/// N x m squared distances, cluster-major, filled by the kernels.
class DistanceMatrix {
 public:
  DistanceMatrix(const DataSet& x, const ModelState& state);

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * n_ + i]; }
  std::span<const double> column(std::size_t j) const noexcept { return {values_.data() + j * n_, n_}; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

/// ||x_i - point||^2 for every point of `x`.
std::vector<double> squared_distances_to(const DataSet& x, std::span<const double> point);

/// h(u; theta) = u*d + gamma*(u ln u - u) + lambda*u^p, with h(0) = 0 exactly.
/// Throws std::domain_error if u is outside [0, 1].
double point_term_cost(double d, double u, double gamma, double lambda, double p);

/// J_j: the part of the cost owned by cluster j.
double cluster_cost(const DataSet& x, const MembershipMatrix& u, const ModelState& state, std::size_t j);

/// Full sparse possibilistic cost; with lambda = 0 this is the PCM2 cost.
/// Accumulates points outer, clusters inner. Throws ParameterError on a
/// dimension mismatch.
double total_cost(const DataSet& x, const MembershipMatrix& u, const ModelState& state);

/// Same as total_cost, reusing precomputed distances.
double total_cost(const DistanceMatrix& d, const MembershipMatrix& u, const ModelState& state);

}  // namespace spcm
