#include "spcm/kernels.hpp"

namespace spcm::kernels::scalar {

void squared_distances(std::span<const double> columns, std::size_t n,
                       std::span<const double> point, std::span<double> out) {
  const std::size_t dims = point.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  for (std::size_t q = 0; q < dims; ++q) {
    const double* col = columns.data() + q * n;
    const double c = point[q];
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = col[i] - c;
      out[i] += diff * diff;
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

}  // namespace spcm::kernels::scalar
