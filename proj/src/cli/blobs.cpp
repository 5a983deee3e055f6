#include "spcm/blobs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spcm/error.hpp"

namespace spcm {

std::vector<double> polygon_centers(std::size_t blobs, std::size_t dims) {
  std::vector<double> c(blobs * dims, 0.0);
  if (blobs <= 2 || dims == 1) {
    for (std::size_t b = 0; b < blobs; ++b) c[b * dims] = static_cast<double>(b);
    return c;
  }
  const double step = 2.0 * std::numbers::pi / static_cast<double>(blobs);
  const double r = 0.5 / std::sin(step / 2.0);
  for (std::size_t b = 0; b < blobs; ++b) {
    c[b * dims] = r * std::cos(step * static_cast<double>(b));
    c[b * dims + 1] = r * std::sin(step * static_cast<double>(b));
  }
  return c;
}

BlobData generate_blobs(const BlobSpec& spec) {
  if (spec.blobs < 1) throw ParameterError("at least one blob is required");
  if (spec.points_per_blob < 1) throw ParameterError("points per blob must be >= 1");
  if (spec.dims < 1) throw ParameterError("dims must be >= 1");
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) throw ParameterError("sigma must be positive");
  if (!(spec.noise_fraction >= 0.0 && spec.noise_fraction < 1.0)) {
    throw ParameterError("noise fraction must lie in [0, 1)");
  }
  if (!(spec.noise_margin >= 0.0)) throw ParameterError("noise margin must be >= 0");
  if (!(spec.noise_clearance >= 0.0)) throw ParameterError("noise clearance must be >= 0");
  if (!spec.centers.empty() && spec.centers.size() != spec.blobs * spec.dims) {
    throw ParameterError("expected " + std::to_string(spec.blobs * spec.dims) + " centre coordinates, got " +
                         std::to_string(spec.centers.size()));
  }

  const std::size_t l = spec.dims;
  const auto centers = spec.centers.empty() ? polygon_centers(spec.blobs, l) : spec.centers;
  const std::size_t blob_total = spec.blobs * spec.points_per_blob;
  const auto noise = static_cast<std::size_t>(std::llround(spec.noise_fraction * static_cast<double>(blob_total)));

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma);
  std::vector<double> rows;
  rows.reserve((blob_total + noise) * l);
  std::vector<int> labels;
  labels.reserve(blob_total + noise);

  for (std::size_t b = 0; b < spec.blobs; ++b) {
    for (std::size_t i = 0; i < spec.points_per_blob; ++i) {
      for (std::size_t q = 0; q < l; ++q) rows.push_back(centers[b * l + q] + normal(rng));
      labels.push_back(static_cast<int>(b));
    }
  }

  if (noise > 0) {
    std::vector<double> lo(l, INFINITY);
    std::vector<double> hi(l, -INFINITY);
    for (std::size_t i = 0; i < blob_total; ++i) {
      for (std::size_t q = 0; q < l; ++q) {
        lo[q] = std::min(lo[q], rows[i * l + q]);
        hi[q] = std::max(hi[q], rows[i * l + q]);
      }
    }
    for (std::size_t q = 0; q < l; ++q) {
      const double grow = spec.noise_margin * std::max(hi[q] - lo[q], spec.sigma);
      lo[q] -= grow;
      hi[q] += grow;
    }
    std::vector<std::uniform_real_distribution<double>> axis;
    for (std::size_t q = 0; q < l; ++q) axis.emplace_back(lo[q], hi[q]);

    const double clear2 = spec.noise_clearance * spec.noise_clearance;
    std::vector<double> pt(l);
    for (std::size_t k = 0; k < noise; ++k) {
      for (int attempt = 0;; ++attempt) {
        if (attempt == 100000) throw ParameterError("noise clearance leaves no room inside the noise box");
        for (std::size_t q = 0; q < l; ++q) pt[q] = axis[q](rng);
        bool clear = true;
        for (std::size_t b = 0; b < spec.blobs && clear; ++b) {
          double s = 0.0;
          for (std::size_t q = 0; q < l; ++q) s += (pt[q] - centers[b * l + q]) * (pt[q] - centers[b * l + q]);
          clear = s >= clear2;
        }
        if (clear) break;
      }
      rows.insert(rows.end(), pt.begin(), pt.end());
      labels.push_back(-1);
    }
  }

  return {DataSet(labels.size(), l, rows), std::move(labels), centers};
}

std::vector<double> labeled_means(const BlobData& b) {
  int blobs = 0;
  for (int v : b.labels) blobs = std::max(blobs, v + 1);
  const std::size_t l = b.data.dims();
  std::vector<double> sum(static_cast<std::size_t>(blobs) * l, 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(blobs), 0);
  for (std::size_t i = 0; i < b.labels.size(); ++i) {
    if (b.labels[i] < 0) continue;
    const auto k = static_cast<std::size_t>(b.labels[i]);
    ++count[k];
    for (std::size_t q = 0; q < l; ++q) sum[k * l + q] += b.data.coord(i, q);
  }
  for (std::size_t k = 0; k < count.size(); ++k) {
    for (std::size_t q = 0; q < l; ++q) sum[k * l + q] /= static_cast<double>(std::max<std::size_t>(count[k], 1));
  }
  return sum;
}

}  // namespace spcm
