#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spcm/core.hpp"

namespace spcm {

struct BlobSpec {
  std::size_t blobs = 3;
  std::size_t points_per_blob = 50;
  std::size_t dims = 2;
  double sigma = 0.1;
  /// Noise count is round(noise_fraction * blobs * points_per_blob).
  double noise_fraction = 0.0;
  /// Each side of the blob-point bounding box grows by this fraction of its extent.
  double noise_margin = 0.25;
  /// Noise points closer than this to any blob centre are redrawn.
  double noise_clearance = 0.0;
  /// Row-major blobs x dims. Empty: vertices of a regular polygon with unit
  /// side in the first two coordinates (points on a line for two blobs).
  std::vector<double> centers;
  std::uint64_t seed = 0;
};

struct BlobData {
  DataSet data;
  std::vector<int> labels;       // blob index, -1 for noise
  std::vector<double> centers;  // generator centres, row-major
};

/// Throws ParameterError for an invalid spec.
BlobData generate_blobs(const BlobSpec& spec);

/// Row-major centres on a unit-side regular polygon.
std::vector<double> polygon_centers(std::size_t blobs, std::size_t dims);

/// Sample mean of every labeled blob, row-major (noise excluded).
std::vector<double> labeled_means(const BlobData& b);

}  // namespace spcm
