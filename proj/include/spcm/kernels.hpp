#pragma once

// Data-parallel inner loops shared by the clustering modules.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once per process from CPUID; the
// environment variable SPCM_KERNELS=scalar forces the reference path, and
// set_backend() lets tests pin either one.
//
// Point sets are passed feature-major: coordinate q of point i lives at
// columns[q * n + i]. That keeps the loops over points contiguous, which
// is where the vector lanes go (l is usually tiny, N is not).

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace spcm::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b) noexcept;

/// True when the backend was compiled in and the CPU supports it.
bool backend_available(Backend b) noexcept;

/// Backend currently used by the dispatching entry points below.
Backend active_backend() noexcept;

/// Pins the dispatching entry points to `b`, or restores automatic
/// selection for std::nullopt. Returns false (and changes nothing) if `b`
/// is unavailable. Not thread-safe against concurrent kernel calls.
bool set_backend(std::optional<Backend> b) noexcept;

// out[i] = sum_q (columns[q*n + i] - point[q])^2, for i < n.
void squared_distances(std::span<const double> columns, std::size_t n,
                       std::span<const double> point, std::span<double> out);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

double sum(std::span<const double> a);

// Reference implementations. Always available.
namespace scalar {
void squared_distances(std::span<const double> columns, std::size_t n,
                       std::span<const double> point, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
}  // namespace scalar

#if defined(SPCM_HAVE_AVX2)
// Callers must check backend_available(Backend::Avx2) first.
namespace avx2 {
void squared_distances(std::span<const double> columns, std::size_t n,
                       std::span<const double> point, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
}  // namespace avx2
#endif

}  // namespace spcm::kernels
