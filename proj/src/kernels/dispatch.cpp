#include <atomic>
#include <cstdlib>
#include <string_view>

#include "spcm/kernels.hpp"

namespace spcm::kernels {

namespace {

struct Table {
  Backend backend;
  void (*squared_distances)(std::span<const double>, std::size_t, std::span<const double>, std::span<double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*sum)(std::span<const double>);
};

constexpr Table kScalar{Backend::Scalar, &scalar::squared_distances, &scalar::dot, &scalar::sum};
#if defined(SPCM_HAVE_AVX2)
constexpr Table kAvx2{Backend::Avx2, &avx2::squared_distances, &avx2::dot, &avx2::sum};
#endif

bool cpu_has_avx2() noexcept {
#if defined(SPCM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* table_for(Backend b) noexcept {
#if defined(SPCM_HAVE_AVX2)
  if (b == Backend::Avx2) return &kAvx2;
#endif
  (void)b;
  return &kScalar;
}

const Table* automatic_table() noexcept {
  if (const char* env = std::getenv("SPCM_KERNELS"); env != nullptr && std::string_view(env) == "scalar") {
    return &kScalar;
  }
  return backend_available(Backend::Avx2) ? table_for(Backend::Avx2) : &kScalar;
}

std::atomic<const Table*>& current() noexcept {
  static std::atomic<const Table*> t{automatic_table()};
  return t;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) noexcept {
  if (b == Backend::Scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed)->backend; }

bool set_backend(std::optional<Backend> b) noexcept {
  if (!b) {
    current().store(automatic_table(), std::memory_order_relaxed);
    return true;
  }
  if (!backend_available(*b)) return false;
  current().store(table_for(*b), std::memory_order_relaxed);
  return true;
}

void squared_distances(std::span<const double> columns, std::size_t n,
                       std::span<const double> point, std::span<double> out) {
  current().load(std::memory_order_relaxed)->squared_distances(columns, n, point, out);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return current().load(std::memory_order_relaxed)->dot(a, b);
}

double sum(std::span<const double> a) { return current().load(std::memory_order_relaxed)->sum(a); }

}  // namespace spcm::kernels
