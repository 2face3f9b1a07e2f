#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Squared Euclidean distance kernels used by the neighbour search.
//
// All backends accumulate in four interleaved lanes (element i goes to lane
// i % 4), reduce as (l0 + l1) + (l2 + l3), and then add the tail serially.
// With contraction disabled this makes every backend bit-identical to the
// scalar reference, so neighbour ties resolve the same way on every machine.

namespace leakaudit::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend b) noexcept;

// True when the backend was compiled in and the running CPU supports it.
bool backend_available(Backend b) noexcept;

// Backend picked at first use: the widest available one, unless the
// LEAKAUDIT_SIMD environment variable names another ("scalar", "avx2", "neon").
Backend active_backend() noexcept;

// Overrides the dispatch choice. Returns false (and changes nothing) when the
// backend is unavailable.
bool force_backend(Backend b) noexcept;

double squared_l2_scalar(const double* a, const double* b, std::size_t dim) noexcept;
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
double squared_l2_avx2(const double* a, const double* b, std::size_t dim) noexcept;
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
double squared_l2_neon(const double* a, const double* b, std::size_t dim) noexcept;
#endif

// Dispatched single-pair kernel.
double squared_l2(const double* a, const double* b, std::size_t dim) noexcept;

// out[r] = ||query - rows[r]||^2 for a row-major block of out.size() rows.
void squared_l2_to_rows(std::span<const double> query, std::span<const double> rows,
                        std::span<double> out) noexcept;

// Same as above with an explicit backend, for equivalence testing.
void squared_l2_to_rows(Backend backend, std::span<const double> query,
                        std::span<const double> rows, std::span<double> out) noexcept;

}  // namespace leakaudit::simd
