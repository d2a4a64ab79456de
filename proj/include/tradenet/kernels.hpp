#pragma once

// Dense double-precision inner loops used by the graph measures.
//
// Every kernel has a portable scalar reference implementation and, where the
// build target allows it, an AVX2 (x86-64) or NEON (AArch64) variant. The
// variant is chosen once at runtime from CPU capabilities; setting the
// environment variable TRADENET_ISA=scalar forces the reference path.
// Vector variants reorder floating-point sums, so they agree with the scalar
// path to rounding, not bitwise. Within one process the choice is fixed, so
// results are reproducible run to run.

#include <cstddef>
#include <span>
#include <string_view>

namespace tradenet::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view name(Isa isa);

struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // sum_j |a_j - b_j|
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  // sum_j w_j * |center - v_j|
  double (*weighted_abs_deviation)(const double* w, const double* v, double center,
                                   std::size_t n);
  // y += alpha * x
  void (*add_scaled)(double alpha, const double* x, double* y, std::size_t n);
};

const Table& scalar_table();
/// nullptr unless compiled in and supported by the running CPU.
const Table* avx2_table();
const Table* neon_table();

/// The table used by the library, selected on first call.
const Table& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  return active().l1_distance(a.data(), b.data(), a.size());
}
inline double weighted_abs_deviation(std::span<const double> w, std::span<const double> v,
                                     double center) {
  return active().weighted_abs_deviation(w.data(), v.data(), center, w.size());
}
inline void add_scaled(double alpha, std::span<const double> x, std::span<double> y) {
  active().add_scaled(alpha, x.data(), y.data(), x.size());
}

}  // namespace tradenet::kernels
