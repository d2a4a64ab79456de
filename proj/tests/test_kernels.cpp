#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tradenet/kernels.hpp"

using namespace tradenet::kernels;

namespace {

std::vector<const Table*> variants() {
  std::vector<const Table*> out{&scalar_table()};
  if (avx2_table()) out.push_back(avx2_table());
  if (neon_table()) out.push_back(neon_table());
  return out;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double rel_err(double a, double b, double scale) { return std::fabs(a - b) / std::max(1.0, scale); }

}  // namespace

TEST_CASE("active kernel table is one of the compiled variants") {
  const auto& t = active();
  bool found = false;
  for (const auto* v : variants()) found = found || v->isa == t.isa;
  CHECK(found);
  MESSAGE("kernels: " << name(t.isa));
}

TEST_CASE("every SIMD variant matches the scalar reference on all lengths") {
  std::mt19937_64 rng(7);
  const auto& ref = scalar_table();
  for (const auto* simd : variants()) {
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      std::vector<double> w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = std::fabs(a[i]);
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::fabs(a[i] * b[i]) + std::fabs(a[i]) + std::fabs(b[i]);
      CHECK(rel_err(simd->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), scale) < 1e-13);
      CHECK(rel_err(simd->sum(a.data(), n), ref.sum(a.data(), n), scale) < 1e-13);
      CHECK(rel_err(simd->l1_distance(a.data(), b.data(), n), ref.l1_distance(a.data(), b.data(), n), scale) < 1e-13);
      const double c = n ? b[0] : 0.5;
      CHECK(rel_err(simd->weighted_abs_deviation(w.data(), b.data(), c, n),
                    ref.weighted_abs_deviation(w.data(), b.data(), c, n), 20.0 * scale) < 1e-13);
      std::vector<double> y1 = b;
      std::vector<double> y2 = b;
      simd->add_scaled(-1.5, a.data(), y1.data(), n);
      ref.add_scaled(-1.5, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(y1[i] - y2[i]) < 1e-13);
    }
  }
}

TEST_CASE("kernels on known values") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{5, 4, 3, 2, 1};
  for (const auto* t : variants()) {
    CHECK(t->dot(a.data(), b.data(), 5) == doctest::Approx(35.0));
    CHECK(t->sum(a.data(), 5) == doctest::Approx(15.0));
    CHECK(t->l1_distance(a.data(), b.data(), 5) == doctest::Approx(12.0));
    // sum_j a_j |3 - b_j| = 1*2 + 2*1 + 0 + 4*1 + 5*2
    CHECK(t->weighted_abs_deviation(a.data(), b.data(), 3.0, 5) == doctest::Approx(18.0));
  }
}

TEST_CASE("integer-valued sums are exact in every variant") {
  std::vector<double> v(53);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(1000 * (i + 1));
  for (const auto* t : variants()) CHECK(t->sum(v.data(), v.size()) == 1000.0 * 53 * 54 / 2);
}
