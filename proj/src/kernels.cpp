// SPDX-License-Identifier: Apache-2.0
#include "distilforge/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace distilforge::kernels {

namespace {

using Idx = std::ptrdiff_t;

// Each helper below computes one output row with a fixed inner order; the
// serial and parallel variants share them and differ only in the outer loop.

inline void matmul_row(const double* a, const double* b, double* out, std::size_t i,
                       std::size_t k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
    out[i * n + j] = acc;
  }
}

inline void matmul_at_b_row(const double* a, const double* g, double* out, std::size_t p,
                            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += a[i * k + p] * g[i * n + j];
    out[p * n + j] = acc;
  }
}

inline void matmul_a_bt_row(const double* g, const double* b, double* out, std::size_t i,
                            std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * b[p * n + j];
    out[i * k + p] = acc;
  }
}

inline void pairwise_row(const double* e, double* out, std::size_t u, std::size_t n,
                         std::size_t d) {
  for (std::size_t v = 0; v < n; ++v) {
    if (u == v) {
      out[u * n + v] = 0.0;
      continue;
    }
    // Always accumulate in (min, max) row order so out is exactly symmetric.
    const std::size_t lo = u < v ? u : v;
    const std::size_t hi = u < v ? v : u;
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = e[lo * d + c] - e[hi * d + c];
      acc += diff * diff;
    }
    out[u * n + v] = std::sqrt(acc);
  }
}

inline void angle_one(const double* e, std::size_t d, const std::array<std::size_t, 3>& t,
                      double eps, double* out, char* valid) {
  const double* su = e + t[0] * d;
  const double* sv = e + t[1] * d;
  const double* sw = e + t[2] * d;
  double na = 0.0, nb = 0.0, dot = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double a = su[c] - sv[c];
    const double b = sw[c] - sv[c];
    na += a * a;
    nb += b * b;
    dot += a * b;
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < eps || nb < eps) {
    *out = 0.0;
    *valid = 0;
    return;
  }
  double cosv = dot / (na * nb);
  // Rounding can push |cos| a hair past one.
  if (cosv > 1.0) cosv = 1.0;
  if (cosv < -1.0) cosv = -1.0;
  *out = cosv;
  *valid = 1;
}

}  // namespace

bool parallel_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_row(a.data(), b.data(), out.data(), i, k, n);
}

void matmul_at_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p)
    matmul_at_b_row(a.data(), g.data(), out.data(), p, m, k, n);
}

void matmul_a_bt(std::span<const double> g, std::span<const double> b, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_a_bt_row(g.data(), b.data(), out.data(), i, k, n);
}

void pairwise_l2(std::span<const double> e, std::span<double> out, std::size_t n, std::size_t d) {
  for (std::size_t u = 0; u < n; ++u) pairwise_row(e.data(), out.data(), u, n, d);
}

void angle_cosines(std::span<const double> e, std::size_t d,
                   std::span<const std::array<std::size_t, 3>> triples, double eps,
                   std::span<double> out, std::span<char> valid) {
  for (std::size_t i = 0; i < triples.size(); ++i)
    angle_one(e.data(), d, triples[i], eps, &out[i], &valid[i]);
}

}  // namespace serial

namespace parallel {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t m, std::size_t k, std::size_t n) {
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
#pragma omp parallel for schedule(static)
  for (Idx i = 0; i < static_cast<Idx>(m); ++i) matmul_row(pa, pb, po, std::size_t(i), k, n);
}

void matmul_at_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n) {
  const double* pa = a.data();
  const double* pg = g.data();
  double* po = out.data();
#pragma omp parallel for schedule(static)
  for (Idx p = 0; p < static_cast<Idx>(k); ++p)
    matmul_at_b_row(pa, pg, po, std::size_t(p), m, k, n);
}

void matmul_a_bt(std::span<const double> g, std::span<const double> b, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n) {
  const double* pg = g.data();
  const double* pb = b.data();
  double* po = out.data();
#pragma omp parallel for schedule(static)
  for (Idx i = 0; i < static_cast<Idx>(m); ++i) matmul_a_bt_row(pg, pb, po, std::size_t(i), k, n);
}

void pairwise_l2(std::span<const double> e, std::span<double> out, std::size_t n, std::size_t d) {
  const double* pe = e.data();
  double* po = out.data();
#pragma omp parallel for schedule(static)
  for (Idx u = 0; u < static_cast<Idx>(n); ++u) pairwise_row(pe, po, std::size_t(u), n, d);
}

void angle_cosines(std::span<const double> e, std::size_t d,
                   std::span<const std::array<std::size_t, 3>> triples, double eps,
                   std::span<double> out, std::span<char> valid) {
  const double* pe = e.data();
  const auto* pt = triples.data();
  double* po = out.data();
  char* pv = valid.data();
#pragma omp parallel for schedule(static)
  for (Idx i = 0; i < static_cast<Idx>(triples.size()); ++i)
    angle_one(pe, d, pt[i], eps, po + i, pv + i);
}

}  // namespace parallel

namespace {
bool go_parallel(std::size_t work) {
#ifdef _OPENMP
  return work >= kParallelThreshold && omp_get_max_threads() > 1;
#else
  (void)work;
  return false;
#endif
}
}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n))
    parallel::matmul(a, b, out, m, k, n);
  else
    serial::matmul(a, b, out, m, k, n);
}

void matmul_at_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n))
    parallel::matmul_at_b(a, g, out, m, k, n);
  else
    serial::matmul_at_b(a, g, out, m, k, n);
}

void matmul_a_bt(std::span<const double> g, std::span<const double> b, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n))
    parallel::matmul_a_bt(g, b, out, m, k, n);
  else
    serial::matmul_a_bt(g, b, out, m, k, n);
}

void pairwise_l2(std::span<const double> e, std::span<double> out, std::size_t n, std::size_t d) {
  if (go_parallel(n * n * d))
    parallel::pairwise_l2(e, out, n, d);
  else
    serial::pairwise_l2(e, out, n, d);
}

void angle_cosines(std::span<const double> e, std::size_t d,
                   std::span<const std::array<std::size_t, 3>> triples, double eps,
                   std::span<double> out, std::span<char> valid) {
  if (go_parallel(triples.size() * d * 3))
    parallel::angle_cosines(e, d, triples, eps, out, valid);
  else
    serial::angle_cosines(e, d, triples, eps, out, valid);
}

}  // namespace distilforge::kernels
