// SPDX-License-Identifier: Apache-2.0
//
// Hot loops behind the tensor ops. `serial` is the reference; `parallel`
// splits the outer loop across OpenMP threads while keeping every output
// element's reduction order identical, so both produce the same bits.
// The unqualified entry points dispatch on problem size.
#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace distilforge::kernels {

/// True when the library was compiled with OpenMP.
bool parallel_available();

/// Work (multiply-adds) below which dispatch stays serial.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

namespace serial {

// out[m x n] = a[m x k] * b[k x n]
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t m, std::size_t k, std::size_t n);
// out[k x n] = a[m x k]^T * g[m x n]
void matmul_at_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n);
// out[m x k] = g[m x n] * b[k x n]^T
void matmul_a_bt(std::span<const double> g, std::span<const double> b, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n);
// out[n x n] distances between rows of e[n x d]
void pairwise_l2(std::span<const double> e, std::span<double> out, std::size_t n, std::size_t d);
// one cosine per (u, v, w); valid[i] = 0 when |e_u - e_v| or |e_w - e_v| < eps
void angle_cosines(std::span<const double> e, std::size_t d,
                   std::span<const std::array<std::size_t, 3>> triples, double eps,
                   std::span<double> out, std::span<char> valid);

}  // namespace serial

namespace parallel {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_at_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n);
void matmul_a_bt(std::span<const double> g, std::span<const double> b, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n);
void pairwise_l2(std::span<const double> e, std::span<double> out, std::size_t n, std::size_t d);
void angle_cosines(std::span<const double> e, std::size_t d,
                   std::span<const std::array<std::size_t, 3>> triples, double eps,
                   std::span<double> out, std::span<char> valid);

}  // namespace parallel

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_at_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n);
void matmul_a_bt(std::span<const double> g, std::span<const double> b, std::span<double> out,
                 std::size_t m, std::size_t k, std::size_t n);
void pairwise_l2(std::span<const double> e, std::span<double> out, std::size_t n, std::size_t d);
void angle_cosines(std::span<const double> e, std::size_t d,
                   std::span<const std::array<std::size_t, 3>> triples, double eps,
                   std::span<double> out, std::span<char> valid);

}  // namespace distilforge::kernels
