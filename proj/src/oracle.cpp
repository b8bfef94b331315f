// SPDX-License-Identifier: Apache-2.0
#include "distilforge/oracle.hpp"

#include <cmath>

namespace distilforge::oracle {

namespace {

constexpr double kEps = 1e-8;

double dist(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
  return std::sqrt(s);
}

std::vector<double> softmax(const std::vector<double>& z, double t) {
  double mx = z[0];
  for (double v : z) mx = v > mx ? v : mx;
  std::vector<double> p(z.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) denom += std::exp((z[i] - mx) / t);
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp((z[i] - mx) / t) / denom;
  return p;
}

std::vector<double> distance_potentials(const Rows& e) {
  const std::size_t n = e.size();
  std::vector<double> d;
  double total = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v) {
        const double duv = dist(e[u], e[v]);
        d.push_back(duv < kEps ? 0.0 : duv);
        total += d.back();
      }
  const double pi = total / static_cast<double>(d.size());
  for (double& x : d) x = pi < kEps ? 0.0 : x / pi;
  return d;
}

// cos of the angle at v, or NaN when undefined.
double cosine(const Rows& e, std::size_t u, std::size_t v, std::size_t w) {
  const double a = dist(e[u], e[v]);
  const double b = dist(e[w], e[v]);
  if (a < kEps || b < kEps) return std::nan("");
  double dot = 0.0;
  for (std::size_t c = 0; c < e[v].size(); ++c) dot += (e[u][c] - e[v][c]) * (e[w][c] - e[v][c]);
  const double cosv = dot / (a * b);
  return cosv > 1.0 ? 1.0 : (cosv < -1.0 ? -1.0 : cosv);
}

}  // namespace

Rows to_rows(const Tensor& t) {
  Rows out(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out[r][c] = t.at(r, c);
  return out;
}

double cross_entropy(const Rows& logits, const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    total -= std::log(softmax(logits[i], 1.0)[labels[i]]);
  return total / static_cast<double>(logits.size());
}

double kl(const Rows& student, const Rows& teacher, double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const auto p = softmax(student[i], t);
    const auto q = softmax(teacher[i], t);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (q[j] > 0.0) total += q[j] * std::log(q[j] / p[j]);
  }
  return total / static_cast<double>(student.size());
}

double huber(double a, double b) {
  const double r = a > b ? a - b : b - a;
  if (r <= 1.0) return 0.5 * r * r;
  return r - 0.5;
}

double distance_loss(const Rows& a, const Rows& b) {
  const auto pa = distance_potentials(a);
  const auto pb = distance_potentials(b);
  double total = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) total += huber(pa[i], pb[i]);
  return total / static_cast<double>(pa.size());
}

double angle_loss(const Rows& a, const Rows& b) {
  const std::size_t n = a.size();
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t w = 0; w < n; ++w) {
        if (u == v || v == w || u == w) continue;
        const double ca = cosine(a, u, v, w);
        const double cb = cosine(b, u, v, w);
        if (std::isnan(ca) || std::isnan(cb)) continue;
        total += huber(ca, cb);
        ++used;
      }
  return used ? total / static_cast<double>(used) : 0.0;
}

double relation_loss(const Rows& a, const Rows& b, double beta1) {
  return distance_loss(a, b) + beta1 * angle_loss(a, b);
}

}  // namespace distilforge::oracle
