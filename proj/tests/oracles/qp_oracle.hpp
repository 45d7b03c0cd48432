#pragma once

// Independent reference solvers for the SVM tests. Nothing here calls into
// samaqm::svm beyond the Sample type: the kernel, the dual objective and the
// QP solver are reimplemented from their textbook definitions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "samaqm/rng.hpp"
#include "samaqm/svm.hpp"

namespace oracle {

using samaqm::svm::Features;
using samaqm::svm::Sample;

inline double rbf(const Features& x, const Features& z, double gamma) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - z[k]) * (x[k] - z[k]);
  return std::exp(-gamma * s);
}

/// Q_ij = y_i y_j K(x_i, x_j), row-major.
inline std::vector<double> signed_gram(const std::vector<Sample>& data, double gamma) {
  const std::size_t n = data.size();
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q[i * n + j] = data[i].y * data[j].y * rbf(data[i].x, data[j].x, gamma);
  return q;
}

/// W(alpha) = sum alpha - 1/2 alpha' Q alpha.
inline double dual(const std::vector<double>& q, const std::vector<double>& a) {
  const std::size_t n = a.size();
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < n; ++j) quad += a[i] * q[i * n + j] * a[j];
  }
  return lin - 0.5 * quad;
}

/// Euclidean projection onto {0 <= a <= C, y'a = 0}. The projection is
/// clip(z - nu y, 0, C) for the nu that zeroes y'a; y'a is monotone in nu,
/// so bisection finds it.
inline std::vector<double> project(const std::vector<double>& z, const std::vector<Sample>& data,
                                   double C) {
  const std::size_t n = z.size();
  auto at = [&](double nu, std::vector<double>& out) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::clamp(z[i] - nu * data[i].y, 0.0, C);
      s += data[i].y * out[i];
    }
    return s;
  };
  std::vector<double> out(n);
  double lo = -1.0, hi = 1.0;
  while (at(lo, out) < 0.0) lo *= 2.0;
  while (at(hi, out) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at(mid, out) > 0.0 ? lo : hi) = mid;
  }
  at(0.5 * (lo + hi), out);
  return out;
}

struct QpSolution {
  std::vector<double> alpha;
  double objective = 0.0;
  double bias = 0.0;
};

/// Maximizes the C-SVM dual with accelerated projected gradient ascent
/// (FISTA with restarts), then recovers the bias from free multipliers or,
/// failing that, the midpoint of the KKT bracket.
inline QpSolution solve_dual(const std::vector<Sample>& data, double C, double gamma,
                             int iterations = 40000) {
  const std::size_t n = data.size();
  const auto q = signed_gram(data, gamma);
  // Step 1/L with L bounding the largest eigenvalue (row-sum bound).
  double lip = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(q[i * n + j]);
    lip = std::max(lip, row);
  }
  const double step = 1.0 / lip;

  std::vector<double> a(n, 0.0), prev = a, y = a, grad(n), z(n);
  double t = 1.0;
  double best = dual(q, a);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double g = 1.0;
      for (std::size_t j = 0; j < n; ++j) g -= q[i * n + j] * y[j];
      grad[i] = g;
      z[i] = y[i] + step * g;
    }
    prev = a;
    a = project(z, data, C);
    const double obj = dual(q, a);
    if (obj < best) {
      // Objective went down: restart the momentum.
      t = 1.0;
      y = a;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + (t - 1.0) / t_next * (a[i] - prev[i]);
      t = t_next;
    }
    best = std::max(best, obj);
  }

  QpSolution out;
  out.alpha = a;
  out.objective = dual(q, a);

  // g_i = sum_j alpha_j y_j K_ij, so f(x_i) = g_i + b.
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i] += a[j] * data[j].y * rbf(data[i].x, data[j].x, gamma);
  const double eps = 1e-6 * C;
  double sum = 0.0;
  int free_count = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double edge = data[i].y - g[i];
    if (a[i] > eps && a[i] < C - eps) {
      sum += edge;
      ++free_count;
    } else if ((data[i].y > 0) == (a[i] <= eps)) {
      lower = std::max(lower, edge);
    } else {
      upper = std::min(upper, edge);
    }
  }
  if (free_count > 0)
    out.bias = sum / free_count;
  else if (std::isfinite(lower) && std::isfinite(upper))
    out.bias = 0.5 * (lower + upper);
  else
    out.bias = std::isfinite(lower) ? lower : upper;
  return out;
}

/// f(x) under the oracle solution.
inline double decision(const std::vector<Sample>& data, const QpSolution& s, double gamma,
                       const Features& x) {
  double f = s.bias;
  for (std::size_t i = 0; i < data.size(); ++i) f += s.alpha[i] * data[i].y * rbf(data[i].x, x, gamma);
  return f;
}

/// Two points of opposite label at squared distance d2: the dual reduces to
/// max 2a - a^2 (1 - k) with k = exp(-gamma d2), so a = 1 / (1 - k) unless
/// the box clips it. By symmetry the bias is 0.
inline double two_point_alpha(double gamma, double d2, double C) {
  const double k = std::exp(-gamma * d2);
  return std::min(C, 1.0 / (1.0 - k));
}

/// Random 5-dim dataset in the unit cube with both labels present.
inline std::vector<Sample> random_dataset(std::size_t n, samaqm::RngStream& rng) {
  std::vector<Sample> data(n);
  while (true) {
    bool pos = false, neg = false;
    for (auto& s : data) {
      for (double& v : s.x) v = rng.uniform();
      s.y = rng.bernoulli(0.5) ? 1 : -1;
      (s.y > 0 ? pos : neg) = true;
    }
    if (pos && neg) return data;
  }
}

}  // namespace oracle
