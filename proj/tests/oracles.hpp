#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the solver code paths it is compared against.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vgne/bench_games.hpp"
#include "vgne/graph.hpp"
#include "vgne/rng.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct QuadraticSolution {
  VectorXd x;
  double lambda = 0.0;
};

// f_i = 1/2 (x_i - t_i)^2 + delta x_1 x_2, x_1 + x_2 = c:
// [1 d 1; d 1 1; 1 1 0] (x1, x2, lambda) = (t1, t2, c).
inline QuadraticSolution quadratic_equality(const VectorXd& t, double delta, double c) {
  MatrixXd K(3, 3);
  K << 1, delta, 1, delta, 1, 1, 1, 1, 0;
  VectorXd rhs(3);
  rhs << t[0], t[1], c;
  VectorXd s = K.fullPivLu().solve(rhs);
  return {s.head(2), s[2]};
}

// Active-set enumeration for x_1 + x_2 <= c.
inline QuadraticSolution quadratic_inequality(const VectorXd& t, double delta, double c) {
  MatrixXd J(2, 2);
  J << 1, delta, delta, 1;
  VectorXd free = J.fullPivLu().solve(t);
  if (free.sum() <= c) return {free, 0.0};
  return quadratic_equality(t, delta, c);
}

// Hand-built V for a graph given as 0-based (source, target) pairs.
inline MatrixXd incidence(std::size_t n, const std::vector<vgne::Edge>& edges) {
  MatrixXd V = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(edges.size()));
  for (std::size_t l = 0; l < edges.size(); ++l) {
    V(static_cast<Eigen::Index>(edges[l].source), static_cast<Eigen::Index>(l)) = -1.0;
    V(static_cast<Eigen::Index>(edges[l].target), static_cast<Eigen::Index>(l)) = 1.0;
  }
  return V;
}

inline MatrixXd kron_identity(const MatrixXd& V, std::size_t m) {
  const auto mm = static_cast<Eigen::Index>(m);
  MatrixXd out = MatrixXd::Zero(V.rows() * mm, V.cols() * mm);
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    for (Eigen::Index l = 0; l < V.cols(); ++l)
      out.block(i * mm, l * mm, mm, mm) = V(i, l) * MatrixXd::Identity(mm, mm);
  return out;
}

inline VectorXd random_vector(vgne::Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = rng.uniform(lo, hi);
  return v;
}

// Central difference of a scalar function along coordinate j.
template <class F>
double central_difference(F&& f, VectorXd x, Eigen::Index j, double h) {
  const double x0 = x[j];
  x[j] = x0 + h;
  const double up = f(x);
  x[j] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

// Minimiser of step * phi(u) + (u - v)^2 / 2 over [lo, hi] by dense sampling
// followed by golden-section refinement.
template <class F>
double scalar_prox(F&& phi, double v, double step, double lo, double hi) {
  auto obj = [&](double u) { return step * phi(u) + 0.5 * (u - v) * (u - v); };
  const int n = 20000;
  double best = lo, best_val = obj(lo);
  for (int k = 1; k <= n; ++k) {
    double u = lo + (hi - lo) * k / n;
    double val = obj(u);
    if (val < best_val) best_val = val, best = u;
  }
  double a = std::max(lo, best - (hi - lo) / n), b = std::min(hi, best + (hi - lo) / n);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    double c = b - g * (b - a), d = a + g * (b - a);
    if (obj(c) < obj(d)) b = d; else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
