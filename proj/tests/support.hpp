#pragma once

// Random instances shared by the unit tests.

#include "assignflow/graph.hpp"
#include "assignflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace testing {

using namespace assignflow;

inline double uniform(std::mt19937_64 &rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector random_vector(std::mt19937_64 &rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index j = 0; j < n; ++j) {
    v(j) = uniform(rng, -scale, scale);
  }
  return v;
}

/// Interior point with entries bounded away from zero.
inline Vector random_simplex(std::mt19937_64 &rng, Index n, double spread = 2.0) {
  Vector p(n);
  for (Index j = 0; j < n; ++j) {
    p(j) = std::exp(uniform(rng, -spread, spread));
  }
  return p / p.sum();
}

inline AssignmentState random_state(std::mt19937_64 &rng, Index nodes, Index labels,
                                    double spread = 2.0) {
  RowMatrix w(nodes, labels);
  for (Index i = 0; i < nodes; ++i) {
    w.row(i) = random_simplex(rng, labels, spread).transpose();
  }
  return AssignmentState(std::move(w));
}

inline TangentField random_tangent(std::mt19937_64 &rng, Index nodes, Index labels,
                                   double scale = 1.0) {
  RowMatrix v(nodes, labels);
  for (Index i = 0; i < nodes; ++i) {
    Vector z = random_vector(rng, labels, scale);
    v.row(i) = (z.array() - z.mean()).matrix().transpose();
  }
  return TangentField(std::move(v));
}

/// Random neighborhoods (self plus up to `extra` others) with random weights.
inline LabelingGraph random_graph(std::mt19937_64 &rng, Index nodes, Index labels,
                                  Index extra = 3, double rho = 0.7) {
  std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(nodes));
  std::vector<std::vector<double>> wts(static_cast<std::size_t>(nodes));
  for (Index i = 0; i < nodes; ++i) {
    auto &n = nbrs[static_cast<std::size_t>(i)];
    n.push_back(i);
    for (Index e = 0; e < extra; ++e) {
      const Index k = static_cast<Index>(uniform(rng) * static_cast<double>(nodes)) % nodes;
      if (std::find(n.begin(), n.end(), k) == n.end()) {
        n.push_back(k);
      }
    }
    auto &w = wts[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (std::size_t k = 0; k < n.size(); ++k) {
      w.push_back(uniform(rng, 0.2, 1.0));
      sum += w.back();
    }
    for (double &x : w) {
      x /= sum;
    }
  }
  RowMatrix d(nodes, labels);
  for (Index i = 0; i < nodes; ++i) {
    for (Index j = 0; j < labels; ++j) {
      d(i, j) = uniform(rng, 0.0, 1.0);
    }
  }
  return LabelingGraph(std::move(nbrs), std::move(wts), std::move(d), rho);
}

} // namespace testing
