#include "assignflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace assignflow {

RowMatrix build_distances(const RowMatrix &features, const LabelSet &labels) {
  if (features.cols() != labels.dimension()) {
    throw InvalidArgument("build_distances: features have dimension " +
                          std::to_string(features.cols()) + ", labels " +
                          std::to_string(labels.dimension()));
  }
  if (labels.size() < 1) {
    throw InvalidArgument("build_distances: empty label set");
  }
  RowMatrix d(features.rows(), labels.size());
  for (Index i = 0; i < features.rows(); ++i) {
    for (Index j = 0; j < labels.size(); ++j) {
      const double sq = (features.row(i) - labels.prototypes.row(j)).squaredNorm();
      switch (labels.metric) {
      case FeatureMetric::euclidean:
        d(i, j) = std::sqrt(sq);
        break;
      case FeatureMetric::squared_euclidean:
        d(i, j) = sq;
        break;
      case FeatureMetric::discrete:
        d(i, j) = sq == 0.0 ? 0.0 : 1.0;
        break;
      }
    }
  }
  return d;
}

LabelingGraph::LabelingGraph(std::vector<std::vector<Index>> neighborhoods,
                             std::vector<std::vector<double>> weights, RowMatrix distances,
                             double rho) {
  const auto n = static_cast<Index>(neighborhoods.size());
  if (distances.rows() != n || weights.size() != neighborhoods.size()) {
    throw InvalidArgument("LabelingGraph: neighborhoods, weights and distances disagree in size");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw InvalidArgument("LabelingGraph: rho must be positive");
  }
  if (!distances.allFinite() || (distances.size() > 0 && distances.minCoeff() < 0.0)) {
    throw InvalidArgument("LabelingGraph: distances must be finite and nonnegative");
  }
  offsets_.reserve(neighborhoods.size() + 1);
  offsets_.push_back(0);
  for (Index i = 0; i < n; ++i) {
    const auto &nb = neighborhoods[i];
    const auto &w = weights[i];
    if (nb.size() != w.size()) {
      throw InvalidArgument("LabelingGraph: node " + std::to_string(i) +
                            " has mismatched neighbor and weight counts");
    }
    if (std::find(nb.begin(), nb.end(), i) == nb.end()) {
      throw InvalidArgument("LabelingGraph: node " + std::to_string(i) +
                            " is missing from its own neighborhood");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] < 0 || nb[k] >= n) {
        throw InvalidArgument("LabelingGraph: neighbor index out of range");
      }
      if (!(w[k] > 0.0)) {
        throw InvalidArgument("LabelingGraph: weights must be positive");
      }
      total += w[k];
    }
    if (std::abs(total - 1.0) > 1e-10) {
      throw InvalidArgument("LabelingGraph: weights of node " + std::to_string(i) +
                            " do not sum to one");
    }
    neighbors_.insert(neighbors_.end(), nb.begin(), nb.end());
    weights_.insert(weights_.end(), w.begin(), w.end());
    offsets_.push_back(static_cast<Index>(neighbors_.size()));
  }
  distances_ = std::move(distances);
  rho_ = rho;
  finalize();
}

void LabelingGraph::finalize() { scaled_data_ = -distances_ / rho_; }

LabelingGraph LabelingGraph::uniform(std::vector<std::vector<Index>> neighborhoods,
                                     RowMatrix distances, double rho) {
  std::vector<std::vector<double>> weights;
  weights.reserve(neighborhoods.size());
  for (const auto &nb : neighborhoods) {
    weights.emplace_back(nb.size(), nb.empty() ? 0.0 : 1.0 / static_cast<double>(nb.size()));
  }
  return LabelingGraph(std::move(neighborhoods), std::move(weights), std::move(distances), rho);
}

LabelingGraph LabelingGraph::grid(Index width, Index height, Index window, RowMatrix distances,
                                  double rho) {
  if (width < 1 || height < 1 || window < 1 || window % 2 == 0) {
    throw InvalidArgument("LabelingGraph::grid: need positive size and odd window");
  }
  if (distances.rows() != width * height) {
    throw InvalidArgument("LabelingGraph::grid: distance rows must equal width * height");
  }
  const Index r = window / 2;
  std::vector<std::vector<Index>> nbs(static_cast<std::size_t>(width * height));
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      auto &nb = nbs[static_cast<std::size_t>(y * width + x)];
      for (Index yy = std::max<Index>(0, y - r); yy <= std::min(height - 1, y + r); ++yy) {
        for (Index xx = std::max<Index>(0, x - r); xx <= std::min(width - 1, x + r); ++xx) {
          nb.push_back(yy * width + xx);
        }
      }
    }
  }
  return uniform(std::move(nbs), std::move(distances), rho);
}

LabelingGraph LabelingGraph::chain(Index length, Index window, RowMatrix distances, double rho) {
  return grid(length, 1, window, std::move(distances), rho);
}

bool LabelingGraph::adjacent(Index i, Index k) const {
  const auto nb = neighbors(i);
  return std::find(nb.begin(), nb.end(), k) != nb.end();
}

} // namespace assignflow
