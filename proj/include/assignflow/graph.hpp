#pragma once

#include "assignflow/types.hpp"

#include <span>
#include <vector>

namespace assignflow {

enum class FeatureMetric { euclidean, squared_euclidean, discrete };

/// Label prototypes g_j, one feature vector per row.
struct LabelSet {
  RowMatrix prototypes;
  FeatureMetric metric = FeatureMetric::euclidean;

  Index size() const noexcept { return prototypes.rows(); }
  Index dimension() const noexcept { return prototypes.cols(); }
};

/// D_ij = d(f_i, g_j) for feature rows f_i.
RowMatrix build_distances(const RowMatrix &features, const LabelSet &labels);

/// Neighborhoods N_i with weights w_ik, the distance matrix D and the scale rho.
///
/// Neighborhoods are stored flat with offsets. Every neighborhood contains its
/// own node and carries weights summing to one. Immutable after construction.
class LabelingGraph {
public:
  LabelingGraph(std::vector<std::vector<Index>> neighborhoods,
                std::vector<std::vector<double>> weights, RowMatrix distances, double rho);

  /// Uniform weights 1/|N_i| on the given neighborhoods.
  static LabelingGraph uniform(std::vector<std::vector<Index>> neighborhoods,
                               RowMatrix distances, double rho);

  /// Image grid with a window x window neighborhood (odd window). Windows are
  /// truncated at the border and their uniform weights renormalized.
  /// Node index is y * width + x.
  static LabelingGraph grid(Index width, Index height, Index window, RowMatrix distances,
                            double rho);

  /// 1D signal with |N_i| = window (odd), truncated at both ends.
  static LabelingGraph chain(Index length, Index window, RowMatrix distances, double rho);

  Index nodes() const noexcept { return distances_.rows(); }
  Index labels() const noexcept { return distances_.cols(); }
  double rho() const noexcept { return rho_; }
  const RowMatrix &distances() const noexcept { return distances_; }
  /// -D / rho, cached.
  const RowMatrix &scaled_data() const noexcept { return scaled_data_; }

  std::span<const Index> neighbors(Index i) const {
    return {neighbors_.data() + offsets_[i], neighbors_.data() + offsets_[i + 1]};
  }
  std::span<const double> weights(Index i) const {
    return {weights_.data() + offsets_[i], weights_.data() + offsets_[i + 1]};
  }
  bool adjacent(Index i, Index k) const;
  Index edge_count() const noexcept { return static_cast<Index>(neighbors_.size()); }

private:
  LabelingGraph() = default;
  void finalize();

  std::vector<Index> offsets_;
  std::vector<Index> neighbors_;
  std::vector<double> weights_;
  RowMatrix distances_;
  RowMatrix scaled_data_;
  double rho_ = 1.0;
};

} // namespace assignflow
