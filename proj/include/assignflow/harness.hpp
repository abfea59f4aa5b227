#pragma once

// Synthetic labeling scenarios, labeling metrics and ground-truth runs.

#include "assignflow/graph.hpp"
#include "assignflow/linsolve.hpp"
#include "assignflow/rkmk.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace assignflow {

enum class ScenarioKind { signal1d, vertex31, colorquant };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);

/// Generated (or loaded) labeling problem: one feature row per node.
struct ScenarioData {
  ScenarioKind kind = ScenarioKind::signal1d;
  Index width = 0;
  Index height = 1;
  RowMatrix features;
  LabelSet labels;
  /// Noise-free labels, when the generator knows them.
  std::vector<int> truth;
  double rho = 0.1;
  Index window = 3;

  Index nodes() const noexcept { return features.rows(); }
};

inline constexpr Index kSignalLength = 192;
inline constexpr double kSignalNoiseStd = 0.2;
inline constexpr double kVertexNoise = 0.5;

/// Piecewise-constant 3-level signal of length 192 with additive Gaussian noise.
ScenarioData gen_signal1d(std::uint64_t seed, double noise_std = kSignalNoiseStd,
                          Index window = 3);

/// 31 labels encoded as unit vectors; each pixel shows its true label with
/// probability 1 - p_noise, else a uniformly drawn other label.
ScenarioData gen_vertex31(std::uint64_t seed, Index width = 64, Index height = 64,
                          double p_noise = kVertexNoise);

/// Deterministic RGB test image in [0,1]^3 (row-major pixels, one row per
/// pixel) with smooth regions, a large flat disc and fine stripe textures.
RowMatrix synthetic_color_image(Index width, Index height);

/// Labels are k colors from seeded k-means on `image`; features are raw RGB.
ScenarioData gen_colorquant(const RowMatrix &image, Index width, Index height, Index k,
                            std::uint64_t seed = 1, Index window = 3);

/// Seeded k-means (k-means++ initialisation, Lloyd iterations).
RowMatrix kmeans(const RowMatrix &points, Index k, std::uint64_t seed, int iterations = 100);

LabelingGraph make_graph(const ScenarioData &data);

/// Per-node argmax labeling of a state.
struct LabelingResult {
  std::vector<int> labels;
  std::vector<double> confidence;
  std::size_t iterations = 0;
  double wall_time = 0.0;
};

LabelingResult labeling_of(const AssignmentState &w);
/// Nearest label per node without regularization (argmin of D).
std::vector<int> local_rounding(const RowMatrix &distances);

struct Agreement {
  std::size_t differing = 0;
  double fraction = 0.0;
};

/// Number and fraction of nodes with different labels.
Agreement label_agreement(const std::vector<int> &x, const std::vector<int> &y);
Agreement label_agreement(const LabelingResult &x, const LabelingResult &y);

/// Nonlinear flow by geometric implicit Euler (default h = 0.5).
LabelingResult ground_truth_nonlinear(const ScenarioData &data, double h = 0.5,
                                      FlowTrace *trace = nullptr);

/// Linear flow, single linearization at the barycenter, implicit Euler.
LabelingResult ground_truth_linear(const ScenarioData &data, double h = 0.5,
                                   FlowTrace *trace = nullptr);

/// Horizon T at which the exponential-integrator state has mean entropy
/// below the threshold: doubling from 1 (up to t_max), then bisection of the
/// last bracket to 5% relative resolution.
double exponential_horizon(const LinearFlowOperator &op, Index m, double threshold = 1e-3,
                           double t_max = 1024.0);

} // namespace assignflow
