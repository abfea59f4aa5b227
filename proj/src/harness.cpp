#include "assignflow/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace assignflow {
namespace {

// Platform-independent draws from the raw engine output; the standard
// distributions are not specified bit-for-bit.
double uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64 &rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) {
    u1 = uniform01(rng);
  }
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t uniform_below(std::mt19937_64 &rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
  case ScenarioKind::signal1d:
    return "signal1d";
  case ScenarioKind::vertex31:
    return "vertex31";
  case ScenarioKind::colorquant:
    return "colorquant";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (auto kind : {ScenarioKind::signal1d, ScenarioKind::vertex31, ScenarioKind::colorquant}) {
    if (name == to_string(kind)) {
      return kind;
    }
  }
  throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
}

ScenarioData gen_signal1d(std::uint64_t seed, double noise_std, Index window) {
  if (!(noise_std >= 0.0)) {
    throw InvalidArgument("gen_signal1d: noise must be nonnegative");
  }
  // (length, label) runs; lengths sum to 192.
  static constexpr std::array<std::pair<int, int>, 9> runs{
      {{20, 0}, {28, 1}, {16, 2}, {24, 0}, {12, 2}, {30, 1}, {22, 2}, {18, 0}, {22, 1}}};
  ScenarioData data;
  data.kind = ScenarioKind::signal1d;
  data.width = kSignalLength;
  data.height = 1;
  data.rho = 0.1;
  data.window = window;
  data.labels.prototypes = RowMatrix{{0.0}, {0.5}, {1.0}};
  data.labels.metric = FeatureMetric::euclidean;
  data.features.resize(kSignalLength, 1);
  std::mt19937_64 rng(seed);
  Index i = 0;
  for (const auto &[length, label] : runs) {
    for (int k = 0; k < length; ++k, ++i) {
      data.truth.push_back(label);
      data.features(i, 0) = data.labels.prototypes(label, 0) + noise_std * standard_normal(rng);
    }
  }
  return data;
}

ScenarioData gen_vertex31(std::uint64_t seed, Index width, Index height, double p_noise) {
  if (width < 6 || height < 5 || !(p_noise >= 0.0 && p_noise <= 1.0)) {
    throw InvalidArgument("gen_vertex31: need at least 6 x 5 pixels and p_noise in [0, 1]");
  }
  constexpr Index labels = 31;
  ScenarioData data;
  data.kind = ScenarioKind::vertex31;
  data.width = width;
  data.height = height;
  data.rho = 0.1;
  data.window = 7;
  data.labels.prototypes = RowMatrix::Identity(labels, labels);
  data.labels.metric = FeatureMetric::euclidean;

  // 6 x 5 tiles carry labels 1..30; a centred disc carries label 0.
  const double cx = 0.5 * static_cast<double>(width - 1);
  const double cy = 0.5 * static_cast<double>(height - 1);
  const double radius = 0.15 * static_cast<double>(std::min(width, height));
  data.truth.resize(static_cast<std::size_t>(width * height));
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      const Index tile = (y * 5 / height) * 6 + (x * 6 / width);
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const bool disc = dx * dx + dy * dy <= radius * radius;
      data.truth[static_cast<std::size_t>(y * width + x)] = disc ? 0 : static_cast<int>(tile + 1);
    }
  }

  std::mt19937_64 rng(seed);
  data.features = RowMatrix::Zero(width * height, labels);
  for (Index i = 0; i < width * height; ++i) {
    int observed = data.truth[static_cast<std::size_t>(i)];
    if (uniform01(rng) < p_noise) {
      const auto other = static_cast<int>(uniform_below(rng, labels - 1));
      observed = other >= observed ? other + 1 : other;
    }
    data.features(i, observed) = 1.0;
  }
  return data;
}

RowMatrix synthetic_color_image(Index width, Index height) {
  RowMatrix img(width * height, 3);
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(width);
      const double v = static_cast<double>(y) / static_cast<double>(height);
      Eigen::RowVector3d c(0.25 + 0.35 * v, 0.45 + 0.25 * u, 0.85 - 0.3 * v);
      const double dx = u - 0.35;
      const double dy = v - 0.42;
      if (dx * dx + dy * dy < 0.22 * 0.22) {
        c = {0.85, 0.2, 0.15};
      } else if (u > 0.55 && v > 0.55) {
        c = (x / 2 + y) % 3 == 0 ? Eigen::RowVector3d(0.95, 0.85, 0.2)
                                 : Eigen::RowVector3d(0.15, 0.12, 0.4);
      } else if (u > 0.62 && v < 0.38) {
        c = ((x / 2) + (y / 2)) % 2 == 0 ? Eigen::RowVector3d(0.2, 0.65, 0.3)
                                         : Eigen::RowVector3d(0.9, 0.9, 0.85);
      } else if (std::abs((u - 0.05) - (v - 0.6)) < 0.6 / static_cast<double>(width) && v > 0.6) {
        c = {0.1, 0.1, 0.1};
      }
      img.row(y * width + x) = c;
    }
  }
  return img;
}

RowMatrix kmeans(const RowMatrix &points, Index k, std::uint64_t seed, int iterations) {
  const Index n = points.rows();
  if (k < 1 || n < k) {
    throw InvalidArgument("kmeans: need 1 <= k <= number of points");
  }
  std::mt19937_64 rng(seed);
  RowMatrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n))));
  Vector nearest = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index pick = 0;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= nearest(pick);
        if (target < 0.0) {
          break;
        }
      }
    }
    centers.row(c) = points.row(pick);
    nearest = nearest.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<Index> assignment(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (assignment[static_cast<std::size_t>(i)] != best) {
        assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) {
      break;
    }
    RowMatrix sums = RowMatrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
  }

  // Canonical order by brightness, then lexicographically.
  std::vector<Index> order(static_cast<std::size_t>(k));
  for (Index c = 0; c < k; ++c) {
    order[static_cast<std::size_t>(c)] = c;
  }
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double sa = centers.row(a).sum();
    const double sb = centers.row(b).sum();
    if (sa != sb) {
      return sa < sb;
    }
    return std::lexicographical_compare(centers.row(a).begin(), centers.row(a).end(),
                                        centers.row(b).begin(), centers.row(b).end());
  });
  RowMatrix sorted(k, points.cols());
  for (Index c = 0; c < k; ++c) {
    sorted.row(c) = centers.row(order[static_cast<std::size_t>(c)]);
  }
  return sorted;
}

ScenarioData gen_colorquant(const RowMatrix &image, Index width, Index height, Index k,
                            std::uint64_t seed, Index window) {
  if (image.rows() != width * height || image.cols() != 3) {
    throw InvalidArgument("gen_colorquant: image must have width * height RGB rows");
  }
  ScenarioData data;
  data.kind = ScenarioKind::colorquant;
  data.width = width;
  data.height = height;
  data.rho = 0.5;
  data.window = window;
  data.features = image;
  data.labels.prototypes = kmeans(image, k, seed);
  data.labels.metric = FeatureMetric::euclidean;
  return data;
}

LabelingGraph make_graph(const ScenarioData &data) {
  RowMatrix d = build_distances(data.features, data.labels);
  if (data.height <= 1) {
    return LabelingGraph::chain(data.nodes(), data.window, std::move(d), data.rho);
  }
  return LabelingGraph::grid(data.width, data.height, data.window, std::move(d), data.rho);
}

LabelingResult labeling_of(const AssignmentState &w) {
  LabelingResult r;
  r.labels.resize(static_cast<std::size_t>(w.nodes()));
  r.confidence.resize(static_cast<std::size_t>(w.nodes()));
  for (Index i = 0; i < w.nodes(); ++i) {
    Index best = 0;
    r.confidence[static_cast<std::size_t>(i)] = w.row(i).maxCoeff(&best);
    r.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return r;
}

std::vector<int> local_rounding(const RowMatrix &distances) {
  std::vector<int> out(static_cast<std::size_t>(distances.rows()));
  for (Index i = 0; i < distances.rows(); ++i) {
    Index best = 0;
    distances.row(i).minCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Agreement label_agreement(const std::vector<int> &x, const std::vector<int> &y) {
  if (x.size() != y.size()) {
    throw InvalidArgument("label_agreement: labelings have different sizes");
  }
  Agreement a;
  for (std::size_t i = 0; i < x.size(); ++i) {
    a.differing += x[i] != y[i] ? 1U : 0U;
  }
  a.fraction = x.empty() ? 0.0 : static_cast<double>(a.differing) / static_cast<double>(x.size());
  return a;
}

Agreement label_agreement(const LabelingResult &x, const LabelingResult &y) {
  return label_agreement(x.labels, y.labels);
}

LabelingResult ground_truth_nonlinear(const ScenarioData &data, double h, FlowTrace *trace) {
  const auto start = std::chrono::steady_clock::now();
  const LabelingGraph g = make_graph(data);
  FlowTrace run = integrate_fixed(tableau("be"), AssignmentState::barycenter(g.nodes(), g.labels()),
                                  g, h);
  LabelingResult r = labeling_of(run.final_state);
  r.iterations = run.iterations();
  r.wall_time = seconds_since(start);
  if (trace) {
    *trace = std::move(run);
  }
  return r;
}

LabelingResult ground_truth_linear(const ScenarioData &data, double h, FlowTrace *trace) {
  const auto start = std::chrono::steady_clock::now();
  const LabelingGraph g = make_graph(data);
  const LinearFlowOperator op =
      LinearFlowOperator::build(AssignmentState::barycenter(g.nodes(), g.labels()), g);
  LinearImplicitOptions options;
  options.h = h;
  FlowTrace run = integrate_linear_implicit(op, options);
  LabelingResult r = labeling_of(run.final_state);
  r.iterations = run.iterations();
  r.wall_time = seconds_since(start);
  if (trace) {
    *trace = std::move(run);
  }
  return r;
}

double exponential_horizon(const LinearFlowOperator &op, Index m, double threshold,
                           double t_max) {
  auto entropy_at = [&](double t) { return entropy_avg(exponential_integrator(op, t, m).state); };
  double hi = 1.0;
  while (entropy_at(hi) >= threshold) {
    if (hi >= t_max) {
      throw InvalidArgument("exponential_horizon: entropy threshold not reached below t_max");
    }
    hi = std::min(2.0 * hi, t_max);
  }
  if (hi == 1.0) {
    return hi;
  }
  double lo = hi / 2.0;
  while (hi - lo > 0.05 * lo) {
    const double mid = 0.5 * (lo + hi);
    (entropy_at(mid) < threshold ? hi : lo) = mid;
  }
  return hi;
}

} // namespace assignflow
