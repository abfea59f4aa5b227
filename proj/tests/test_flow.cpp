#include "assignflow/flow.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace assignflow;

namespace {

double max_abs(const RowMatrix &m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("build_distances") {
  LabelSet two;
  two.prototypes = RowMatrix{{0.0, 0.0}, {3.0, 4.0}};
  const RowMatrix f{{0.0, 0.0}, {3.0, 0.0}};
  const RowMatrix d = build_distances(f, two);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == doctest::Approx(5.0));
  CHECK(d(1, 0) == doctest::Approx(3.0));
  CHECK(d(1, 1) == doctest::Approx(4.0));

  two.metric = FeatureMetric::squared_euclidean;
  CHECK(build_distances(f, two)(0, 1) == doctest::Approx(25.0));
  two.metric = FeatureMetric::discrete;
  const RowMatrix disc = build_distances(f, two);
  CHECK(disc(0, 0) == 0.0);
  CHECK(disc(1, 0) == 1.0);

  LabelSet vertices;
  vertices.prototypes = RowMatrix::Identity(31, 31);
  RowMatrix noisy = RowMatrix::Zero(2, 31);
  noisy(0, 4) = 1.0;
  noisy(1, 7) = 0.9;
  noisy(1, 8) = 0.1;
  const RowMatrix dv = build_distances(noisy, vertices);
  for (Index j = 0; j < 31; ++j) {
    CHECK(dv(0, j) == doctest::Approx(j == 4 ? 0.0 : std::sqrt(2.0)));
    double s = 0.0;
    for (Index c = 0; c < 31; ++c) {
      const double diff = noisy(1, c) - (c == j ? 1.0 : 0.0);
      s += diff * diff;
    }
    CHECK(dv(1, j) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
  }

  CHECK_THROWS_AS(build_distances(RowMatrix::Zero(2, 3), two), InvalidArgument);
}

TEST_CASE("graph construction") {
  const RowMatrix d = RowMatrix::Constant(12, 2, 0.5);
  const LabelingGraph g = LabelingGraph::grid(4, 3, 3, d, 1.0);
  CHECK(g.neighbors(0).size() == 4);
  CHECK(g.neighbors(5).size() == 9);
  CHECK(g.neighbors(4).size() == 6);
  for (Index i = 0; i < g.nodes(); ++i) {
    double s = 0.0;
    bool self = false;
    for (std::size_t k = 0; k < g.neighbors(i).size(); ++k) {
      s += g.weights(i)[k];
      self = self || g.neighbors(i)[k] == i;
      CHECK(g.weights(i)[k] == doctest::Approx(1.0 / static_cast<double>(g.neighbors(i).size())));
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(self);
  }
  CHECK(g.adjacent(5, 0));
  CHECK_FALSE(g.adjacent(0, 10));

  const LabelingGraph chain = LabelingGraph::chain(5, 5, RowMatrix::Zero(5, 2), 1.0);
  CHECK(chain.neighbors(0).size() == 3);
  CHECK(chain.neighbors(2).size() == 5);

  const RowMatrix d2 = RowMatrix::Zero(2, 2);
  CHECK_THROWS_AS(LabelingGraph({{0, 1}, {1}}, {{0.5, 0.6}, {1.0}}, d2, 1.0), InvalidArgument);
  CHECK_THROWS_AS(LabelingGraph({{1}, {1}}, {{1.0}, {1.0}}, d2, 1.0), InvalidArgument);
  CHECK_THROWS_AS(LabelingGraph::uniform({{0}, {1}}, RowMatrix{{0.0, -1.0}, {0.0, 0.0}}, 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(LabelingGraph::uniform({{0}, {1}}, d2, 0.0), InvalidArgument);
  CHECK_THROWS_AS(LabelingGraph::grid(4, 3, 2, d, 1.0), InvalidArgument);
}

TEST_CASE("likelihood") {
  std::mt19937_64 rng(21);
  const AssignmentState w = testing::random_state(rng, 3, 4);
  const LabelingGraph flat = LabelingGraph::uniform({{0}, {1}, {2}}, RowMatrix::Constant(3, 4, 0.7), 0.3);
  CHECK(max_abs(likelihood(w, flat).values() - w.values()) < 1e-15);

  const LabelingGraph two = LabelingGraph::uniform({{0}}, RowMatrix{{0.0, std::log(2.0)}}, 1.0);
  const AssignmentState lik = likelihood(AssignmentState::barycenter(1, 2), two);
  CHECK(lik.row(0)(0) == doctest::Approx(2.0 / 3.0));
  CHECK(lik.row(0)(1) == doctest::Approx(1.0 / 3.0));

  const LabelingGraph g = testing::random_graph(rng, 3, 4, 2, 1e6);
  CHECK(max_abs(likelihood(w, g).values() - w.values()) < 1e-6);
}

TEST_CASE("similarity") {
  std::mt19937_64 rng(22);
  const AssignmentState w = testing::random_state(rng, 4, 3);
  const LabelingGraph self =
      LabelingGraph::uniform({{0}, {1}, {2}, {3}}, RowMatrix::Constant(4, 3, 1.0), 0.5);
  CHECK(max_abs(similarity(w, self).values() - w.values()) < 1e-15);

  const LabelingGraph uniform_data =
      LabelingGraph::uniform({{0, 1}, {1, 2}, {2, 3, 0}, {3}}, RowMatrix::Constant(4, 3, 0.2), 0.5);
  const AssignmentState bary = AssignmentState::barycenter(4, 3);
  CHECK(max_abs(similarity(bary, uniform_data).values() - bary.values()) < 1e-15);

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + static_cast<Index>(trial % 15);
    const Index labels = 2 + static_cast<Index>(trial % 7);
    const AssignmentState ws = testing::random_state(rng, n, labels);
    const LabelingGraph g = testing::random_graph(rng, n, labels, 4, testing::uniform(rng, 0.1, 2.0));
    const AssignmentState s = similarity(ws, g);
    worst = std::max(worst, max_abs(s.values() - oracles::similarity_by_composition(ws, g)));
    for (Index i = 0; i < n; ++i) {
      CHECK(is_simplex_point(s.row(i).transpose()));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("vector_field") {
  std::mt19937_64 rng(23);
  // S(W) = W when each node is its own neighborhood and the data are uniform.
  const AssignmentState w = testing::random_state(rng, 3, 4);
  const LabelingGraph self = LabelingGraph::uniform({{0}, {1}, {2}}, RowMatrix::Zero(3, 4), 1.0);
  const TangentField f = vector_field(w, self);
  for (Index i = 0; i < 3; ++i) {
    const Vector p = w.row(i).transpose();
    const Vector ref = p.cwiseProduct(p) - p * p.squaredNorm();
    CHECK((f.row(i).transpose() - ref).cwiseAbs().maxCoeff() < 1e-15);
  }

  const LabelingGraph uniform_data =
      LabelingGraph::uniform({{0, 1}, {0, 1}}, RowMatrix::Constant(2, 3, 0.4), 1.0);
  CHECK(max_abs(vector_field(AssignmentState::barycenter(2, 3), uniform_data).values()) < 1e-16);

  // |J| = 2 at the barycenter with D = (0, d): S = (1, e^{-d}) / (1 + e^{-d}).
  const double dd = 0.8;
  const LabelingGraph two = LabelingGraph::uniform({{0}}, RowMatrix{{0.0, dd}}, 1.0);
  const TangentField f2 = vector_field(AssignmentState::barycenter(1, 2), two);
  const double s0 = 1.0 / (1.0 + std::exp(-dd));
  CHECK(f2.row(0)(0) == doctest::Approx(0.5 * s0 - 0.25));
  CHECK(f2.row(0)(1) == doctest::Approx(-(0.5 * s0 - 0.25)));

  const LabelingGraph g = testing::random_graph(rng, 10, 5);
  const TangentField fr = vector_field(testing::random_state(rng, 10, 5), g);
  CHECK(fr.values().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tangent_rhs") {
  std::mt19937_64 rng(24);
  const LabelingGraph g = testing::random_graph(rng, 8, 4);
  const AssignmentState w0 = testing::random_state(rng, 8, 4);
  const TangentField zero = TangentField::zero(8, 4);
  const RowMatrix s0 = similarity(w0, g).values();
  const RowMatrix centered = s0.colwise() - s0.rowwise().mean();
  CHECK(max_abs(tangent_rhs(zero, w0, g).values() - centered) < 1e-15);

  const TangentField v = testing::random_tangent(rng, 8, 4);
  const TangentField rhs = tangent_rhs(v, w0, g);
  CHECK(rhs.values().rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
  const AssignmentState w = exp_map(w0, v.values());
  CHECK(max_abs(pi_w(w, rhs.values()).values() - vector_field(w, g).values()) < 1e-12);
}
