#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace assignflow;
using testing::random_simplex;
using testing::random_vector;

namespace {

// Plain-loop oracles.
Vector softmax(const Vector &z) {
  Vector e(z.size());
  double s = 0.0;
  for (Index j = 0; j < z.size(); ++j) {
    e(j) = std::exp(z(j));
    s += e(j);
  }
  return e / s;
}

Vector subtract_mean(const Vector &z) {
  double s = 0.0;
  for (Index j = 0; j < z.size(); ++j) {
    s += z(j);
  }
  Vector out = z;
  for (Index j = 0; j < z.size(); ++j) {
    out(j) -= s / static_cast<double>(z.size());
  }
  return out;
}

Vector replicator(const Vector &p, const Vector &z) {
  double pz = 0.0;
  for (Index j = 0; j < p.size(); ++j) {
    pz += p(j) * z(j);
  }
  Vector out(p.size());
  for (Index j = 0; j < p.size(); ++j) {
    out(j) = p(j) * z(j) - p(j) * pz;
  }
  return out;
}

double max_abs(const Vector &v) { return v.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("project_t0") {
  CHECK(max_abs(project_t0(Vector(Vector::Ones(3)))) == 0.0);
  const Vector half = project_t0(Vector{{1.0, 0.0}});
  CHECK(half(0) == doctest::Approx(0.5));
  CHECK(half(1) == doctest::Approx(-0.5));

  std::mt19937_64 rng(11);
  const Vector z = random_vector(rng, 7, 3.0);
  CHECK(max_abs(project_t0(z) - subtract_mean(z)) < 1e-14);
  CHECK(std::abs(project_t0(z).sum()) < 1e-14);

  Vector bad = z;
  bad(2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(project_t0(bad), InvalidArgument);
  bad(2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(project_t0(bad), InvalidArgument);
}

TEST_CASE("pi_p") {
  const Vector q = pi_p(barycenter(2), Vector{{1.0, 0.0}});
  CHECK(q(0) == doctest::Approx(0.25));
  CHECK(q(1) == doctest::Approx(-0.25));

  std::mt19937_64 rng(12);
  const Vector p = random_simplex(rng, 5);
  CHECK(max_abs(pi_p(p, Vector(Vector::Ones(5)))) < 1e-16);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector pp = random_simplex(rng, 5);
    const Vector z = random_vector(rng, 5, 4.0);
    const Vector ref = replicator(pp, z);
    CHECK(max_abs(pi_p(pp, z) - ref) < 1e-14);
    CHECK(max_abs(pi_p(pp, project_t0(z)) - ref) < 1e-13);
    CHECK(max_abs(project_t0(pi_p(pp, z)) - ref) < 1e-13);
  }
  CHECK_THROWS_AS(pi_p(p, Vector(Vector::Ones(4))), InvalidArgument);
}

TEST_CASE("exp_map") {
  std::mt19937_64 rng(13);
  const Vector p = random_simplex(rng, 6);
  CHECK(max_abs(exp_map(p, Vector(Vector::Zero(6))) - p) < 1e-15);

  const Vector z = random_vector(rng, 6, 3.0);
  const Vector shifted = (z.array() + 5.0).matrix();
  CHECK(max_abs(exp_map(p, z) - exp_map(p, shifted)) < 1e-14);
  CHECK(max_abs(exp_map(barycenter(6), z) - softmax(z)) < 1e-14);

  // Extreme finite inputs stay finite and on the simplex.
  const Vector huge{{800.0, -800.0, 0.0}};
  const Vector r = exp_map(barycenter(3), huge);
  CHECK(r.allFinite());
  CHECK(std::abs(r.sum() - 1.0) < 1e-12);
  CHECK(r(0) == doctest::Approx(1.0));
}

TEST_CASE("exp_map_inv") {
  std::mt19937_64 rng(14);
  const Vector p = random_simplex(rng, 8);
  CHECK(max_abs(exp_map_inv(p, p)) < 1e-15);

  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector a = random_simplex(rng, 8, 4.0);
    const Vector b = random_simplex(rng, 8, 4.0);
    worst = std::max(worst, max_abs(exp_map(a, exp_map_inv(a, b)) - b));
  }
  CHECK(worst < 1e-10);

  const Vector q{{0.7, 0.2, 0.1}};
  Vector ref(3);
  for (Index j = 0; j < 3; ++j) {
    ref(j) = std::log(3.0 * q(j));
  }
  CHECK(max_abs(exp_map_inv(barycenter(3), q) - subtract_mean(ref)) < 1e-14);
}

TEST_CASE("big_exp and big_exp_inv") {
  std::mt19937_64 rng(15);
  const Vector p = random_simplex(rng, 5);
  CHECK(max_abs(big_exp(p, Vector(Vector::Zero(5))) - p) < 1e-15);
  CHECK(max_abs(big_exp_inv(p, p)) < 1e-15);

  const Vector v = project_t0(random_vector(rng, 5));
  CHECK(max_abs(big_exp(p, v) - exp_map(p, v.cwiseQuotient(p))) < 1e-15);

  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector a = random_simplex(rng, 7, 4.0);
    const Vector b = random_simplex(rng, 7, 4.0);
    worst = std::max(worst, max_abs(big_exp(a, big_exp_inv(a, b)) - b));
  }
  CHECK(worst < 1e-10);

  // p = (1/2, 1/2), q = (3/4, 1/4): log(q/p) = (log 1.5, log 0.5).
  const Vector l{{std::log(1.5), std::log(0.5)}};
  const Vector ref = replicator(barycenter(2), l);
  CHECK(max_abs(big_exp_inv(barycenter(2), Vector{{0.75, 0.25}}) - ref) < 1e-15);
  CHECK(ref(0) == doctest::Approx((std::log(1.5) - std::log(0.5)) / 4.0));
}

TEST_CASE("geometric_mean") {
  std::mt19937_64 rng(16);
  const Vector base = random_simplex(rng, 4);
  const std::vector<Vector> self{base};
  const std::vector<double> one{1.0};
  CHECK(max_abs(geometric_mean(base, self, one) - base) < 1e-15);

  const Vector q = random_simplex(rng, 4);
  const std::vector<Vector> same{q, q, q};
  const std::vector<double> thirds{0.2, 0.3, 0.5};
  CHECK(max_abs(geometric_mean(base, same, thirds) - q) < 1e-14);

  for (int trial = 0; trial < 50; ++trial) {
    const Vector b = random_simplex(rng, 4);
    const std::vector<Vector> pts{random_simplex(rng, 4), random_simplex(rng, 4),
                                  random_simplex(rng, 4)};
    const std::vector<double> w{0.5, 0.3, 0.2};
    // Normalized weighted product of the points, and Exp_b of the mean Exp_b^{-1}.
    Vector prod = Vector::Ones(4);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      prod = prod.cwiseProduct(pts[k].array().pow(w[k]).matrix());
    }
    prod /= prod.sum();
    Vector mean_tangent = Vector::Zero(4);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      mean_tangent += w[k] * big_exp_inv(b, pts[k]);
    }
    const Vector g = geometric_mean(b, pts, w);
    CHECK(max_abs(g - prod) < 1e-12);
    CHECK(max_abs(g - big_exp(b, mean_tangent)) < 1e-12);
    CHECK(is_simplex_point(g));
  }

  const std::vector<double> bad{0.5, 0.3, 0.3};
  CHECK_THROWS_AS(geometric_mean(base, same, bad), InvalidArgument);
  const std::vector<double> negative{1.2, -0.1, -0.1};
  CHECK_THROWS_AS(geometric_mean(base, same, negative), InvalidArgument);
}

TEST_CASE("state and field invariants") {
  CHECK_THROWS_AS(AssignmentState(RowMatrix{{0.5, 0.6}}), InvalidArgument);
  CHECK_THROWS_AS(AssignmentState(RowMatrix{{1.0, 0.0}}), InvalidArgument);
  CHECK_NOTHROW(AssignmentState(RowMatrix{{0.25, 0.75}}));
  CHECK_THROWS_AS(TangentField(RowMatrix{{0.5, 0.4}}), InvalidArgument);
  CHECK_NOTHROW(TangentField(RowMatrix{{0.5, -0.5}}));

  const AssignmentState bary = AssignmentState::barycenter(3, 4);
  CHECK(bary.values().isApproxToConstant(0.25));

  std::mt19937_64 rng(17);
  const AssignmentState w = testing::random_state(rng, 5, 4);
  const TangentField v = testing::random_tangent(rng, 5, 4);
  const AssignmentState moved = big_exp(w, v);
  CHECK(big_exp_inv(w, moved).values().isApprox(v.values(), 1e-10));
  CHECK(exp_map(w, exp_map_inv(w, moved).values()).values().isApprox(moved.values(), 1e-10));
  const TangentField flat = TangentField::from_flat(v.flat(), 5, 4);
  CHECK(flat.values() == v.values());
  CHECK(d_inf(v.values(), v.values()) == 0.0);
  CHECK(max_row_norm(v.values()) == doctest::Approx(v.values().rowwise().norm().maxCoeff()));
}
