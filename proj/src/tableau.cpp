#include "assignflow/tableau.hpp"

#include <cmath>
#include <map>

namespace assignflow {
namespace {

ButcherTableau make(std::string name, std::initializer_list<std::initializer_list<double>> a,
                    std::initializer_list<double> b, std::initializer_list<double> c, int order,
                    std::optional<std::initializer_list<double>> b_hat = std::nullopt,
                    std::optional<int> embedded_order = std::nullopt) {
  ButcherTableau t;
  t.name = std::move(name);
  const auto s = static_cast<Index>(b.size());
  t.a = Matrix::Zero(s, s);
  Index i = 0;
  for (const auto &row : a) {
    Index j = 0;
    for (double v : row) {
      t.a(i, j++) = v;
    }
    ++i;
  }
  t.b = Eigen::Map<const Vector>(std::data(b), s);
  t.c = Eigen::Map<const Vector>(std::data(c), s);
  if (b_hat) {
    t.b_hat = Vector(Eigen::Map<const Vector>(std::data(*b_hat), s));
  }
  t.order = order;
  t.embedded_order = embedded_order;
  t.validate();
  return t;
}

const std::map<std::string, ButcherTableau, std::less<>> &registry() {
  static const std::map<std::string, ButcherTableau, std::less<>> tableaus = [] {
    std::map<std::string, ButcherTableau, std::less<>> m;
    m.emplace("fe", make("fe", {{0.0}}, {1.0}, {0.0}, 1));
    m.emplace("h2", make("h2", {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}, {0.0, 1.0}, 2));
    m.emplace("h3", make("h3", {{0.0, 0.0, 0.0}, {1.0 / 3.0, 0.0, 0.0}, {0.0, 2.0 / 3.0, 0.0}},
                         {1.0 / 4.0, 0.0, 3.0 / 4.0}, {0.0, 1.0 / 3.0, 2.0 / 3.0}, 3));
    m.emplace("rk4", make("rk4",
                          {{0.0, 0.0, 0.0, 0.0},
                           {0.5, 0.0, 0.0, 0.0},
                           {0.0, 0.5, 0.0, 0.0},
                           {0.0, 0.0, 1.0, 0.0}},
                          {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0}, {0.0, 0.5, 0.5, 1.0}, 4));
    m.emplace("be", make("be", {{1.0}}, {1.0}, {1.0}, 1));
    // Forward Euler propagated, Heun-2 as the companion estimate.
    m.emplace("rkmk12", make("rkmk12", {{0.0, 0.0}, {1.0, 0.0}}, {1.0, 0.0}, {0.0, 1.0}, 1,
                             std::initializer_list<double>{0.5, 0.5}, 2));
    // Heun-3 propagated. The companion weights as published satisfy only the
    // first-order condition (sum b_hat c = 2/9), so the estimate is O(h^2).
    m.emplace("rkmk32",
              make("rkmk32", {{0.0, 0.0, 0.0}, {1.0 / 3.0, 0.0, 0.0}, {0.0, 2.0 / 3.0, 0.0}},
                   {1.0 / 4.0, 0.0, 3.0 / 4.0}, {0.0, 1.0 / 3.0, 2.0 / 3.0}, 3,
                   std::initializer_list<double>{1.0 / 3.0, 2.0 / 3.0, 0.0}, 1));
    return m;
  }();
  return tableaus;
}

} // namespace

bool ButcherTableau::explicit_scheme() const {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = i; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) {
        return false;
      }
    }
  }
  return true;
}

void ButcherTableau::validate() const {
  const Index s = b.size();
  if (s < 1 || a.rows() != s || a.cols() != s || c.size() != s) {
    throw InvalidArgument("ButcherTableau " + name + ": inconsistent stage count");
  }
  for (Index i = 0; i < s; ++i) {
    if (std::abs(a.row(i).sum() - c(i)) > 1e-12) {
      throw InvalidArgument("ButcherTableau " + name + ": c_i != sum_j a_ij");
    }
  }
  if (std::abs(b.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("ButcherTableau " + name + ": weights do not sum to one");
  }
  if (b_hat && (b_hat->size() != s || std::abs(b_hat->sum() - 1.0) > 1e-12)) {
    throw InvalidArgument("ButcherTableau " + name + ": secondary weights do not sum to one");
  }
}

const ButcherTableau &tableau(std::string_view name) {
  const auto &reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) {
    throw InvalidArgument("unknown tableau '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> tableau_names() {
  std::vector<std::string> names;
  for (const auto &[name, t] : registry()) {
    names.push_back(name);
  }
  return names;
}

} // namespace assignflow
