#pragma once

#include "assignflow/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace assignflow {

/// Coefficients of an s-stage Runge-Kutta scheme, optionally with a second
/// weight row for embedded error estimation.
struct ButcherTableau {
  std::string name;
  Matrix a;
  Vector b;
  std::optional<Vector> b_hat;
  Vector c;
  int order = 1;
  std::optional<int> embedded_order;

  Index stages() const noexcept { return b.size(); }
  bool explicit_scheme() const;
  bool embedded() const noexcept { return b_hat.has_value(); }

  /// Throws InvalidArgument unless c_i = sum_j a_ij and the weights sum to one.
  void validate() const;
};

/// Registered names: fe, h2, h3, rk4, be, rkmk12, rkmk32.
const ButcherTableau &tableau(std::string_view name);
std::vector<std::string> tableau_names();

} // namespace assignflow
