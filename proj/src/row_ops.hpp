#pragma once

// Row kernels shared by the single-point and field versions of the simplex
// maps. They accept any Eigen row/column expression so field loops avoid
// temporaries.

#include "assignflow/types.hpp"

#include <cmath>

#if defined(ASSIGNFLOW_HAVE_OPENMP)
#define ASSIGNFLOW_PARALLEL_ROWS _Pragma("omp parallel for schedule(static)")
#else
#define ASSIGNFLOW_PARALLEL_ROWS
#endif

namespace assignflow::detail {

/// out = p e^z / <p, e^z>, computed with a max shift of z.
template <class P, class Z, class Out>
inline void exp_map_into(const P &p, const Z &z, Out &&out) {
  const double shift = z.maxCoeff();
  out = p.array() * (z.array() - shift).exp();
  out /= out.sum();
}

/// out = Diag(p) z - p <p, z>.
template <class P, class Z, class Out>
inline void pi_p_into(const P &p, const Z &z, Out &&out) {
  const double inner = p.dot(z);
  out = p.array() * (z.array() - inner);
}

template <class Z, class Out>
inline void project_t0_into(const Z &z, Out &&out) {
  out = z.array() - z.mean();
}

} // namespace assignflow::detail
