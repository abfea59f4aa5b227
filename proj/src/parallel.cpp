#include "assignflow/parallel.hpp"

#ifdef ASSIGNFLOW_HAVE_OPENMP
#include <omp.h>
#endif

namespace assignflow {

void set_thread_limit(int threads) {
#ifdef ASSIGNFLOW_HAVE_OPENMP
  if (threads > 0) {
    omp_set_num_threads(threads);
  }
#else
  (void)threads;
#endif
}

int thread_limit() {
#ifdef ASSIGNFLOW_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

} // namespace assignflow
