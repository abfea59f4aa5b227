#pragma once

namespace assignflow {

/// Caps the number of threads used by row-parallel loops (no-op without OpenMP).
void set_thread_limit(int threads);
int thread_limit();

} // namespace assignflow
