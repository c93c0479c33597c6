#pragma once

#include <cstddef>

namespace ccm {

/// Execution policy for the kernels that have both a serial reference and an
/// OpenMP implementation. Both produce identical results.
enum class Exec { serial, parallel };

/// Worker count for parallel kernels: machine parallelism, capped by the
/// CCM_THREADS environment variable when it holds a positive integer.
int worker_count();

}  // namespace ccm
