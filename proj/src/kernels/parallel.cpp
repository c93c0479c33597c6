#include "ccm/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>

namespace ccm {

int worker_count() {
  int workers = omp_get_max_threads();
  if (const char* env = std::getenv("CCM_THREADS")) {
    int cap = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), cap);
    if (ec == std::errc() && *ptr == '\0' && cap > 0) workers = std::min(workers, cap);
  }
  return std::max(workers, 1);
}

}  // namespace ccm
