#include "rayleigh/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace rayleigh {

int workers_from_env() {
  const char* s = std::getenv("RAYLEIGH_WORKERS");
  if (!s) return 1;
  try {
    const int n = std::stoi(s);
    return n > 0 ? n : 1;
  } catch (...) {
    return 1;
  }
}

void set_workers(int n) { omp_set_num_threads(n > 0 ? n : 1); }

int current_workers() { return omp_get_max_threads(); }

}  // namespace rayleigh
