#pragma once

namespace rayleigh {

/// Worker count from RAYLEIGH_WORKERS (default 1). Invalid values fall back to 1.
int workers_from_env();
/// Sets the OpenMP thread count used by the library for the calling thread.
void set_workers(int n);
int current_workers();

}  // namespace rayleigh
