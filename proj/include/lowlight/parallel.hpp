#pragma once

#include <cstddef>
#include <optional>

namespace lowlight {

/// Selects between the OpenMP kernels and the straightforward serial
/// reference kernels. Both produce results that agree to floating-point
/// tolerance; the parallel kernels are also independent of the worker count.
enum class Exec { serial, parallel };

/// Parses a worker cap from the THREADS environment variable. Returns nullopt
/// when unset, empty, or not a positive integer.
std::optional<int> threads_from_env();

/// Applies THREADS (if set) to the OpenMP runtime. Returns the effective
/// maximum worker count.
int configure_threads_from_env();

int max_threads();

}  // namespace lowlight
