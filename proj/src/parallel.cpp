#include "lowlight/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace lowlight {

std::optional<int> threads_from_env() {
  const char* raw = std::getenv("THREADS");
  if (raw == nullptr) return std::nullopt;
  std::string_view text(raw);
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || value <= 0) {
    return std::nullopt;
  }
  return value;
}

int configure_threads_from_env() {
  if (auto n = threads_from_env()) omp_set_num_threads(*n);
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace lowlight
