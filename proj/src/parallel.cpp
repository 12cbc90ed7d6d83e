#include "dictminimax/parallel.hpp"

#include <cstdlib>
#include <string>

namespace dictminimax {

std::size_t configured_thread_count() {
  std::size_t threads = 0;
  if (const char* env = std::getenv("DICTMINIMAX_THREADS")) {
    try {
      threads = static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      threads = 0;
    }
  }
  if (threads == 0) threads = std::thread::hardware_concurrency();
  return threads == 0 ? 1 : threads;
}

}  // namespace dictminimax
