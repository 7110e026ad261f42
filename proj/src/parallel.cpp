#include "taillight/parallel.hpp"

#include <cstdlib>
#include <string>

namespace taillight {

int worker_count() {
  if (const char* env = std::getenv("TAILLIGHT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
      // fall through to the hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

}  // namespace taillight
