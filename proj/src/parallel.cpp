#include "bubblelab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace bubblelab {

namespace {
int env_threads() {
  if (const char* s = std::getenv("BUBBLELAB_THREADS")) {
    try {
      const int n = std::stoi(s);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 1;
}
std::atomic<int> g_threads{env_threads()};
}  // namespace

int thread_count() { return g_threads.load(); }
void set_thread_count(int n) { g_threads.store(n > 0 ? n : 1); }

}  // namespace bubblelab
