#include <atomic>
#include <cstdlib>
#include <cstring>

#include "bubblelab/kernels.hpp"

namespace bubblelab::kernels {

#ifdef BUBBLELAB_HAVE_AVX2
const KernelSet& avx2_kernel_set();
#endif

const KernelSet* avx2_kernels() {
#ifdef BUBBLELAB_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return &avx2_kernel_set();
#endif
  return nullptr;
}

namespace {
const KernelSet* initial_choice() {
  const char* env = std::getenv("BUBBLELAB_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
  if (const KernelSet* k = avx2_kernels()) return k;
  return &scalar_kernels();
}
std::atomic<const KernelSet*> g_active{nullptr};
}  // namespace

const KernelSet& active_kernels() {
  const KernelSet* k = g_active.load();
  if (!k) {
    k = initial_choice();
    g_active.store(k);
  }
  return *k;
}

bool select_kernels(const std::string& name) {
  if (name == "scalar") {
    g_active.store(&scalar_kernels());
    return true;
  }
  if (name == "avx2") {
    if (const KernelSet* k = avx2_kernels()) {
      g_active.store(k);
      return true;
    }
  }
  return false;
}

}  // namespace bubblelab::kernels
