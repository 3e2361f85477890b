#include "botstack/runtime.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace botstack {

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

}  // namespace botstack
