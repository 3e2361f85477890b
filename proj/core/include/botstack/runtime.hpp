#pragma once

namespace botstack {

/// Keeps large training buffers on the heap instead of fresh mmap regions.
/// Training allocates and frees multi-megabyte workspaces every batch; with
/// glibc defaults each one page-faults anew. No-op off glibc.
void tune_allocator();

}  // namespace botstack
