#pragma once

namespace tain {

/// Keeps large freed blocks in the heap instead of returning them to the OS.
/// Training churns through same-sized multi-megabyte buffers every step, and
/// with glibc's defaults each one is a fresh mmap plus page faults. No-op on
/// other C libraries. Call once at program start.
void tune_allocator();

}  // namespace tain
