#pragma once

namespace xma {

// Worker-thread count for OpenMP kernels. Resolved once from XMA_THREADS
// (values < 1 and parse failures fall back to the OpenMP default).
int thread_count();

// Test hook: override the cap for the current process. 0 restores XMA_THREADS.
void set_thread_count(int n);

} // namespace xma
