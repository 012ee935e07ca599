#include "xma/threads.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace xma {

namespace {

int g_override = 0;

int env_cap() {
    const char* s = std::getenv("XMA_THREADS");
    if (!s) return 0;
    try {
        const int n = std::stoi(s);
        return n >= 1 ? n : 0;
    } catch (...) {
        return 0;
    }
}

} // namespace

int thread_count() {
    if (g_override >= 1) return g_override;
    const int cap = env_cap();
    const int hw = omp_get_max_threads();
    if (cap >= 1 && cap < hw) return cap;
    return hw;
}

void set_thread_count(int n) { g_override = n; }

} // namespace xma
