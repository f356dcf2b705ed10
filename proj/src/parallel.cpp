#include "wbc/parallel.hpp"

#include <atomic>

namespace wbc {

namespace {
std::atomic<int> g_threads{1};
}

void set_default_threads(int threads) { g_threads = std::max(1, threads); }

int default_threads() { return g_threads; }

} // namespace wbc
