#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pcflat {

/// Worker-pool size; 0 means hardware concurrency. Settable via
/// set_thread_count or the PCFLAT_THREADS environment variable.
inline int& thread_count_slot()
{
    static int n = 0;
    return n;
}

inline void set_thread_count(int n) { thread_count_slot() = n; }

inline int effective_threads()
{
    int n = thread_count_slot();
    if (n <= 0) {
        if (const char* env = std::getenv("PCFLAT_THREADS")) {
            n = std::atoi(env);
        }
    }
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
    }
    return n > 0 ? n : 1;
}

/**
 * @brief Runs fn(i) for i in [0, count) on a static chunked pool.
 *
 * Each index owns its output slot, so results are identical for any pool
 * size. fn must not touch shared mutable state.
 */
template <typename F>
void parallel_for(std::size_t count, F&& fn)
{
    const int workers = std::min<std::size_t>(effective_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = static_cast<std::size_t>(w); i < count;
                     i += static_cast<std::size_t>(workers)) {
                    fn(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace pcflat
