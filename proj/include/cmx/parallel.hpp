#ifndef CMX_PARALLEL_HPP
#define CMX_PARALLEL_HPP

// Minimal fork-join loop used by the frequency-wise kernels. Each index writes
// only its own output slot, so results do not depend on scheduling.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cmx::detail {

/// Worker cap from CMX_THREADS (0 or 1 means sequential); unset means all cores.
inline unsigned thread_cap()
{
    if (const char* env = std::getenv("CMX_THREADS")) {
        try {
            const long value = std::stol(env);
            return value <= 1 ? 1u : static_cast<unsigned>(value);
        } catch (...) {
            return 1u;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t work_per_item, Fn&& fn)
{
    constexpr std::size_t min_work = 1u << 16;
    const unsigned cap = thread_cap();
    const std::size_t workers =
        std::min<std::size_t>(cap, std::max<std::size_t>(1, count * work_per_item / min_work));
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) {
                fn(i);
            }
        });
    }
}

} // namespace cmx::detail

#endif // CMX_PARALLEL_HPP
