#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace kfp {

/// Chunked parallel loop: fn(begin, end) over disjoint ranges covering [0, n).
/// Chunk boundaries must not affect results (disjoint writes only), so the
/// output is identical for any worker count.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t)>& fn);

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void check_runtime(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

/// z log z with the L log L convention 0 log 0 = 0.
inline double zlogz(double z) {
    return z > 0.0 ? z * std::log(z) : 0.0;
}

/// Formats a double with 17 significant digits (lossless round trip).
std::string format_g17(double x);

}  // namespace kfp
