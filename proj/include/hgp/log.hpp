#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace hgp {

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}
inline WarningHandler& warning_handler() {
    static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return h;
}
}  // namespace detail

/// Replace the process-wide warning sink; returns the previous one.
inline WarningHandler set_warning_handler(WarningHandler h) {
    std::lock_guard lock(detail::warning_mutex());
    return std::exchange(detail::warning_handler(), std::move(h));
}

inline void warn(const std::string& msg) {
    std::lock_guard lock(detail::warning_mutex());
    if (detail::warning_handler()) detail::warning_handler()(msg);
}

}  // namespace hgp
