#pragma once

#include <spdlog/spdlog.h>

#include <utility>

namespace mixgen::log {

/// Process-wide stderr logger. The level comes from MIXGEN_LOG
/// (error, warn, info, debug); default warn.
spdlog::logger& get();

template <typename... Args>
void debug(fmt::format_string<Args...> fmt, Args&&... args) {
  get().debug(fmt, std::forward<Args>(args)...);
}
template <typename... Args>
void info(fmt::format_string<Args...> fmt, Args&&... args) {
  get().info(fmt, std::forward<Args>(args)...);
}
template <typename... Args>
void warn(fmt::format_string<Args...> fmt, Args&&... args) {
  get().warn(fmt, std::forward<Args>(args)...);
}
template <typename... Args>
void error(fmt::format_string<Args...> fmt, Args&&... args) {
  get().error(fmt, std::forward<Args>(args)...);
}

}  // namespace mixgen::log
