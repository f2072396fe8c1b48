#include "mixgen/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <string_view>

namespace mixgen::log {

namespace {
spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("MIXGEN_LOG");
  const std::string_view v = env ? env : "";
  if (v == "error") return spdlog::level::err;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}
}  // namespace

spdlog::logger& get() {
  static const auto logger = [] {
    auto l = std::make_shared<spdlog::logger>("mixgen", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_level(level_from_env());
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *logger;
}

}  // namespace mixgen::log
