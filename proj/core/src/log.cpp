#include "live/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace live::log {

namespace {

Level parse_level() {
  const char* env = std::getenv("LIVE_LOG");
  if (env == nullptr) return Level::off;
  const std::string v(env);
  if (v == "debug" || v == "2") return Level::debug;
  if (v == "info" || v == "1") return Level::info;
  return Level::off;
}

std::mutex& io_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level level() {
  static const Level l = parse_level();
  return l;
}

void info(const std::string& msg) {
  if (level() >= Level::info) {
    std::lock_guard<std::mutex> lock(io_mutex());
    std::cerr << "[live] " << msg << "\n";
  }
}

void debug(const std::string& msg) {
  if (level() >= Level::debug) {
    std::lock_guard<std::mutex> lock(io_mutex());
    std::cerr << "[live:debug] " << msg << "\n";
  }
}

}  // namespace live::log
