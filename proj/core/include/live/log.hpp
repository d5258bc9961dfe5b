#pragma once

#include <string>

namespace live::log {

/// Verbosity from the LIVE_LOG environment variable: "off" (default),
/// "info", or "debug".
enum class Level { off = 0, info = 1, debug = 2 };

Level level();
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace live::log
