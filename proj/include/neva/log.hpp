#pragma once

// Minimal leveled diagnostics on stderr, controlled by NEVA_LOG.

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace neva::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level parse_level(std::string_view s, Level fallback = Level::warn) {
  if (s == "error") return Level::error;
  if (s == "warn") return Level::warn;
  if (s == "info") return Level::info;
  if (s == "debug") return Level::debug;
  return fallback;
}

inline Level threshold() {
  const char* env = std::getenv("NEVA_LOG");
  return env ? parse_level(env) : Level::warn;
}

inline void write(Level level, std::string_view message) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "neva [" << names[static_cast<int>(level)] << "] " << message << '\n';
}

inline void error(std::string_view m) { write(Level::error, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void debug(std::string_view m) { write(Level::debug, m); }

}  // namespace neva::log
