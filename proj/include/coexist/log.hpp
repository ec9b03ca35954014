// Minimal stderr logging. Verbosity comes from COEXIST_LOG
// (error, warn, info, debug; default warn).
#pragma once

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>
#include <string_view>

namespace coexist::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level level_from_env() {
  const char* env = std::getenv("COEXIST_LOG");
  if (env == nullptr) return Level::Warn;
  const std::string_view v(env);
  if (v == "error") return Level::Error;
  if (v == "info") return Level::Info;
  if (v == "debug") return Level::Debug;
  return Level::Warn;
}

inline Level threshold() {
  static const Level lvl = level_from_env();
  return lvl;
}

inline void emit(Level lvl, std::string_view msg) {
  if (static_cast<int>(lvl) > static_cast<int>(threshold())) return;
  static std::mutex mu;
  static constexpr const char* tags[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(mu);
  std::fprintf(stderr, "[coexist %s] %.*s\n", tags[static_cast<int>(lvl)], static_cast<int>(msg.size()),
               msg.data());
}

inline void error(std::string_view m) { emit(Level::Error, m); }
inline void warn(std::string_view m) { emit(Level::Warn, m); }
inline void info(std::string_view m) { emit(Level::Info, m); }
inline void debug(std::string_view m) { emit(Level::Debug, m); }

}  // namespace coexist::log
