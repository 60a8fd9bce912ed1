#include "cknn/logging.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace cknn::logging {

namespace {

Level from_env() {
  const char* value = std::getenv("CKNN_LOG");
  if (value == nullptr) return Level::kWarn;
  const std::string v(value);
  if (v == "debug") return Level::kDebug;
  if (v == "info") return Level::kInfo;
  if (v == "error") return Level::kError;
  if (v == "off") return Level::kOff;
  return Level::kWarn;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{from_env()};
  return level;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

constexpr std::string_view label(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: break;
  }
  return "";
}

}  // namespace

Level threshold() { return current().load(); }
void set_threshold(Level level) { current().store(level); }

void write(Level level, std::string_view message) {
  if (level < threshold() || level == Level::kOff) return;
  const std::lock_guard lock(sink_mutex());
  std::cerr << "[cknn " << label(level) << "] " << message << '\n';
}

}  // namespace cknn::logging
