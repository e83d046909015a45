#include "tain/log.hpp"

#include <iostream>
#include <mutex>

namespace tain {

namespace {

std::mutex g_mutex;

void default_sink(LogLevel level, std::string_view message) {
  std::cerr << (level == LogLevel::kWarning ? "warning: " : "") << message << '\n';
}

LogSink& sink() {
  static LogSink s = default_sink;
  return s;
}

void emit(LogLevel level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (sink()) sink()(level, message);
}

}  // namespace

LogSink set_log_sink(LogSink next) {
  std::lock_guard lock(g_mutex);
  auto previous = std::move(sink());
  sink() = std::move(next);
  return previous;
}

void log_info(std::string_view message) { emit(LogLevel::kInfo, message); }
void log_warning(std::string_view message) { emit(LogLevel::kWarning, message); }

}  // namespace tain
