#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>

namespace pad {

enum class LogLevel { info, warning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

namespace detail {
inline LogSink& log_sink() {
  static LogSink sink = [](LogLevel level, const std::string& msg) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << (level == LogLevel::warning ? "warning: " : "") << msg << '\n';
  };
  return sink;
}
}  // namespace detail

// Replaces the process-wide sink; returns the previous one.
inline LogSink set_log_sink(LogSink sink) {
  auto old = detail::log_sink();
  detail::log_sink() = std::move(sink);
  return old;
}

inline void log_info(const std::string& msg) { detail::log_sink()(LogLevel::info, msg); }
inline void log_warning(const std::string& msg) { detail::log_sink()(LogLevel::warning, msg); }

}  // namespace pad
