// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include "forge/logging.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace forge::log {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void stderr_sink(Level level, std::string_view message) {
  if (level == Level::Debug) return;
  static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
  std::cerr << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

Sink& current_sink() {
  static Sink sink = stderr_sink;
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  if (!sink) sink = stderr_sink;
  return std::exchange(current_sink(), std::move(sink));
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  current_sink()(level, message);
}

}  // namespace forge::log
