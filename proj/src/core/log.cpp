// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/log.hpp"

#include <iostream>
#include <mutex>

namespace panelstyle::log {
namespace {

std::mutex g_mutex;
Sink g_sink;
Level g_min = Level::kInfo;

const char* tag(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "?";
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void set_min_level(Level level) {
  std::lock_guard lock(g_mutex);
  g_min = level;
}

void write(Level level, const std::string& msg) {
  std::lock_guard lock(g_mutex);
  if (level < g_min) return;
  if (g_sink) {
    g_sink(level, msg);
    return;
  }
  std::cerr << "[" << tag(level) << "] " << msg << '\n';
}

}  // namespace panelstyle::log
