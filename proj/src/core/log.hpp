// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

namespace panelstyle::log {

enum class Level { kDebug, kInfo, kWarn, kError };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink; passing an empty function restores stderr.
void set_sink(Sink sink);
void set_min_level(Level level);

void write(Level level, const std::string& msg);
inline void debug(const std::string& msg) { write(Level::kDebug, msg); }
inline void info(const std::string& msg) { write(Level::kInfo, msg); }
inline void warn(const std::string& msg) { write(Level::kWarn, msg); }
inline void error(const std::string& msg) { write(Level::kError, msg); }

}  // namespace panelstyle::log
