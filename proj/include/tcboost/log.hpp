#pragma once

#include <string_view>

namespace tcboost::log {

enum class Level { quiet = 0, warn = 1, info = 2 };

void set_level(Level level);
Level level();

// Thread-safe, one line per call, to standard error.
void warn(std::string_view message);
void info(std::string_view message);

}  // namespace tcboost::log
