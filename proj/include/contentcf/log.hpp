#pragma once

#include <string_view>

namespace contentcf::log {

enum class Level { debug, info, warning, error, quiet };

/// Messages below this level are dropped. Default: info.
void set_level(Level level);
Level level();

void debug(std::string_view message);
void info(std::string_view message);
void warning(std::string_view message);
void error(std::string_view message);

}  // namespace contentcf::log
