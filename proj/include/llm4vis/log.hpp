#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace llm4vis::log {

enum class Level { Debug, Info, Warning, Error };

using Sink = std::function<void(Level, std::string_view)>;

/// Replaces the sink (default: stderr, Warning and above). Returns the old one.
Sink set_sink(Sink sink);
void write(Level level, std::string_view message);

inline void warning(std::string_view m) { write(Level::Warning, m); }
inline void info(std::string_view m) { write(Level::Info, m); }

}  // namespace llm4vis::log
