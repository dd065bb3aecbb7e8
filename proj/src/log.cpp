#include "llm4vis/log.hpp"

#include <iostream>
#include <mutex>

namespace llm4vis::log {

namespace {

std::mutex& mu() {
    static std::mutex m;
    return m;
}

Sink& sink() {
    static Sink s = [](Level level, std::string_view message) {
        if (level < Level::Warning) return;
        std::cerr << (level == Level::Warning ? "warning: " : "error: ") << message << '\n';
    };
    return s;
}

}  // namespace

Sink set_sink(Sink s) {
    std::lock_guard lock(mu());
    Sink old = std::move(sink());
    sink() = std::move(s);
    return old;
}

void write(Level level, std::string_view message) {
    std::lock_guard lock(mu());
    if (sink()) sink()(level, message);
}

}  // namespace llm4vis::log
