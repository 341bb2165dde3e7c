#include "ttc/log.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace ttc::log {

namespace {

Level parse_level() {
    const char* env = std::getenv("TTC_LOG_LEVEL");
    if (!env) return Level::warn;
    const std::string value(env);
    if (value == "error") return Level::error;
    if (value == "warn") return Level::warn;
    if (value == "info") return Level::info;
    if (value == "debug") return Level::debug;
    return Level::warn;
}

const char* tag(Level level) {
    switch (level) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}

} // namespace

Level threshold() {
    static const Level level = parse_level();
    return level;
}

void write(Level level, std::string_view message) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    std::cerr << "[" << tag(level) << "] " << message << "\n";
}

} // namespace ttc::log
